use super::ConfigurationMatrix;
use crate::ensembles::{
    match_bounded, small_threshold, truncation_threshold, CellStreams, ConditionalLaw, EntryLaw,
    MatchedBoundedLaw, SymmetricMatrixSample,
};
use crate::matrix::SymmetricMatrix;
use crate::Result;

/// Law of a small entry in the truncated regime: `X` conditioned on
/// `|X| <= min(n^{1/4} R_under, sqrt(n)/R_over)`.
pub fn small_entry_law(law: &EntryLaw, n: usize, r_under: f64, r_over: f64) -> Result<ConditionalLaw> {
    let bound = small_threshold(n, r_under).min(truncation_threshold(n, r_over));
    ConditionalLaw::small(law, bound)
}

/// Bounded law matching the first four moments of [`small_entry_law`].
pub fn matched_small_law(law: &EntryLaw, n: usize, r_under: f64, r_over: f64, d: f64) -> Result<MatchedBoundedLaw> {
    match_bounded(small_entry_law(law, n, r_under, r_over)?.moments(), d)
}

/// `H = X(L)`: cells with `L_jk = 1` from the small-conditioned law and cells
/// with `L_jk = 0` from the annulus law.
pub fn sample_conditioned(
    law: &EntryLaw,
    l: &ConfigurationMatrix,
    r_over: f64,
    seed: u64,
) -> Result<SymmetricMatrixSample> {
    let n = l.n();
    let r_under = l.params.r_under;
    let small = small_entry_law(law, n, r_under, r_over)?;
    let large = if l.zero_count() > 0 {
        Some(ConditionalLaw::annulus(
            law,
            small_threshold(n, r_under),
            truncation_threshold(n, r_over),
        )?)
    } else {
        None
    };
    let streams = CellStreams::new(seed);
    let mut matrix = SymmetricMatrix::zeros(n);
    for j in 0..n {
        for k in j..n {
            let mut rng = streams.cell(j, k);
            let x = match (&large, l.is_small(j, k)) {
                (_, true) => small.sample(&mut rng)?,
                (Some(big), false) => big.sample(&mut rng)?,
                (None, false) => unreachable!(),
            };
            matrix.set(j, k, x);
        }
    }
    Ok(SymmetricMatrixSample {
        law: law.clone(),
        seed,
        matrix,
    })
}

/// `H^y`: redraws the `L_jk = 1` cells of `h` from `matched`, keeps the rest.
pub fn replace_small_cells(
    h: &SymmetricMatrix,
    l: &ConfigurationMatrix,
    matched: &MatchedBoundedLaw,
    seed: u64,
) -> SymmetricMatrix {
    let table = matched.table();
    let streams = CellStreams::new(seed);
    SymmetricMatrix::from_upper(h.n(), |j, k| {
        if l.is_small(j, k) {
            table.draw(&mut streams.cell(j, k))
        } else {
            h.get(j, k)
        }
    })
}

/// Four-moment replacement with bound `d` of the small entries of `h`.
pub fn replacement_matrix(
    h: &SymmetricMatrixSample,
    l: &ConfigurationMatrix,
    d: f64,
    r_over: f64,
    seed: u64,
) -> Result<SymmetricMatrixSample> {
    let matched = matched_small_law(&h.law, h.n(), l.params.r_under, r_over, d)?;
    Ok(SymmetricMatrixSample {
        law: h.law.clone(),
        seed,
        matrix: replace_small_cells(&h.matrix, l, &matched, seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::truncation::ConfigParams;

    fn params(r_under: f64) -> ConfigParams {
        ConfigParams {
            r_under,
            r: 10,
            k: 10,
            p_n: 0.0,
        }
    }

    const T5: EntryLaw = EntryLaw::StudentT { nu: 5.0 };

    #[test]
    fn all_ones_gives_small_entries() {
        let n = 64;
        let l = ConfigurationMatrix::all_ones(n, params(0.5));
        let h = sample_conditioned(&T5, &l, 1.0, 4).unwrap();
        let bound = small_threshold(n, 0.5);
        assert!(h.matrix.as_slice().iter().all(|x| x.abs() <= bound));
        assert!(h.matrix.is_symmetric());
        assert_eq!(h, sample_conditioned(&T5, &l, 1.0, 4).unwrap());
    }

    #[test]
    fn zero_cell_is_large() {
        let n = 64;
        let l = ConfigurationMatrix::from_zeros(n, &[(0, 1)], params(0.5));
        let h = sample_conditioned(&T5, &l, 1.0, 5).unwrap();
        let x = h.matrix.get(0, 1).abs();
        assert!(x > small_threshold(n, 0.5) && x <= truncation_threshold(n, 1.0));
        assert_eq!(h.matrix.get(1, 0), h.matrix.get(0, 1));
    }

    #[test]
    fn small_cells_have_conditioned_variance() {
        let n = 400;
        let l = ConfigurationMatrix::all_ones(n, params(0.4));
        let h = sample_conditioned(&T5, &l, 1.0, 8).unwrap();
        let law = small_entry_law(&T5, n, 0.4, 1.0).unwrap();
        let m = law.moments();
        let var = m[1] - m[0] * m[0];
        assert!(var < 1.0);
        let mut s2 = 0.0;
        let mut cnt = 0.0;
        for j in 0..n {
            for k in j..n {
                s2 += h.matrix.get(j, k).powi(2);
                cnt += 1.0;
            }
        }
        let emp = s2 / cnt;
        let se = ((m[3] - m[1] * m[1]) / cnt).sqrt();
        assert!((emp - var).abs() < 4.0 * se, "{emp} vs {var}");
    }

    #[test]
    fn replacement_keeps_zero_cells_and_bound() {
        let n = 40;
        let x = crate::ensembles::sample_wigner(&T5, n, 2).unwrap();
        let zeros: Vec<(usize, usize)> = (0..n).flat_map(|j| (j..n).map(move |k| (j, k))).collect();
        let none_small = ConfigurationMatrix::from_zeros(n, &zeros, params(1.0));
        let same = replacement_matrix(&x, &none_small, 3.0, 1.0, 9).unwrap();
        assert_eq!(same.matrix, x.matrix);

        let all_small = ConfigurationMatrix::all_ones(n, params(1.0));
        let d = small_threshold(n, 1.0);
        let y = replacement_matrix(&x, &all_small, d, 1.0, 9).unwrap();
        assert!(y.matrix.as_slice().iter().all(|v| v.abs() <= d));
    }

    #[test]
    fn replaced_cells_match_conditioned_moments() {
        let n = 448; // about 10^5 upper-triangle cells
        let r_under = 0.6;
        let l = ConfigurationMatrix::all_ones(n, params(r_under));
        let h = SymmetricMatrixSample {
            law: T5,
            seed: 0,
            matrix: SymmetricMatrix::zeros(n),
        };
        let d = small_threshold(n, r_under);
        let y = replacement_matrix(&h, &l, d, 1.0, 21).unwrap();
        let target = small_entry_law(&T5, n, r_under, 1.0).unwrap().moments();
        let cells: Vec<f64> = (0..n).flat_map(|j| (j..n).map(move |k| (j, k))).map(|(j, k)| y.matrix.get(j, k)).collect();
        let cnt = cells.len() as f64;
        assert!(cnt > 1e5);
        for p in 1..=4 {
            let emp = cells.iter().map(|x| x.powi(p)).sum::<f64>() / cnt;
            // variance of x^p under the matched law is bounded by d^{2p}
            let m2p = cells.iter().map(|x| x.powi(2 * p)).sum::<f64>() / cnt;
            let se = ((m2p - emp * emp).max(0.0) / cnt).sqrt();
            assert!((emp - target[p as usize - 1]).abs() < 4.0 * se + 1e-12, "moment {p}: {emp}");
        }
    }

    #[test]
    fn rademacher_replacement_preserves_law() {
        let m = matched_small_law(&EntryLaw::Rademacher, 64, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(m.atoms.len(), 2);
        assert!((m.atoms[0].0 + 1.0).abs() < 1e-12 && (m.atoms[1].0 - 1.0).abs() < 1e-12);
    }
}
