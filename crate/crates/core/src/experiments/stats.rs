use serde::{Deserialize, Serialize};

use crate::semicircle::{cdf, density, SemicircleQuantiles};
use crate::spectral::SpectralDecomposition;
use crate::{Error, Result};

/// Eigenvalue gap below which a spectrum is flagged as degenerate.
pub const REPEATED_TOL: f64 = 1e-10;

fn sorted(eigenvalues: &[f64]) -> Vec<f64> {
    let mut s = eigenvalues.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// `sup_x |F_n(x) - G_sc(x)|`, attained at a jump of the empirical
/// distribution function.
pub fn kolmogorov_distance(eigenvalues: &[f64]) -> f64 {
    let s = sorted(eigenvalues);
    let n = s.len() as f64;
    s.iter().enumerate().fold(0.0, |m, (i, &x)| {
        let g = cdf(x);
        m.max((((i + 1) as f64) / n - g).abs()).max(((i as f64) / n - g).abs())
    })
}

/// `#{lambda_j in [x - delta/(2n), x + delta/(2n)]} - g_sc(x) delta`.
pub fn counting_statistic(eigenvalues: &[f64], x: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("window width must be positive, got {delta}")));
    }
    let half = delta / (2.0 * eigenvalues.len().max(1) as f64);
    let count = eigenvalues.iter().filter(|&&l| (l - x).abs() <= half).count();
    Ok(count as f64 - density(x) * delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityProfile {
    /// `|lambda_j - gamma_j|`, `j = 1..=n` in position `j - 1`
    pub deviations: Vec<f64>,
    /// `|lambda_j - gamma_j| n^{2/3} min(j, n + 1 - j)^{1/3}`
    pub normalized: Vec<f64>,
    /// max of `normalized` over `log n <= j <= n - log n + 1`
    pub bulk_max: f64,
    /// max of `normalized` over the remaining indices, 0 if there are none
    pub edge_max: f64,
}

pub fn rigidity_profile(eigenvalues: &[f64], quantiles: &SemicircleQuantiles) -> Result<RigidityProfile> {
    let n = eigenvalues.len();
    if quantiles.n != n {
        return Err(Error::InvalidParameter(format!(
            "quantiles for n = {} used with {n} eigenvalues",
            quantiles.n
        )));
    }
    let s = sorted(eigenvalues);
    let nf = n as f64;
    let log_n = nf.ln();
    let mut deviations = Vec::with_capacity(n);
    let mut normalized = Vec::with_capacity(n);
    let (mut bulk_max, mut edge_max) = (0.0f64, 0.0f64);
    for j in 1..=n {
        let d = (s[j - 1] - quantiles.gamma(j)).abs();
        let rho = d * nf.powf(2.0 / 3.0) * (j.min(n + 1 - j) as f64).cbrt();
        let jf = j as f64;
        if jf >= log_n && jf <= nf - log_n + 1.0 {
            bulk_max = bulk_max.max(rho);
        } else {
            edge_max = edge_max.max(rho);
        }
        deviations.push(d);
        normalized.push(rho);
    }
    Ok(RigidityProfile {
        deviations,
        normalized,
        bulk_max,
        edge_max,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelocalizationStat {
    pub n: usize,
    /// `max_{j,k} |u_k(j)|`
    pub max_abs: f64,
    /// `max_abs / sqrt(log n / n)`
    pub ratio: f64,
    /// two eigenvalues closer than [`REPEATED_TOL`]
    pub degenerate: bool,
}

pub fn delocalization_stat(spec: &SpectralDecomposition) -> Result<DelocalizationStat> {
    let n = spec.n();
    if n < 2 {
        return Err(Error::InvalidParameter("delocalization needs n >= 2".into()));
    }
    if !spec.has_vectors() {
        return Err(Error::InvalidParameter("delocalization needs eigenvectors".into()));
    }
    let mut max_abs = 0.0f64;
    for k in 0..n {
        let u = spec.eigenvector(k).expect("vectors present");
        max_abs = u.iter().fold(max_abs, |m, x| m.max(x.abs()));
    }
    let nf = n as f64;
    Ok(DelocalizationStat {
        n,
        max_abs,
        ratio: max_abs / (nf.ln() / nf).sqrt(),
        degenerate: spec.has_near_repeated(REPEATED_TOL),
    })
}

/// Resolvent form of the delocalization bound for coordinate `j`:
/// `max_k |u_k(j)|^2 <= 2 sup_u lambda Im R_jj(u + i lambda)`, with the
/// supremum over a grid of spacing `lambda` covering the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelocalizationCheck {
    pub j: usize,
    pub max_sq: f64,
    pub bound: f64,
}

impl DelocalizationCheck {
    pub fn holds(&self) -> bool {
        self.max_sq <= self.bound
    }
}

pub fn delocalization_resolvent_bound(spec: &SpectralDecomposition, j: usize, lambda: f64) -> Result<DelocalizationCheck> {
    let n = spec.n();
    if !spec.has_vectors() || j >= n {
        return Err(Error::InvalidParameter(format!("coordinate {j} unavailable")));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let eigs = spec.eigenvalues();
    let weights: Vec<f64> = (0..n).map(|k| spec.eigenvector(k).expect("vectors")[j].powi(2)).collect();
    let max_sq = weights.iter().fold(0.0f64, |m, &w| m.max(w));
    let lo = eigs.iter().fold(f64::INFINITY, |m, &x| m.min(x)) - lambda;
    let hi = eigs.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x)) + lambda;
    let steps = ((hi - lo) / lambda).ceil() as usize;
    let mut sup = 0.0f64;
    for i in 0..=steps {
        let u = lo + (hi - lo) * i as f64 / steps.max(1) as f64;
        // lambda Im R_jj(u + i lambda)
        let val: f64 = eigs
            .iter()
            .zip(&weights)
            .map(|(&l, &w)| w * lambda * lambda / ((l - u).powi(2) + lambda * lambda))
            .sum();
        sup = sup.max(val);
    }
    Ok(DelocalizationCheck {
        j,
        max_sq,
        bound: 2.0 * sup,
    })
}

/// Median of the finite values; NaN when there are none.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_wigner, EntryLaw};
    use crate::matrix::SymmetricMatrix;
    use crate::semicircle::quantiles;
    use crate::spectral::{eigendecompose, eigenvalues};

    #[test]
    fn kolmogorov_single_point() {
        assert_eq!(kolmogorov_distance(&[0.0]), 0.5);
    }

    #[test]
    fn kolmogorov_at_quantiles() {
        for n in [5, 64, 301] {
            let q = quantiles(n);
            assert!(kolmogorov_distance(&q.gamma) <= 1.0 / n as f64 + 1e-12);
        }
    }

    #[test]
    fn kolmogorov_matches_dense_grid() {
        let w = sample_wigner(&EntryLaw::Gaussian, 64, 17).unwrap().scaled();
        let eigs = eigenvalues(&w).unwrap();
        let exact = kolmogorov_distance(&eigs);
        let s = sorted(&eigs);
        let n = s.len() as f64;
        let (a, b) = (s[0] - 1e-3, s[s.len() - 1] + 1e-3);
        let m = 1_000_000;
        let mut grid_sup = 0.0f64;
        let mut idx = 0;
        for i in 0..=m {
            let x = a + (b - a) * i as f64 / m as f64;
            while idx < s.len() && s[idx] <= x {
                idx += 1;
            }
            grid_sup = grid_sup.max((idx as f64 / n - cdf(x)).abs());
        }
        assert!(grid_sup <= exact + 1e-12);
        assert!(exact - grid_sup < 1e-6, "{exact} vs {grid_sup}");
    }

    #[test]
    fn counting_cases() {
        let eigs = [-0.1, 0.0, 0.3, 1.0];
        assert_eq!(counting_statistic(&eigs, 10.0, 3.0).unwrap(), 0.0);
        let n = eigs.len() as f64;
        let c = counting_statistic(&eigs, 0.0, n).unwrap();
        let count = eigs.iter().filter(|x| x.abs() <= 0.5).count() as f64;
        assert!((c - (count - density(0.0) * n)).abs() < 1e-15);
        assert!(counting_statistic(&eigs, 0.0, 0.0).is_err());
    }

    #[test]
    fn counting_macroscopic_matches_esd() {
        let w = sample_wigner(&EntryLaw::Gaussian, 200, 2).unwrap().scaled();
        let eigs = eigenvalues(&w).unwrap();
        let n = eigs.len() as f64;
        let c = counting_statistic(&eigs, 0.0, n).unwrap();
        let esd = |x: f64| eigs.iter().filter(|&&l| l <= x).count() as f64 / n;
        let below = eigs.iter().filter(|&&l| l < -0.5).count() as f64 / n;
        let window = esd(0.5) - below;
        assert!(((c + density(0.0) * n) / n - window).abs() <= 1.0 / n);
    }

    #[test]
    fn rigidity_zero_at_quantiles() {
        let q = quantiles(50);
        let p = rigidity_profile(&q.gamma, &q).unwrap();
        assert!(p.deviations.iter().all(|&d| d == 0.0));
        assert_eq!(p.bulk_max, 0.0);
        assert!(rigidity_profile(&q.gamma[..10], &q).is_err());
    }

    #[test]
    fn rigidity_n2() {
        let q = quantiles(2);
        assert_eq!(q.gamma, vec![0.0, 2.0]);
        let p = rigidity_profile(&[1.0, -0.5], &q).unwrap();
        assert_eq!(p.deviations, vec![0.5, 1.0]);
        let scale = 2f64.powf(2.0 / 3.0);
        assert!((p.normalized[0] - 0.5 * scale).abs() < 1e-15);
        assert!((p.normalized[1] - scale).abs() < 1e-15);
        // log 2 <= j <= 3 - log 2 keeps both indices in the bulk
        assert_eq!(p.bulk_max, p.normalized[1]);
        assert_eq!(p.edge_max, 0.0);
    }

    #[test]
    fn delocalization_cases() {
        let id = eigendecompose(&SymmetricMatrix::identity(4)).unwrap();
        let d = delocalization_stat(&id).unwrap();
        assert!((d.max_abs - 1.0).abs() < 1e-12);
        assert!(d.degenerate);
        let one = eigendecompose(&SymmetricMatrix::identity(1)).unwrap();
        assert!(delocalization_stat(&one).is_err());
        let no_vec = SpectralDecomposition::from_parts(vec![0.0, 1.0], None);
        assert!(delocalization_stat(&no_vec).is_err());
    }

    #[test]
    fn delocalization_resolvent_cross_check() {
        let n = 128;
        let w = sample_wigner(&EntryLaw::Gaussian, n, 6).unwrap().scaled();
        let spec = eigendecompose(&w).unwrap();
        let d = delocalization_stat(&spec).unwrap();
        assert!(!d.degenerate && d.ratio > 0.0);
        let v0 = crate::semicircle::lower_resolution(8.0, 2, n);
        for lambda in [v0, 0.01] {
            for j in [0, 17, 127] {
                let c = delocalization_resolvent_bound(&spec, j, lambda).unwrap();
                assert!(c.holds(), "{c:?}");
            }
        }
    }

    #[test]
    fn median_values() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[f64::NAN]).is_nan());
    }
}
