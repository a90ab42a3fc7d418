use serde::{Deserialize, Serialize};

use crate::ensembles::{truncation_threshold, EntryLaw, SymmetricMatrixSample};
use crate::matrix::SymmetricMatrix;
use crate::{Error, Result};

const MIN_SIGMA_SQ: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub n: usize,
    pub r_over: f64,
    /// `sqrt(n) / r_over`
    pub threshold: f64,
    /// Entries of the full `n x n` array set to zero.
    pub altered_count: usize,
    /// `E Xtilde^2 = E X^2 1[|X| <= c] - (E Xhat)^2`
    pub sigma_sq: f64,
    /// `E Xhat = E X 1[|X| <= c]`
    pub mean_shift: f64,
}

/// Truncation at `sqrt(n)/r_over` for a given law and matrix size. The size
/// is a parameter so that the level can be evaluated independently of the
/// matrix it is applied to.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub n: usize,
    pub r_over: f64,
    pub threshold: f64,
    pub mean_shift: f64,
    pub sigma_sq: f64,
}

/// The three stages `Xhat`, `Xtilde = Xhat - E Xhat` and `Xbreve = Xtilde / sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedMatrices {
    pub hat: SymmetricMatrix,
    pub tilde: SymmetricMatrix,
    pub breve: SymmetricMatrix,
    pub report: TruncationReport,
}

impl Truncation {
    pub fn new(law: &EntryLaw, n: usize, r_over: f64) -> Result<Self> {
        law.validate()?;
        if !(r_over >= 1.0) || !r_over.is_finite() {
            return Err(Error::InvalidParameter(format!("R_over must be >= 1, got {r_over}")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        let threshold = truncation_threshold(n, r_over);
        let mean_shift = law.truncated_moment(1, threshold);
        let sigma_sq = law.truncated_moment(2, threshold) - mean_shift * mean_shift;
        Ok(Self {
            n,
            r_over,
            threshold,
            mean_shift,
            sigma_sq,
        })
    }

    /// `Xhat`: zeroes the entries above the threshold.
    pub fn hat(&self, x: &SymmetricMatrix) -> (SymmetricMatrix, TruncationReport) {
        let m = x.n();
        let mut altered = 0usize;
        let hat = SymmetricMatrix::from_upper(m, |j, k| {
            let v = x.get(j, k);
            if v.abs() > self.threshold {
                altered += if j == k { 1 } else { 2 };
                0.0
            } else {
                v
            }
        });
        (hat, self.report(altered))
    }

    /// `Xhat`, `Xtilde` and `Xbreve`; fails when `sigma^2 < 1e-6`.
    pub fn apply(&self, x: &SymmetricMatrix) -> Result<TruncatedMatrices> {
        if self.sigma_sq < MIN_SIGMA_SQ {
            return Err(Error::DegenerateTruncation(self.sigma_sq));
        }
        let (hat, report) = self.hat(x);
        let tilde = SymmetricMatrix::from_upper(hat.n(), |j, k| hat.get(j, k) - self.mean_shift);
        let sigma = self.sigma_sq.sqrt();
        let breve = if sigma == 1.0 {
            tilde.clone()
        } else {
            tilde.scaled(1.0 / sigma)
        };
        Ok(TruncatedMatrices {
            hat,
            tilde,
            breve,
            report,
        })
    }

    fn report(&self, altered_count: usize) -> TruncationReport {
        TruncationReport {
            n: self.n,
            r_over: self.r_over,
            threshold: self.threshold,
            altered_count,
            sigma_sq: self.sigma_sq,
            mean_shift: self.mean_shift,
        }
    }
}

/// `Xhat_jk = X_jk 1[|X_jk| <= sqrt(n)/r_over]`.
pub fn truncate_hat(x: &SymmetricMatrixSample, r_over: f64) -> Result<(SymmetricMatrix, TruncationReport)> {
    let t = Truncation::new(&x.law, x.n(), r_over)?;
    Ok(t.hat(&x.matrix))
}

/// Full truncate / centre / renormalise pipeline with the level taken from
/// the sample's own size.
pub fn center_and_renormalize(x: &SymmetricMatrixSample, r_over: f64) -> Result<TruncatedMatrices> {
    Truncation::new(&x.law, x.n(), r_over)?.apply(&x.matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sample_wigner;
    use crate::quadrature::integrate_to_infinity;

    fn t5_density(x: f64) -> f64 {
        let s = (5.0f64 / 3.0).sqrt();
        let c = 8.0 / (3.0 * std::f64::consts::PI * 5f64.sqrt());
        s * c * (1.0 + (s * x).powi(2) / 5.0).powf(-3.0)
    }

    #[test]
    fn rademacher_is_untouched() {
        for n in [4, 9, 50] {
            let x = sample_wigner(&EntryLaw::Rademacher, n, 3).unwrap();
            let (hat, rep) = truncate_hat(&x, 1.0).unwrap();
            assert_eq!(hat, x.matrix);
            assert_eq!(rep.altered_count, 0);
            let all = center_and_renormalize(&x, 1.0).unwrap();
            assert_eq!(all.tilde, x.matrix);
            assert_eq!(all.breve, x.matrix);
            assert_eq!(all.report.sigma_sq, 1.0);
        }
    }

    #[test]
    fn single_large_entry() {
        let x = SymmetricMatrixSample {
            law: EntryLaw::Gaussian,
            seed: 0,
            matrix: SymmetricMatrix::from_diagonal(&[10.0]),
        };
        let (hat, rep) = truncate_hat(&x, 1.0).unwrap();
        assert_eq!(hat.get(0, 0), 0.0);
        assert_eq!(rep.altered_count, 1);
    }

    #[test]
    fn huge_threshold_is_identity() {
        let x = sample_wigner(&EntryLaw::Gaussian, 20, 1).unwrap();
        let t = Truncation::new(&EntryLaw::Gaussian, 1_000_000, 1.0).unwrap();
        assert!((t.sigma_sq - 1.0).abs() < 1e-12);
        let all = t.apply(&x.matrix).unwrap();
        for (a, b) in all.breve.as_slice().iter().zip(all.hat.as_slice()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn t5_exceedances_match_tail_integral() {
        let n = 512;
        let r_over = (n as f64).ln();
        let law = EntryLaw::StudentT { nu: 5.0 };
        let t = Truncation::new(&law, n, r_over).unwrap();
        let tail = 2.0 * integrate_to_infinity(t5_density, t.threshold, 1e-15);
        let expected = (n * n) as f64 * tail;
        let mut total = 0.0;
        let reps = 5;
        for seed in 0..reps {
            let x = sample_wigner(&law, n, 40 + seed).unwrap();
            total += t.hat(&x.matrix).1.altered_count as f64;
        }
        let mean = total / reps as f64;
        // each off-diagonal exceedance is counted twice, doubling the spread
        assert!(
            (mean - expected).abs() <= 4.0 * (2.0 * expected / reps as f64).sqrt(),
            "{mean} vs {expected}"
        );
    }

    #[test]
    fn t5_variance_deficit() {
        let n = 1024;
        let r_over = (n as f64).ln();
        let law = EntryLaw::StudentT { nu: 5.0 };
        let t = Truncation::new(&law, n, r_over).unwrap();
        let tail2 = 2.0 * integrate_to_infinity(|x| x * x * t5_density(x), t.threshold, 1e-15);
        assert!((1.0 - t.sigma_sq - tail2).abs() < 1e-9);
        let deficit = 1.0 - t.sigma_sq;
        assert!(deficit >= 0.0);
        assert!(deficit <= law.moment(4) * r_over * r_over / n as f64);
    }

    #[test]
    fn breve_has_unit_moments() {
        // asymmetric law whose largest atom exceeds the threshold
        let law = EntryLaw::atoms(vec![(-0.5, 0.8), (2.0, 0.2)]).unwrap();
        let n = 9;
        let t = Truncation::new(&law, n, 2.0).unwrap();
        assert!(t.threshold < 2.0);
        assert!(t.mean_shift.abs() > 0.0);
        assert!(t.mean_shift.abs() <= law.moment(4) * 8.0 / (n as f64).powf(1.5));
        let sigma = t.sigma_sq.sqrt();
        let EntryLaw::Atoms { atoms } = &law else { unreachable!() };
        let breve = |x: f64| {
            let hat = if x.abs() > t.threshold { 0.0 } else { x };
            (hat - t.mean_shift) / sigma
        };
        let m1: f64 = atoms.iter().map(|(x, p)| p * breve(*x)).sum();
        let m2: f64 = atoms.iter().map(|(x, p)| p * breve(*x).powi(2)).sum();
        assert!(m1.abs() < 1e-12 && (m2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_invalid() {
        let law = EntryLaw::atoms(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let t = Truncation::new(&law, 4, 4.0).unwrap();
        assert!(matches!(t.apply(&SymmetricMatrix::zeros(2)), Err(Error::DegenerateTruncation(_))));
        assert!(Truncation::new(&law, 4, 0.5).is_err());
    }
}
