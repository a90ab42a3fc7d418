use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_distr::{Distribution, Pareto, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use statrs::function::beta;

use crate::{Error, Result};

/// Law of a single matrix entry. Every variant is standardised to mean zero
/// and unit variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum EntryLaw {
    Gaussian,
    Rademacher,
    /// Student t with `nu > 4` degrees of freedom, divided by `sqrt(nu/(nu-2))`.
    StudentT { nu: f64 },
    /// Random sign times a Pareto(1, alpha) variable, `alpha > 4`, divided by
    /// `sqrt(alpha/(alpha-2))`.
    SymmetricPareto { alpha: f64 },
    /// Finite law given as `(value, probability)` pairs.
    Atoms { atoms: Vec<(f64, f64)> },
}

const ATOM_TOL: f64 = 1e-9;

impl EntryLaw {
    pub fn student_t(nu: f64) -> Result<Self> {
        let law = EntryLaw::StudentT { nu };
        law.validate()?;
        Ok(law)
    }

    pub fn symmetric_pareto(alpha: f64) -> Result<Self> {
        let law = EntryLaw::SymmetricPareto { alpha };
        law.validate()?;
        Ok(law)
    }

    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let law = EntryLaw::Atoms { atoms };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EntryLaw::Gaussian | EntryLaw::Rademacher => Ok(()),
            EntryLaw::StudentT { nu } => {
                if nu.is_finite() && *nu > 4.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidLaw(format!("student-t needs nu > 4, got {nu}")))
                }
            }
            EntryLaw::SymmetricPareto { alpha } => {
                if alpha.is_finite() && *alpha > 4.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidLaw(format!("pareto needs alpha > 4, got {alpha}")))
                }
            }
            EntryLaw::Atoms { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidLaw("atom list is empty".into()));
                }
                if atoms
                    .iter()
                    .any(|(x, p)| !x.is_finite() || !p.is_finite() || *p < 0.0)
                {
                    return Err(Error::InvalidLaw("atoms need finite values and probabilities >= 0".into()));
                }
                let total: f64 = atoms.iter().map(|(_, p)| p).sum();
                if (total - 1.0).abs() > ATOM_TOL {
                    return Err(Error::InvalidLaw(format!("probabilities sum to {total}, not 1")));
                }
                let mean: f64 = atoms.iter().map(|(x, p)| x * p).sum();
                let second: f64 = atoms.iter().map(|(x, p)| x * x * p).sum();
                if mean.abs() > ATOM_TOL || (second - 1.0).abs() > ATOM_TOL {
                    return Err(Error::InvalidLaw(format!(
                        "atoms must have mean 0 and variance 1 (mean {mean}, second moment {second})"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Short label used in tables, e.g. `student-t(5)`.
    pub fn label(&self) -> String {
        match self {
            EntryLaw::Gaussian => "gaussian".into(),
            EntryLaw::Rademacher => "rademacher".into(),
            EntryLaw::StudentT { nu } => format!("student-t({nu})"),
            EntryLaw::SymmetricPareto { alpha } => format!("pareto({alpha})"),
            EntryLaw::Atoms { atoms } => format!("atoms({})", atoms.len()),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            EntryLaw::Atoms { atoms } => {
                // symmetric when every atom has a mirror with equal mass
                atoms.iter().all(|(x, p)| {
                    let mirrored: f64 = atoms
                        .iter()
                        .filter(|(y, _)| (y + x).abs() <= 1e-12 * (1.0 + x.abs()))
                        .map(|(_, q)| q)
                        .sum();
                    let own: f64 = atoms
                        .iter()
                        .filter(|(y, _)| (y - x).abs() <= 1e-12 * (1.0 + x.abs()))
                        .map(|(_, q)| q)
                        .sum();
                    (mirrored - own).abs() <= 1e-12 || *p == 0.0
                })
            }
            _ => true,
        }
    }

    /// Scale dividing the raw variate to reach unit variance.
    fn raw_scale(&self) -> f64 {
        match self {
            EntryLaw::StudentT { nu } => (nu / (nu - 2.0)).sqrt(),
            EntryLaw::SymmetricPareto { alpha } => (alpha / (alpha - 2.0)).sqrt(),
            _ => 1.0,
        }
    }

    /// Closed-form moment `E X^k`, `k <= 4`.
    pub fn moment(&self, k: u32) -> f64 {
        assert!(k <= 4, "moments above the fourth are not tracked");
        if k == 0 {
            return 1.0;
        }
        match self {
            EntryLaw::Atoms { atoms } => atoms.iter().map(|(x, p)| p * x.powi(k as i32)).sum(),
            _ if k % 2 == 1 => 0.0,
            _ if k == 2 => 1.0,
            EntryLaw::Gaussian => 3.0,
            EntryLaw::Rademacher => 1.0,
            EntryLaw::StudentT { nu } => 3.0 * (nu - 2.0) / (nu - 4.0),
            EntryLaw::SymmetricPareto { alpha } => (alpha - 2.0).powi(2) / (alpha * (alpha - 4.0)),
        }
    }

    /// `E X^k 1[|X| > c]` for `k <= 4`, `c >= 0`.
    pub fn tail_moment(&self, k: u32, c: f64) -> f64 {
        assert!(k <= 4);
        let c = c.max(0.0);
        if let EntryLaw::Atoms { atoms } = self {
            return atoms
                .iter()
                .filter(|(x, _)| x.abs() > c)
                .map(|(x, p)| p * x.powi(k as i32))
                .sum();
        }
        if k % 2 == 1 {
            return 0.0;
        }
        if c.is_infinite() {
            return 0.0;
        }
        match self {
            EntryLaw::Gaussian => {
                let tail = libm::erfc(c / SQRT_2);
                let phi = (-0.5 * c * c).exp() / (2.0 * PI).sqrt();
                match k {
                    0 => tail,
                    2 => tail + 2.0 * c * phi,
                    _ => 3.0 * tail + 2.0 * (c * c * c + 3.0 * c) * phi,
                }
            }
            EntryLaw::Rademacher => {
                if c < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            EntryLaw::StudentT { nu } => {
                // E|T|^{2h} 1[|T| > t] = nu^h B(nu/2 - h, h + 1/2) / B(nu/2, 1/2)
                //                         * I_{nu/(nu+t^2)}(nu/2 - h, h + 1/2)
                let s = self.raw_scale();
                let t = c * s;
                let h = (k / 2) as f64;
                let a = nu / 2.0 - h;
                let b = h + 0.5;
                let x = nu / (nu + t * t);
                let ratio = (beta::ln_beta(a, b) - beta::ln_beta(nu / 2.0, 0.5)).exp();
                nu.powf(h) * ratio * beta::beta_reg(a, b, x) / s.powi(k as i32)
            }
            EntryLaw::SymmetricPareto { alpha } => {
                let s = self.raw_scale();
                let y = (c * s).max(1.0);
                let kf = k as f64;
                alpha / (alpha - kf) * y.powf(kf - alpha) / s.powi(k as i32)
            }
            EntryLaw::Atoms { .. } => unreachable!(),
        }
    }

    /// `E X^k 1[|X| <= c]`.
    pub fn truncated_moment(&self, k: u32, c: f64) -> f64 {
        if let EntryLaw::Atoms { atoms } = self {
            return atoms
                .iter()
                .filter(|(x, _)| x.abs() <= c)
                .map(|(x, p)| p * x.powi(k as i32))
                .sum();
        }
        self.moment(k) - self.tail_moment(k, c)
    }

    /// `P(|X| > c)`.
    pub fn abs_tail(&self, c: f64) -> f64 {
        self.tail_moment(0, c)
    }

    /// `P(lo < |X| <= hi)`; zero when `lo >= hi`.
    pub fn annulus_probability(&self, lo: f64, hi: f64) -> f64 {
        if lo >= hi {
            return 0.0;
        }
        (self.abs_tail(lo) - self.abs_tail(hi)).max(0.0)
    }

    /// Solves `P(|X| > x) = target` for `x` in `[lo, hi]` (continuous laws).
    pub(crate) fn inverse_abs_tail(&self, target: f64, lo: f64, hi: f64) -> f64 {
        if let EntryLaw::SymmetricPareto { alpha } = self {
            let x = target.powf(-1.0 / alpha) / self.raw_scale();
            return x.clamp(lo, hi);
        }
        let (mut a, mut b) = (lo, hi);
        if b.is_infinite() {
            b = lo.max(1.0);
            while self.abs_tail(b) > target {
                b *= 2.0;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.abs_tail(mid) > target {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }

    /// Builds a sampler with pre-computed distribution constants.
    pub fn sampler(&self) -> Result<LawSampler> {
        self.validate()?;
        Ok(match self {
            EntryLaw::Gaussian => LawSampler::Gaussian,
            EntryLaw::Rademacher => LawSampler::Rademacher,
            EntryLaw::StudentT { nu } => LawSampler::StudentT {
                dist: StudentT::new(*nu).map_err(|e| Error::InvalidLaw(e.to_string()))?,
                scale: self.raw_scale(),
            },
            EntryLaw::SymmetricPareto { alpha } => LawSampler::Pareto {
                dist: Pareto::new(1.0, *alpha).map_err(|e| Error::InvalidLaw(e.to_string()))?,
                scale: self.raw_scale(),
            },
            EntryLaw::Atoms { atoms } => LawSampler::Atoms(AtomTable::new(atoms)),
        })
    }
}

/// Inverse-CDF table over a finite list of atoms.
#[derive(Debug, Clone)]
pub struct AtomTable {
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl AtomTable {
    pub fn new(atoms: &[(f64, f64)]) -> Self {
        let total: f64 = atoms.iter().map(|(_, p)| p).sum();
        let mut acc = 0.0;
        let mut values = Vec::with_capacity(atoms.len());
        let mut cumulative = Vec::with_capacity(atoms.len());
        for (x, p) in atoms {
            acc += p / total;
            values.push(*x);
            cumulative.push(acc);
        }
        Self { values, cumulative }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.values[idx.min(self.values.len() - 1)]
    }
}

#[derive(Debug, Clone)]
pub enum LawSampler {
    Gaussian,
    Rademacher,
    StudentT { dist: StudentT<f64>, scale: f64 },
    Pareto { dist: Pareto<f64>, scale: f64 },
    Atoms(AtomTable),
}

impl Distribution<f64> for LawSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            LawSampler::Gaussian => rng.sample(StandardNormal),
            LawSampler::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            LawSampler::StudentT { dist, scale } => dist.sample(rng) / scale,
            LawSampler::Pareto { dist, scale } => {
                let y = dist.sample(rng) / scale;
                if rng.random::<bool>() {
                    y
                } else {
                    -y
                }
            }
            LawSampler::Atoms(table) => table.draw(rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_to_infinity};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::function::gamma::ln_gamma;

    fn t_density(nu: f64, x: f64) -> f64 {
        // standardised t density, written out independently of the sampler
        let s = (nu / (nu - 2.0)).sqrt();
        let t = x * s;
        let ln_c = ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * (nu * PI).ln();
        s * (ln_c - (nu + 1.0) / 2.0 * (1.0 + t * t / nu).ln()).exp()
    }

    fn laws() -> Vec<EntryLaw> {
        vec![
            EntryLaw::Gaussian,
            EntryLaw::Rademacher,
            EntryLaw::StudentT { nu: 5.0 },
            EntryLaw::StudentT { nu: 8.5 },
            EntryLaw::SymmetricPareto { alpha: 5.0 },
            EntryLaw::Atoms {
                atoms: vec![(-3f64.sqrt(), 1.0 / 6.0), (0.0, 2.0 / 3.0), (3f64.sqrt(), 1.0 / 6.0)],
            },
        ]
    }

    #[test]
    fn closed_form_moments() {
        let m = |law: &EntryLaw| [law.moment(1), law.moment(2), law.moment(3), law.moment(4)];
        assert_eq!(m(&EntryLaw::Gaussian), [0.0, 1.0, 0.0, 3.0]);
        assert_eq!(m(&EntryLaw::Rademacher), [0.0, 1.0, 0.0, 1.0]);
        assert_eq!(m(&EntryLaw::StudentT { nu: 5.0 }), [0.0, 1.0, 0.0, 9.0]);
    }

    #[test]
    fn t5_fourth_moment_by_quadrature() {
        let m4 = 2.0 * integrate_to_infinity(|x| x.powi(4) * t_density(5.0, x), 0.0, 1e-12);
        let m2 = 2.0 * integrate_to_infinity(|x| x * x * t_density(5.0, x), 0.0, 1e-12);
        let m0 = 2.0 * integrate_to_infinity(|x| t_density(5.0, x), 0.0, 1e-12);
        assert!((m0 - 1.0).abs() < 1e-9);
        assert!((m2 - 1.0).abs() < 1e-8);
        assert!((m4 - 9.0).abs() < 1e-6, "m4 = {m4}");
    }

    #[test]
    fn tail_moments_match_quadrature() {
        for nu in [5.0, 7.0] {
            let law = EntryLaw::StudentT { nu };
            for c in [0.3, 1.0, 2.5, 6.0, 40.0] {
                for k in [0, 2, 4] {
                    let oracle = 2.0
                        * integrate_to_infinity(|x| x.powi(k as i32) * t_density(nu, x), c, 1e-14);
                    let got = law.tail_moment(k, c);
                    assert!(
                        (got - oracle).abs() < 1e-9 * (1.0 + oracle),
                        "nu {nu} c {c} k {k}: {got} vs {oracle}"
                    );
                }
            }
        }
        let g = EntryLaw::Gaussian;
        let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        for c in [0.5, 1.7, 4.0] {
            for k in [0, 2, 4] {
                let oracle = 2.0 * integrate(|x| x.powi(k as i32) * phi(x), c, 40.0, 1e-15);
                assert!((g.tail_moment(k, c) - oracle).abs() < 1e-12, "gauss c {c} k {k}: {} vs {oracle}", g.tail_moment(k, c));
            }
        }
        let p = EntryLaw::SymmetricPareto { alpha: 5.0 };
        let s = (5.0f64 / 3.0).sqrt();
        // density of |X|: alpha s (s x)^{-alpha-1} for s x >= 1
        let dens = |x: f64| if s * x >= 1.0 { 5.0 * s * (s * x).powf(-6.0) } else { 0.0 };
        for c in [0.2f64, 1.0, 3.0] {
            for k in [0, 2, 4] {
                let lo = c.max(1.0 / s);
                let oracle = integrate_to_infinity(|x| x.powi(k as i32) * dens(x), lo, 1e-14);
                assert!((p.tail_moment(k, c) - oracle).abs() < 1e-9, "pareto c {c} k {k}");
            }
        }
    }

    #[test]
    fn standardisation_by_monte_carlo() {
        const DRAWS: usize = 1_000_000;
        for law in laws() {
            let sampler = law.sampler().unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(1234);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..DRAWS {
                let x = sampler.sample(&mut rng);
                s1 += x;
                s2 += x * x;
            }
            let n = DRAWS as f64;
            let mean = s1 / n;
            let var = s2 / n - mean * mean;
            let se_mean = (1.0 / n).sqrt();
            let se_var = ((law.moment(4) - 1.0) / n).sqrt();
            assert!(mean.abs() < 5.0 * se_mean, "{}: mean {mean}", law.label());
            // mean^2 is subtracted, which adds up to 25/n at five standard errors
            assert!((var - 1.0).abs() < 5.0 * se_var + 25.0 / n, "{}: var {var}", law.label());
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(EntryLaw::student_t(4.0).is_err());
        assert!(EntryLaw::student_t(3.0).is_err());
        assert!(EntryLaw::symmetric_pareto(4.0).is_err());
        assert!(EntryLaw::atoms(vec![(-1.0, 0.5), (1.0, 0.4)]).is_err());
        assert!(EntryLaw::atoms(vec![(-2.0, 0.5), (2.0, 0.5)]).is_err());
        assert!(EntryLaw::atoms(vec![(-1.0, 0.5), (1.0, 0.5)]).is_ok());
    }

    #[test]
    fn inverse_tail_round_trips() {
        for law in [EntryLaw::Gaussian, EntryLaw::StudentT { nu: 5.0 }, EntryLaw::SymmetricPareto { alpha: 6.0 }] {
            for x in [1.5, 3.0, 10.0] {
                let t = law.abs_tail(x);
                let back = law.inverse_abs_tail(t, 0.0, f64::INFINITY);
                assert!((back - x).abs() < 1e-8 * x, "{}: {back} vs {x}", law.label());
            }
        }
    }
}
