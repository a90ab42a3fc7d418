use serde::{Deserialize, Serialize};

use crate::ensembles::{small_threshold, truncation_threshold, EntryLaw};
use crate::semicircle::{SpectralDomain, SpectralPoint};
use crate::truncation::ConfigParams;
use crate::{Error, Result};

/// Largest moment order accepted by the harness.
pub const MAX_P: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    /// `W = X / sqrt(n)`
    Raw,
    /// truncated, centred and renormalised entries
    Truncated,
    /// truncated entries whose small cells are redrawn from a bounded
    /// four-moment matched law
    Replaced,
}

impl Pipeline {
    pub fn label(&self) -> &'static str {
        match self {
            Pipeline::Raw => "raw",
            Pipeline::Truncated => "truncated",
            Pipeline::Replaced => "replaced",
        }
    }
}

/// A size-dependent parameter such as `R_under = ceil(log n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Rule {
    /// `(log n)^power`, rounded up when `ceil` is set
    LogPower { power: i32, ceil: bool },
    Fixed { value: f64 },
}

impl Rule {
    pub fn eval(&self, n: usize) -> f64 {
        match *self {
            Rule::LogPower { power, ceil } => {
                let x = (n as f64).ln().powi(power);
                if ceil {
                    x.ceil()
                } else {
                    x
                }
            }
            Rule::Fixed { value } => value,
        }
    }
}

/// Resolution grid per matrix size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VGrid {
    /// only `v_0 = A_0 n^{-1} (log n)^alpha`
    Floor,
    /// geometric grid from `V` down to `v_0`
    Geometric { per_decade: u32 },
    /// fixed list, independent of `n`
    Explicit { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub a0: f64,
    pub a1: f64,
    pub chernoff_c: f64,
    pub r_rule: Rule,
    pub r_under_rule: Rule,
    pub r_over_rule: Rule,
    pub k_rule: Rule,
    /// bound `D` of the replacement law; `n^{1/4} R_under` when absent
    pub replacement_bound: Option<f64>,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            a0: 8.0,
            a1: 1.0,
            chernoff_c: 1.0,
            r_rule: Rule::LogPower { power: 3, ceil: true },
            r_under_rule: Rule::LogPower { power: 1, ceil: true },
            r_over_rule: Rule::LogPower { power: 1, ceil: false },
            k_rule: Rule::LogPower { power: 3, ceil: true },
            replacement_bound: None,
        }
    }
}

impl Constants {
    pub fn r_over(&self, n: usize) -> f64 {
        self.r_over_rule.eval(n).max(1.0)
    }

    /// Classifier parameters at size `n`, with `p_n` the probability of the
    /// annulus `(n^{1/4} R_under, sqrt(n)/R_over]`.
    pub fn config_params(&self, law: &EntryLaw, n: usize) -> ConfigParams {
        let r_under = self.r_under_rule.eval(n);
        let lo = small_threshold(n, r_under);
        let hi = truncation_threshold(n, self.r_over(n));
        ConfigParams {
            r_under,
            r: self.r_rule.eval(n).max(1.0) as usize,
            k: self.k_rule.eval(n).max(1.0) as usize,
            p_n: law.annulus_probability(lo, hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub ensemble: EntryLaw,
    pub n_grid: Vec<usize>,
    /// spectral energies `u`
    pub energies: Vec<f64>,
    pub v_max: f64,
    /// exponent of `log n` in `v_0`
    pub alpha: u32,
    pub v_grid: VGrid,
    pub p_list: Vec<u32>,
    pub trials: usize,
    pub base_seed: u64,
    pub pipeline: Pipeline,
    pub constants: Constants,
    /// full identity audit on every trial up to this size
    pub audit_max_n: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        let bad = |m: String| Err(Error::Config(m));
        if self.n_grid.is_empty() || self.n_grid.iter().any(|&n| n < 2) {
            return bad("n_grid must be non-empty with every n >= 2".into());
        }
        if self.energies.is_empty() || self.energies.iter().any(|u| !u.is_finite()) {
            return bad("energies must be a non-empty list of finite values".into());
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.p_list.is_empty() {
            return bad("p_list must be non-empty".into());
        }
        if !(self.alpha == 1 || self.alpha == 2) {
            return bad(format!("alpha must be 1 or 2, got {}", self.alpha));
        }
        let c = &self.constants;
        if !(c.a0 > 0.0 && c.a1 > 0.0 && c.chernoff_c > 0.0) {
            return bad("constants a0, a1, chernoff_c must be positive".into());
        }
        for &p in &self.p_list {
            if p == 0 || p > MAX_P {
                return bad(format!("p = {p} outside 1..={MAX_P}"));
            }
            for &n in &self.n_grid {
                let cap = c.a1 * (n as f64).ln().powi(self.alpha as i32);
                if p as f64 > cap {
                    return bad(format!("p = {p} exceeds A1 (log n)^alpha = {cap:.3} at n = {n}"));
                }
            }
        }
        if let VGrid::Explicit { values } = &self.v_grid {
            if values.is_empty() || values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return bad("explicit v grid needs positive finite values".into());
            }
        }
        if let VGrid::Geometric { per_decade } = self.v_grid {
            if per_decade == 0 {
                return bad("per_decade must be >= 1".into());
            }
        }
        for &n in &self.n_grid {
            if self.points(n)?.is_empty() {
                return bad(format!("empty spectral grid at n = {n} (V below v_0?)"));
            }
        }
        Ok(())
    }

    pub fn domain(&self, n: usize) -> Result<SpectralDomain> {
        let u0 = self.energies.iter().fold(0.0f64, |m, u| m.max(u.abs())).max(1e-12);
        SpectralDomain::new(u0, self.v_max, self.constants.a0, self.alpha, n)
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// Spectral resolutions used at size `n`, descending.
    pub fn v_values(&self, n: usize) -> Result<Vec<f64>> {
        Ok(match &self.v_grid {
            VGrid::Floor => vec![self.domain(n)?.v0()],
            VGrid::Geometric { per_decade } => self.domain(n)?.v_grid(*per_decade),
            VGrid::Explicit { values } => values.clone(),
        })
    }

    /// All `(u, v)` points at size `n`, energies outermost.
    pub fn points(&self, n: usize) -> Result<Vec<SpectralPoint>> {
        let vs = self.v_values(n)?;
        let mut out = Vec::with_capacity(vs.len() * self.energies.len());
        for &u in &self.energies {
            for &v in &vs {
                out.push(SpectralPoint::new(u, v)?);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            ensemble: EntryLaw::Gaussian,
            n_grid: vec![64, 128],
            energies: vec![0.0, 0.5],
            v_max: 1.0,
            alpha: 2,
            v_grid: VGrid::Geometric { per_decade: 8 },
            p_list: vec![1, 2],
            trials: 4,
            base_seed: 1,
            pipeline: Pipeline::Raw,
            constants: Constants {
                a0: 1.0,
                ..Constants::default()
            },
            audit_max_n: 64,
        }
    }

    #[test]
    fn rules() {
        let n = 1000;
        let l = (n as f64).ln();
        assert_eq!(Rule::LogPower { power: 3, ceil: true }.eval(n), l.powi(3).ceil());
        assert_eq!(Rule::LogPower { power: 1, ceil: false }.eval(n), l);
        assert_eq!(Rule::Fixed { value: 2.5 }.eval(n), 2.5);
    }

    #[test]
    fn grid_points_in_domain() {
        let c = base();
        c.validate().unwrap();
        for &n in &c.n_grid {
            let d = c.domain(n).unwrap();
            let pts = c.points(n).unwrap();
            assert!(pts.len() >= 4);
            assert!(pts.iter().all(|z| d.contains(z)));
        }
    }

    #[test]
    fn rejects_large_p() {
        let mut c = base();
        c.p_list = vec![7];
        assert!(c.validate().is_err());
        c.p_list = vec![5];
        c.alpha = 1;
        c.n_grid = vec![64];
        // log 64 = 4.16 < 5
        assert!(c.validate().is_err());
        c.trials = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn empty_grid_rejected() {
        let mut c = base();
        c.v_max = 1e-6;
        assert!(c.validate().is_err());
    }
}
