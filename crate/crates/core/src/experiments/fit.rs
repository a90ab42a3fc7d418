use serde::{Deserialize, Serialize};

use super::local_law::ExperimentRecord;
use super::spectral_runs::SpectralStatRecord;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// `log E^{1/p}|Lambda_n|^p` against `log(nv)`
    NvBulk,
    /// `log` median Kolmogorov distance against `log n`
    NKolmogorov,
    /// `log E^{1/p}|Im Lambda_n|^p` against `log(n(kappa + v))`
    EdgeKappa,
}

impl FitMode {
    pub fn label(&self) -> &'static str {
        match self {
            FitMode::NvBulk => "nv_bulk",
            FitMode::NKolmogorov => "n_kolmogorov",
            FitMode::EdgeKappa => "edge_kappa",
        }
    }
}

/// Records that contribute a `(predictor, response)` pair to a fit, both on
/// the natural scale.
pub trait ScalingPoint {
    fn scaling_point(&self, mode: FitMode) -> Option<(f64, f64)>;
}

impl ScalingPoint for ExperimentRecord {
    fn scaling_point(&self, mode: FitMode) -> Option<(f64, f64)> {
        match mode {
            FitMode::NvBulk => Some((self.nv, self.root_lambda())),
            FitMode::EdgeKappa => Some((self.n as f64 * (self.kappa + self.v), self.root_im_lambda())),
            FitMode::NKolmogorov => None,
        }
    }
}

impl ScalingPoint for SpectralStatRecord {
    fn scaling_point(&self, mode: FitMode) -> Option<(f64, f64)> {
        match mode {
            FitMode::NKolmogorov => Some((self.n as f64, self.median_kolmogorov)),
            _ => None,
        }
    }
}

/// Ordinary least squares on the log-log scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub mode: FitMode,
    /// log predictor
    pub predictor: Vec<f64>,
    /// log response
    pub response: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// NaN with exactly two points
    pub slope_se: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

impl ScalingFit {
    pub fn predict(&self, log_x: f64) -> f64 {
        self.intercept + self.slope * log_x
    }
}

pub fn fit_scaling<R: ScalingPoint>(records: &[R], mode: FitMode) -> Result<ScalingFit> {
    let mut xs = Vec::with_capacity(records.len());
    let mut ys = Vec::with_capacity(records.len());
    for r in records {
        let (x, y) = r
            .scaling_point(mode)
            .ok_or_else(|| Error::InvalidParameter(format!("record type does not support {} fits", mode.label())))?;
        xs.push(x);
        ys.push(y);
    }
    fit_log_log(mode, &xs, &ys)
}

/// Fits `log y = a + b log x`; needs at least three points with positive
/// coordinates.
pub fn fit_log_log(mode: FitMode, x: &[f64], y: &[f64]) -> Result<ScalingFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter("predictor and response lengths differ".into()));
    }
    if x.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} points, need at least 3", x.len())));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::DegenerateFit("predictors and responses must be positive and finite".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let spread = 1e-24 * lx.iter().map(|a| a * a).sum::<f64>().max(1.0);
    if sxx <= spread {
        return Err(Error::DegenerateFit("all predictors equal".into()));
    }
    if syy <= 1e-24 * ly.iter().map(|b| b * b).sum::<f64>().max(1.0) {
        return Err(Error::DegenerateFit("constant responses".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = lx.iter().zip(&ly).map(|(a, b)| b - intercept - slope * a).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let slope_se = if lx.len() > 2 {
        (ss_res / (k - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(ScalingFit {
        mode,
        predictor: lx,
        response: ly,
        slope,
        intercept,
        slope_se,
        r_squared: 1.0 - ss_res / syy,
        residuals,
    })
}
