//! Conversions from experiment outputs to [`ResultTable`]s.

use serde::{Deserialize, Serialize};

use super::table::{Cell, Column, ColumnKind, ResultTable};
use crate::experiments::{ExperimentRecord, ScalingFit, SpectralStatRecord, SpectralTrial};
use crate::matrix::SymmetricMatrix;
use crate::semicircle::{cdf, quantiles};
use crate::truncation::{AdmissibilityVerdict, ConfigurationMatrix, TruncationReport};
use crate::Result;

macro_rules! table {
    ($records:expr, $r:ident; $($name:literal : $kind:ident => $get:expr),* $(,)?) => {{
        let mut t = ResultTable::new(vec![$(Column::new($name, ColumnKind::$kind)),*]);
        for $r in $records {
            t.push(vec![$(Cell::from($get)),*])?;
        }
        t
    }};
}

/// Sorted by `(n, u, v, p)`.
pub fn experiment_table(records: &[ExperimentRecord]) -> Result<ResultTable> {
    let mut t = table!(records, r;
        "law": Text => r.law.as_str(),
        "pipeline": Text => r.pipeline.as_str(),
        "n": Int => r.n,
        "u": Float => r.u,
        "v": Float => r.v,
        "p": Int => r.p,
        "trials": Int => r.trials,
        "base_seed": Int => r.base_seed,
        "nv": Float => r.nv,
        "kappa": Float => r.kappa,
        "mean_abs_lambda_p": Float => r.mean_abs_lambda_p,
        "se_abs_lambda_p": Float => r.se_abs_lambda_p,
        "mean_abs_im_lambda_p": Float => r.mean_abs_im_lambda_p,
        "se_abs_im_lambda_p": Float => r.se_abs_im_lambda_p,
        "mean_abs_t_p": Float => r.mean_abs_t_p,
        "se_abs_t_p": Float => r.se_abs_t_p,
        "root_lambda": Float => r.root_lambda(),
        "admissible": Int => r.admissible,
        "retries": Int => r.retries,
        "degraded": Bool => r.degraded,
    );
    t.sort_canonical();
    Ok(t)
}

pub fn spectral_stat_table(records: &[SpectralStatRecord]) -> Result<ResultTable> {
    let mut t = table!(records, r;
        "law": Text => r.law.as_str(),
        "n": Int => r.n,
        "trials": Int => r.trials,
        "base_seed": Int => r.base_seed,
        "median_kolmogorov": Float => r.median_kolmogorov,
        "scaled_kolmogorov": Float => r.scaled_kolmogorov,
        "log12_n": Float => r.log12_n,
        "median_abs_counting": Float => r.median_abs_counting,
        "median_rigidity_bulk": Float => r.median_rigidity_bulk,
        "median_rigidity_edge": Float => r.median_rigidity_edge,
        "median_deloc_max": Float => r.median_deloc_max,
        "median_deloc_ratio": Float => r.median_deloc_ratio,
        "degenerate_count": Int => r.degenerate_count,
        "degraded": Int => r.degraded,
    );
    t.sort_canonical();
    Ok(t)
}

pub fn spectral_trial_table(trials: &[SpectralTrial]) -> Result<ResultTable> {
    let mut t = table!(trials, r;
        "n": Int => r.n,
        "trial": Int => r.trial,
        "retries": Int => r.retries,
        "kolmogorov": Float => r.kolmogorov,
        "counting": Float => r.counting,
        "rigidity_bulk_max": Float => r.rigidity_bulk_max,
        "rigidity_edge_max": Float => r.rigidity_edge_max,
        "deloc_max": Float => r.deloc_max,
        "deloc_ratio": Float => r.deloc_ratio,
        "degenerate": Bool => r.degenerate,
    );
    t.sort_by_keys(&["n", "trial"]);
    Ok(t)
}

/// Eigenvalues with the empirical and semicircle distribution functions and
/// the classical locations.
pub fn spectrum_table(eigenvalues: &[f64]) -> Result<ResultTable> {
    let n = eigenvalues.len();
    let q = quantiles(n);
    let rows: Vec<(usize, f64)> = eigenvalues.iter().copied().enumerate().collect();
    Ok(table!(&rows, r;
        "j": Int => r.0 + 1,
        "eigenvalue": Float => r.1,
        "esd": Float => (r.0 + 1) as f64 / n as f64,
        "semicircle_cdf": Float => cdf(r.1),
        "gamma": Float => q.gamma(r.0 + 1),
    ))
}

/// Upper triangle `j <= k` of a matrix.
pub fn matrix_table(m: &SymmetricMatrix) -> Result<ResultTable> {
    let n = m.n();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|j| (j..n).map(move |k| (j, k))).collect();
    Ok(table!(&cells, c;
        "j": Int => c.0,
        "k": Int => c.1,
        "value": Float => m.get(c.0, c.1),
    ))
}

pub fn truncation_table(reports: &[(u64, TruncationReport)]) -> Result<ResultTable> {
    Ok(table!(reports, r;
        "seed": Int => r.0,
        "n": Int => r.1.n,
        "r_over": Float => r.1.r_over,
        "threshold": Float => r.1.threshold,
        "altered_count": Int => r.1.altered_count,
        "sigma_sq": Float => r.1.sigma_sq,
        "mean_shift": Float => r.1.mean_shift,
    ))
}

/// Summary of one classified configuration matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub seed: u64,
    pub n: usize,
    pub r: usize,
    pub k: usize,
    pub r_under: f64,
    pub p_n: f64,
    pub zero_count: usize,
    pub deviant_count: usize,
    pub components: usize,
    pub r_of_l: usize,
    pub deviant_threshold: f64,
    pub deviant_inadmissible: bool,
    pub r_admissible: bool,
}

impl ClassificationRow {
    pub fn new(seed: u64, l: &ConfigurationMatrix, v: &AdmissibilityVerdict) -> Self {
        Self {
            seed,
            n: l.n(),
            r: l.params.r,
            k: l.params.k,
            r_under: l.params.r_under,
            p_n: l.params.p_n,
            zero_count: l.zero_count(),
            deviant_count: v.deviant_set.len(),
            components: v.components.len(),
            r_of_l: v.r_of_l,
            deviant_threshold: v.deviant_threshold,
            deviant_inadmissible: v.deviant_inadmissible,
            r_admissible: v.r_admissible,
        }
    }
}

pub fn classification_table(rows: &[ClassificationRow]) -> Result<ResultTable> {
    Ok(table!(rows, r;
        "seed": Int => r.seed,
        "n": Int => r.n,
        "r": Int => r.r,
        "k": Int => r.k,
        "r_under": Float => r.r_under,
        "p_n": Float => r.p_n,
        "zero_count": Int => r.zero_count,
        "deviant_count": Int => r.deviant_count,
        "components": Int => r.components,
        "r_of_l": Int => r.r_of_l,
        "deviant_threshold": Float => r.deviant_threshold,
        "deviant_inadmissible": Bool => r.deviant_inadmissible,
        "r_admissible": Bool => r.r_admissible,
    ))
}

pub fn fit_table(fits: &[(String, ScalingFit)]) -> Result<ResultTable> {
    Ok(table!(fits, f;
        "label": Text => f.0.as_str(),
        "mode": Text => f.1.mode.label(),
        "points": Int => f.1.predictor.len(),
        "slope": Float => f.1.slope,
        "slope_se": Float => f.1.slope_se,
        "intercept": Float => f.1.intercept,
        "r_squared": Float => f.1.r_squared,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(n: usize, u: f64, v: f64, p: u32) -> ExperimentRecord {
        ExperimentRecord {
            law: "gaussian".into(),
            pipeline: "raw".into(),
            n,
            u,
            v,
            p,
            trials: 3,
            base_seed: 1,
            nv: n as f64 * v,
            kappa: 0.0,
            mean_abs_lambda_p: 0.1,
            se_abs_lambda_p: f64::NAN,
            mean_abs_im_lambda_p: 0.2,
            se_abs_im_lambda_p: 0.0,
            mean_abs_t_p: 0.3,
            se_abs_t_p: 0.0,
            admissible: 3,
            retries: 0,
            degraded: false,
        }
    }

    #[test]
    fn experiment_rows_sorted() {
        let recs = vec![record(8, 0.0, 0.1, 2), record(4, 0.5, 0.1, 1), record(4, 0.0, 0.2, 1), record(4, 0.0, 0.1, 2)];
        let t = experiment_table(&recs).unwrap();
        let n = t.column_index("n").unwrap();
        let v = t.column_index("v").unwrap();
        let ns: Vec<String> = t.rows().iter().map(|r| format!("{}:{}", r[n].render(), r[v].render())).collect();
        assert_eq!(ns, ["4:0.1", "4:0.2", "4:0.1", "8:0.1"]);
        let back = ResultTable::from_csv_str(&t.to_csv_string().unwrap(), t.columns().to_vec()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn spectrum_columns() {
        let t = spectrum_table(&[-1.0, 0.0, 1.5]).unwrap();
        assert_eq!(t.len(), 3);
        let csv = t.to_csv_string().unwrap();
        assert!(csv.starts_with("j,eigenvalue,esd,semicircle_cdf,gamma\n1,-1.0,"));
        assert!(csv.contains("\n2,0.0,0.6666666666666666,0.5,"));
    }

    #[test]
    fn matrix_upper_triangle() {
        let m = SymmetricMatrix::from_upper(3, |j, k| (j * 3 + k) as f64);
        let t = matrix_table(&m).unwrap();
        assert_eq!(t.len(), 6);
    }
}
