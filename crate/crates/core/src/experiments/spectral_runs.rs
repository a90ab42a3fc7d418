use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::fit::{fit_scaling, FitMode, ScalingFit};
use super::local_law::{run_local_law, LocalLawRun, MAX_RETRIES};
use super::stats::{counting_statistic, delocalization_stat, kolmogorov_distance, median, rigidity_profile};
use crate::ensembles::{derive_seed, sample_wigner, EntryLaw};
use crate::semicircle::quantiles;
use crate::spectral::{eigendecompose, eigenvalues, SpectralDecomposition};
use crate::{Error, Result};

/// Eigenvalue and eigenvector statistics over independent matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralStatsConfig {
    pub ensemble: EntryLaw,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    /// eigenvectors are needed for delocalization only
    pub with_vectors: bool,
    /// energy `x` of the counting window
    pub counting_x: f64,
    /// window width `Delta` of the counting statistic
    pub counting_delta: f64,
}

/// Statistics of one matrix. Delocalization fields are NaN without vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralTrial {
    pub n: usize,
    pub trial: usize,
    pub retries: usize,
    pub kolmogorov: f64,
    pub counting: f64,
    pub rigidity_bulk_max: f64,
    pub rigidity_edge_max: f64,
    pub deloc_max: f64,
    pub deloc_ratio: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralStatRecord {
    pub law: String,
    pub n: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub median_kolmogorov: f64,
    /// `n` times the median Kolmogorov distance
    pub scaled_kolmogorov: f64,
    /// `(log n)^12`, reported alongside the rate
    pub log12_n: f64,
    pub median_abs_counting: f64,
    pub median_rigidity_bulk: f64,
    pub median_rigidity_edge: f64,
    pub median_deloc_max: f64,
    pub median_deloc_ratio: f64,
    pub degenerate_count: usize,
    /// trials dropped after exhausting their retries
    pub degraded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralStatsRun {
    pub trials: Vec<SpectralTrial>,
    /// one record per `n`, in grid order
    pub records: Vec<SpectralStatRecord>,
}

fn validate(cfg: &SpectralStatsConfig) -> Result<()> {
    cfg.ensemble.validate()?;
    if cfg.n_grid.is_empty() || cfg.n_grid.iter().any(|&n| n < 2) {
        return Err(Error::Config("n_grid must be non-empty with every n >= 2".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    if !(cfg.counting_delta > 0.0) || !cfg.counting_x.is_finite() {
        return Err(Error::Config("counting window needs finite x and positive Delta".into()));
    }
    Ok(())
}

fn decompose(cfg: &SpectralStatsConfig, n: usize, t: usize) -> Result<Option<(SpectralDecomposition, usize)>> {
    for attempt in 0..=MAX_RETRIES {
        let seed = derive_seed(cfg.base_seed, &[n as u64, t as u64, attempt as u64]);
        let w = sample_wigner(&cfg.ensemble, n, seed)?.scaled();
        let res = if cfg.with_vectors {
            eigendecompose(&w)
        } else {
            eigenvalues(&w).map(|e| SpectralDecomposition::from_parts(e, None))
        };
        match res {
            Ok(spec) => return Ok(Some((spec, attempt))),
            Err(Error::NoConvergence { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Trial `t` at size `n` uses seed `(base_seed, n, t, attempt)`; results do
/// not depend on `threads`.
pub fn run_spectral_statistics(cfg: &SpectralStatsConfig, threads: usize) -> Result<SpectralStatsRun> {
    validate(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let mut all = Vec::new();
    let mut records = Vec::new();
    for &n in &cfg.n_grid {
        let q = quantiles(n);
        let per: Vec<Result<Option<SpectralTrial>>> = pool.install(|| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let Some((spec, retries)) = decompose(cfg, n, t)? else {
                        return Ok(None);
                    };
                    let eigs = spec.eigenvalues();
                    let rig = rigidity_profile(eigs, &q)?;
                    let (deloc_max, deloc_ratio, degenerate) = if spec.has_vectors() {
                        let d = delocalization_stat(&spec)?;
                        (d.max_abs, d.ratio, d.degenerate)
                    } else {
                        (f64::NAN, f64::NAN, spec.has_near_repeated(super::stats::REPEATED_TOL))
                    };
                    Ok(Some(SpectralTrial {
                        n,
                        trial: t,
                        retries,
                        kolmogorov: kolmogorov_distance(eigs),
                        counting: counting_statistic(eigs, cfg.counting_x, cfg.counting_delta)?,
                        rigidity_bulk_max: rig.bulk_max,
                        rigidity_edge_max: rig.edge_max,
                        deloc_max,
                        deloc_ratio,
                        degenerate,
                    }))
                })
                .collect()
        });
        let per = per.into_iter().collect::<Result<Vec<_>>>()?;
        let degraded = per.iter().filter(|t| t.is_none()).count();
        let trials: Vec<SpectralTrial> = per.into_iter().flatten().collect();
        let col = |f: fn(&SpectralTrial) -> f64| median(&trials.iter().map(f).collect::<Vec<_>>());
        let med_k = col(|t| t.kolmogorov);
        let nf = n as f64;
        records.push(SpectralStatRecord {
            law: cfg.ensemble.label(),
            n,
            trials: trials.len(),
            base_seed: cfg.base_seed,
            median_kolmogorov: med_k,
            scaled_kolmogorov: nf * med_k,
            log12_n: nf.ln().powi(12),
            median_abs_counting: col(|t| t.counting.abs()),
            median_rigidity_bulk: col(|t| t.rigidity_bulk_max),
            median_rigidity_edge: col(|t| t.rigidity_edge_max),
            median_deloc_max: col(|t| t.deloc_max),
            median_deloc_ratio: col(|t| t.deloc_ratio),
            degenerate_count: trials.iter().filter(|t| t.degenerate).count(),
            degraded,
        });
        all.extend(trials);
    }
    Ok(SpectralStatsRun { trials: all, records })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRun {
    pub run: LocalLawRun,
    /// fit over the records of the first `p` in the config
    pub fit: ScalingFit,
}

/// `E|Im Lambda_n|^p` outside the spectrum, fitted against `log(n(kappa + v))`.
pub fn edge_imag_experiment(config: &ExperimentConfig, threads: usize) -> Result<EdgeRun> {
    if let Some(u) = config.energies.iter().find(|u| !(u.abs() > 2.0)) {
        return Err(Error::Config(format!("edge energies must satisfy |u| > 2, got {u}")));
    }
    let run = run_local_law(config, threads)?;
    let p = config.p_list[0];
    let recs: Vec<_> = run.records.iter().filter(|r| r.p == p).cloned().collect();
    let fit = fit_scaling(&recs, FitMode::EdgeKappa)?;
    Ok(EdgeRun { run, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{Constants, Pipeline, VGrid};

    fn stats_cfg(n_grid: Vec<usize>, trials: usize, vectors: bool) -> SpectralStatsConfig {
        SpectralStatsConfig {
            ensemble: EntryLaw::Gaussian,
            n_grid,
            trials,
            base_seed: 4,
            with_vectors: vectors,
            counting_x: 0.0,
            counting_delta: 8.0,
        }
    }

    #[test]
    fn statistics_are_thread_invariant() {
        let c = stats_cfg(vec![16, 48], 5, true);
        let a = run_spectral_statistics(&c, 1).unwrap();
        let b = run_spectral_statistics(&c, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records.len(), 2);
        assert_eq!(a.trials.len(), 10);
        assert!(a.records.iter().all(|r| r.median_deloc_ratio.is_finite() && r.degraded == 0));
    }

    #[test]
    fn counting_baseline() {
        let n = 512;
        let run = run_spectral_statistics(&stats_cfg(vec![n], 20, false), 1).unwrap();
        let r = &run.records[0];
        assert!(r.median_abs_counting < 10.0 * (n as f64).ln());
        assert!(r.median_deloc_max.is_nan());
    }

    fn edge_cfg(energies: Vec<f64>, v: f64) -> ExperimentConfig {
        ExperimentConfig {
            ensemble: EntryLaw::Gaussian,
            n_grid: vec![64, 128, 256],
            energies,
            v_max: 1.0,
            alpha: 2,
            v_grid: VGrid::Explicit { values: vec![v] },
            p_list: vec![1],
            trials: 20,
            base_seed: 8,
            pipeline: Pipeline::Raw,
            constants: Constants::default(),
            audit_max_n: 0,
        }
    }

    #[test]
    fn edge_rejects_bulk_energies() {
        assert!(edge_imag_experiment(&edge_cfg(vec![1.0], 1.0), 1).is_err());
        assert!(edge_imag_experiment(&edge_cfg(vec![2.0], 1.0), 1).is_err());
    }

    #[test]
    fn edge_imag_decreases_with_n() {
        let e = edge_imag_experiment(&edge_cfg(vec![3.0], 1.0), 1).unwrap();
        assert_eq!(e.fit.predictor.len(), 3);
        assert!(e.fit.slope < 0.0);
    }

    #[test]
    fn edge_below_bulk_and_monotone_in_u() {
        let mut c = edge_cfg(vec![0.0], 0.1);
        c.n_grid = vec![512];
        c.trials = 10;
        let bulk = simulate_one(&c);
        c.energies = vec![2.5, 3.0, 4.0];
        let edge = crate::experiments::simulate(&c, 1).unwrap();
        let im: Vec<f64> = edge.records.iter().map(|r| r.mean_abs_im_lambda_p).collect();
        assert!(im.iter().all(|&x| x < 0.1 * bulk));
        assert!(im.windows(2).all(|w| w[1] <= w[0]), "{im:?}");
    }

    fn simulate_one(c: &ExperimentConfig) -> f64 {
        crate::experiments::simulate(c, 1).unwrap().records[0].mean_abs_im_lambda_p
    }
}
