use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Pipeline};
use crate::ensembles::{derive_seed, sample_wigner, small_threshold, EntryLaw, MatchedBoundedLaw};
use crate::matrix::SymmetricMatrix;
use crate::semicircle::{kappa, SpectralPoint};
use crate::spectral::{
    eigenvalues, epsilon_decomposition_downdate, local_law_from_eigenvalues, local_law_sample_from, resolvent,
    ward_check, LocalLawSample,
};
use crate::truncation::{build_configuration, classify, matched_small_law, replace_small_cells, ConfigParams, Truncation};
use crate::{Error, Result};

/// Resampling attempts after an eigensolver failure.
pub const MAX_RETRIES: usize = 3;

const AUDIT_TOL: f64 = 1e-8;
const REPLACE_TAG: u64 = 0x7265_706c;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub law: String,
    pub pipeline: String,
    pub n: usize,
    pub u: f64,
    pub v: f64,
    pub p: u32,
    /// trials that entered the averages
    pub trials: usize,
    pub base_seed: u64,
    pub nv: f64,
    pub kappa: f64,
    pub mean_abs_lambda_p: f64,
    pub se_abs_lambda_p: f64,
    pub mean_abs_im_lambda_p: f64,
    pub se_abs_im_lambda_p: f64,
    pub mean_abs_t_p: f64,
    pub se_abs_t_p: f64,
    /// trials whose configuration matrix was r-admissible
    pub admissible: usize,
    pub retries: usize,
    /// some trial exhausted its retries
    pub degraded: bool,
}

impl ExperimentRecord {
    /// `E^{1/p} |Lambda_n|^p`
    pub fn root_lambda(&self) -> f64 {
        self.mean_abs_lambda_p.powf(1.0 / self.p as f64)
    }

    /// `E^{1/p} |Im Lambda_n|^p`
    pub fn root_im_lambda(&self) -> f64 {
        self.mean_abs_im_lambda_p.powf(1.0 / self.p as f64)
    }
}

/// Totals of the per-trial identity checks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub trials: usize,
    pub full_audits: usize,
    pub identities_checked: usize,
    pub max_schur_residual: f64,
    pub max_lambda_residual: f64,
    pub max_ward_gap: f64,
    pub max_trace_gap: f64,
}

impl AuditSummary {
    fn merge(&mut self, o: &AuditSummary) {
        self.trials += o.trials;
        self.full_audits += o.full_audits;
        self.identities_checked += o.identities_checked;
        self.max_schur_residual = self.max_schur_residual.max(o.max_schur_residual);
        self.max_lambda_residual = self.max_lambda_residual.max(o.max_lambda_residual);
        self.max_ward_gap = self.max_ward_gap.max(o.max_ward_gap);
        self.max_trace_gap = self.max_trace_gap.max(o.max_trace_gap);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalLawRun {
    /// sorted by `(n, u, v, p)`
    pub records: Vec<ExperimentRecord>,
    pub audit: AuditSummary,
}

/// One trial: local-law quantities at every requested point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub samples: Vec<LocalLawSample>,
    pub admissible: bool,
    pub retries: usize,
    pub degraded: bool,
    pub audit: AuditSummary,
}

/// Size-dependent state shared by all trials at one `n`.
struct SizeContext<'a> {
    config: &'a ExperimentConfig,
    n: usize,
    points: Vec<SpectralPoint>,
    truncation: Option<Truncation>,
    matched: Option<MatchedBoundedLaw>,
    params: ConfigParams,
}

impl<'a> SizeContext<'a> {
    fn new(config: &'a ExperimentConfig, n: usize, points: Vec<SpectralPoint>) -> Result<Self> {
        let law = &config.ensemble;
        let c = &config.constants;
        let r_over = c.r_over(n);
        let params = c.config_params(law, n);
        let r_under = params.r_under;
        let truncation = match config.pipeline {
            Pipeline::Raw => None,
            _ => Some(Truncation::new(law, n, r_over)?),
        };
        let matched = match config.pipeline {
            Pipeline::Replaced => {
                let d = c.replacement_bound.unwrap_or_else(|| small_threshold(n, r_under));
                Some(matched_small_law(law, n, r_under, r_over, d)?)
            }
            _ => None,
        };
        Ok(Self {
            config,
            n,
            points,
            truncation,
            matched,
            params,
        })
    }

    /// Samples and processes one matrix; returns `W` and r-admissibility of
    /// the configuration of its large entries.
    fn matrix(&self, seed: u64) -> Result<(SymmetricMatrix, bool)> {
        let x = sample_wigner(&self.config.ensemble, self.n, seed)?;
        let hat = match &self.truncation {
            Some(t) => t.hat(&x.matrix).0,
            None => x.matrix.clone(),
        };
        let l = build_configuration(&hat, self.params.clone());
        let admissible = classify(&l).r_admissible;
        let scale = 1.0 / (self.n as f64).sqrt();
        let w = match self.config.pipeline {
            Pipeline::Raw => x.matrix.scaled(scale),
            Pipeline::Truncated => {
                let t = self.truncation.as_ref().expect("truncation");
                t.apply(&x.matrix)?.breve.scaled(scale)
            }
            Pipeline::Replaced => {
                let m = self.matched.as_ref().expect("matched law");
                replace_small_cells(&hat, &l, m, derive_seed(seed, &[REPLACE_TAG])).scaled(scale)
            }
        };
        Ok((w, admissible))
    }

    fn trial(&self, n_key: u64, t: usize) -> Result<TrialOutcome> {
        let base = self.config.base_seed;
        let mut retries = 0;
        loop {
            let seed = derive_seed(base, &[n_key, t as u64, retries as u64]);
            let (w, admissible) = self.matrix(seed)?;
            match eigenvalues(&w) {
                Ok(eigs) => {
                    let full = self.n <= self.config.audit_max_n;
                    let (samples, audit) = evaluate(&w, &eigs, &self.points, full)?;
                    return Ok(TrialOutcome {
                        samples,
                        admissible,
                        retries,
                        degraded: false,
                        audit,
                    });
                }
                Err(Error::NoConvergence { .. }) if retries < MAX_RETRIES => retries += 1,
                Err(Error::NoConvergence { .. }) => {
                    return Ok(TrialOutcome {
                        samples: Vec::new(),
                        admissible,
                        retries,
                        degraded: true,
                        audit: AuditSummary::default(),
                    })
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// Local-law quantities from the eigenvalues, with the identity audit. The
/// full audit recomputes everything from a direct resolvent.
fn evaluate(
    w: &SymmetricMatrix,
    eigs: &[f64],
    points: &[SpectralPoint],
    full: bool,
) -> Result<(Vec<LocalLawSample>, AuditSummary)> {
    let mut audit = AuditSummary {
        trials: 1,
        ..Default::default()
    };
    let trace_gap = (eigs.iter().sum::<f64>() - w.trace()).abs();
    let scale = 1.0 + eigs.iter().map(|x| x.abs()).sum::<f64>();
    audit.max_trace_gap = trace_gap;
    audit.identities_checked += 1;
    if !(trace_gap <= 1e-10 * scale) {
        return Err(Error::IdentityAudit(format!("eigenvalue trace gap {trace_gap:e}")));
    }
    let mut samples = Vec::with_capacity(points.len());
    for &z in points {
        let s = local_law_from_eigenvalues(eigs, z);
        let tol = AUDIT_TOL * (1.0 + 1.0 / z.v());
        if !(s.identity_residual <= tol) {
            return Err(Error::IdentityAudit(format!(
                "Lambda b_n - T_n residual {:e} at z = {}",
                s.identity_residual,
                z.z()
            )));
        }
        audit.max_lambda_residual = audit.max_lambda_residual.max(s.identity_residual);
        audit.identities_checked += 1;
        if full {
            audit_point(w, z, &s, tol, &mut audit)?;
        }
        samples.push(s);
    }
    if full {
        audit.full_audits = 1;
    }
    Ok((samples, audit))
}

fn audit_point(w: &SymmetricMatrix, z: SpectralPoint, cheap: &LocalLawSample, tol: f64, audit: &mut AuditSummary) -> Result<()> {
    let full = resolvent(w, z, &[])?;
    for j in 0..w.n() {
        let e = epsilon_decomposition_downdate(w, &full, j)?;
        let r = e.residual();
        audit.max_schur_residual = audit.max_schur_residual.max(r);
        if !(r <= tol) {
            return Err(Error::IdentityAudit(format!("Schur residual {r:e} at j = {j}, z = {}", z.z())));
        }
    }
    let direct = local_law_sample_from(w, &full)?;
    let gap = (direct.t_n - cheap.t_n).norm() + (direct.m_n - cheap.m_n).norm();
    audit.max_lambda_residual = audit.max_lambda_residual.max(direct.identity_residual).max(gap);
    if !(direct.identity_residual <= tol && gap <= tol) {
        return Err(Error::IdentityAudit(format!(
            "direct and spectral routes disagree by {gap:e} at z = {}",
            z.z()
        )));
    }
    let ward = ward_check(&full);
    let row_scale = 1.0 + ward.row_rhs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let g = ward.max_row_gap();
    audit.max_ward_gap = audit.max_ward_gap.max(g / row_scale);
    if !(g <= AUDIT_TOL * row_scale) {
        return Err(Error::IdentityAudit(format!("Ward row gap {g:e} at z = {}", z.z())));
    }
    audit.identities_checked += w.n() + 2;
    Ok(())
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let k = xs.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt())
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

/// Validated run: see [`simulate`].
pub fn run_local_law(config: &ExperimentConfig, threads: usize) -> Result<LocalLawRun> {
    config.validate()?;
    simulate(config, threads)
}

/// Monte Carlo estimate of `E|Lambda_n|^p`, `E|Im Lambda_n|^p` and
/// `E|T_n|^p` on every `(n, u, v, p)` cell, without the `p`-range check.
///
/// All points at one `n` share the trial matrices; trial `t` at size `n` uses
/// the seed `(base_seed, n, t, attempt)`. Results do not depend on `threads`.
pub fn simulate(config: &ExperimentConfig, threads: usize) -> Result<LocalLawRun> {
    config.ensemble.validate()?;
    if config.trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let pool = thread_pool(threads)?;
    let law_label = config.ensemble.label();
    let mut records = Vec::new();
    let mut audit = AuditSummary::default();
    for &n in &config.n_grid {
        let points = config.points(n)?;
        let ctx = SizeContext::new(config, n, points)?;
        let outcomes: Vec<Result<TrialOutcome>> =
            pool.install(|| (0..config.trials).into_par_iter().map(|t| ctx.trial(n as u64, t)).collect());
        let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
        for o in &outcomes {
            audit.merge(&o.audit);
        }
        let used: Vec<&TrialOutcome> = outcomes.iter().filter(|o| !o.degraded).collect();
        let admissible = outcomes.iter().filter(|o| o.admissible).count();
        let retries = outcomes.iter().map(|o| o.retries).sum();
        let degraded = outcomes.iter().any(|o| o.degraded);
        for (i, z) in ctx.points.iter().enumerate() {
            for &p in &config.p_list {
                let pf = p as i32;
                let col = |f: &dyn Fn(&LocalLawSample) -> f64| -> Vec<f64> {
                    used.iter().map(|o| f(&o.samples[i]).powi(pf)).collect()
                };
                let (ml, sl) = mean_se(&col(&|s| s.lambda.norm()));
                let (mi, si) = mean_se(&col(&|s| s.lambda.im.abs()));
                let (mt, st) = mean_se(&col(&|s| s.t_n.norm()));
                records.push(ExperimentRecord {
                    law: law_label.clone(),
                    pipeline: config.pipeline.label().to_string(),
                    n,
                    u: z.u(),
                    v: z.v(),
                    p,
                    trials: used.len(),
                    base_seed: config.base_seed,
                    nv: n as f64 * z.v(),
                    kappa: kappa(z.u()),
                    mean_abs_lambda_p: ml,
                    se_abs_lambda_p: sl,
                    mean_abs_im_lambda_p: mi,
                    se_abs_im_lambda_p: si,
                    mean_abs_t_p: mt,
                    se_abs_t_p: st,
                    admissible,
                    retries,
                    degraded,
                });
            }
        }
    }
    sort_records(&mut records);
    Ok(LocalLawRun { records, audit })
}

/// Total order by `(n, u, v, p)`.
pub fn sort_records(records: &mut [ExperimentRecord]) {
    records.sort_by(|a, b| {
        a.n.cmp(&b.n)
            .then(a.u.total_cmp(&b.u))
            .then(a.v.total_cmp(&b.v))
            .then(a.p.cmp(&b.p))
    });
}

/// Local-law quantities of one sampled matrix, exposed for checks that need
/// per-trial values.
pub fn single_trial(law: &EntryLaw, n: usize, seed: u64, points: &[SpectralPoint]) -> Result<Vec<LocalLawSample>> {
    let x = sample_wigner(law, n, seed)?;
    let w = x.scaled();
    let eigs = eigenvalues(&w)?;
    Ok(evaluate(&w, &eigs, points, n <= 64)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{Constants, VGrid};
    use crate::semicircle::stieltjes_sc;

    fn config(law: EntryLaw, n_grid: Vec<usize>, trials: usize, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            ensemble: law,
            n_grid,
            energies: vec![0.0],
            v_max: 1.0,
            alpha: 2,
            v_grid: VGrid::Explicit { values: vec![0.1] },
            p_list: vec![2],
            trials,
            base_seed: seed,
            pipeline: Pipeline::Raw,
            constants: Constants::default(),
            audit_max_n: 16,
        }
    }

    #[test]
    fn single_gaussian_entry() {
        let mut c = config(EntryLaw::Gaussian, vec![1], 1, 7);
        c.v_grid = VGrid::Explicit { values: vec![1.0] };
        c.p_list = vec![1];
        let run = simulate(&c, 1).unwrap();
        assert_eq!(run.records.len(), 1);
        let x = sample_wigner(&EntryLaw::Gaussian, 1, derive_seed(7, &[1, 0, 0])).unwrap().matrix.get(0, 0);
        let z = SpectralPoint::new(0.0, 1.0).unwrap();
        let lambda = 1.0 / (x - z.z()) - stieltjes_sc(z);
        let r = &run.records[0];
        assert!((r.mean_abs_lambda_p - lambda.norm()).abs() < 1e-14);
        assert!((r.mean_abs_im_lambda_p - lambda.im.abs()).abs() < 1e-14);
        assert_eq!(run.audit.full_audits, 1);
    }

    #[test]
    fn thread_count_invariance() {
        let mut c = config(EntryLaw::StudentT { nu: 5.0 }, vec![12, 40], 6, 3);
        c.energies = vec![-0.5, 0.0, 1.5];
        c.v_grid = VGrid::Geometric { per_decade: 4 };
        c.p_list = vec![1, 2];
        c.constants.a0 = 1.0;
        c.pipeline = Pipeline::Replaced;
        let a = run_local_law(&c, 1).unwrap();
        let b = run_local_law(&c, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.audit.full_audits == 6 && a.audit.identities_checked > 0);
        let key = |r: &ExperimentRecord| (r.n, r.u, r.v, r.p);
        assert!(a.records.windows(2).all(|w| key(&w[0]).partial_cmp(&key(&w[1])) == Some(std::cmp::Ordering::Less)));
    }

    #[test]
    fn standard_error_scaling() {
        let small = simulate(&config(EntryLaw::Gaussian, vec![64], 50, 11), 1).unwrap();
        let large = simulate(&config(EntryLaw::Gaussian, vec![64], 200, 12), 1).unwrap();
        let ratio = small.records[0].se_abs_lambda_p / large.records[0].se_abs_lambda_p;
        assert!(ratio > 2.0 / 3.0 && ratio < 6.0, "{ratio}");
    }

    #[test]
    fn disjoint_seed_rerun_agrees() {
        let a = simulate(&config(EntryLaw::Gaussian, vec![512], 24, 100), 1).unwrap();
        let b = simulate(&config(EntryLaw::Gaussian, vec![512], 24, 200), 1).unwrap();
        let (ra, rb) = (&a.records[0], &b.records[0]);
        let se = (ra.se_abs_lambda_p.powi(2) + rb.se_abs_lambda_p.powi(2)).sqrt();
        assert!((ra.mean_abs_lambda_p - rb.mean_abs_lambda_p).abs() < 4.0 * se);
    }

    #[test]
    fn rademacher_pipelines_agree() {
        let mut runs = Vec::new();
        for (i, pipe) in [Pipeline::Raw, Pipeline::Truncated, Pipeline::Replaced].into_iter().enumerate() {
            let mut c = config(EntryLaw::Rademacher, vec![96], 120, 50 + i as u64);
            c.pipeline = pipe;
            c.constants.replacement_bound = Some(1.0);
            runs.push(simulate(&c, 1).unwrap().records[0].clone());
        }
        for a in &runs {
            for b in &runs {
                let se = (a.se_abs_lambda_p.powi(2) + b.se_abs_lambda_p.powi(2)).sqrt();
                assert!((a.mean_abs_lambda_p - b.mean_abs_lambda_p).abs() < 4.0 * se);
            }
        }
    }

    #[test]
    fn truncated_rademacher_matches_raw_exactly() {
        let mut c = config(EntryLaw::Rademacher, vec![20], 3, 9);
        let raw = simulate(&c, 1).unwrap();
        c.pipeline = Pipeline::Truncated;
        let tr = simulate(&c, 1).unwrap();
        assert_eq!(raw.records[0].mean_abs_lambda_p, tr.records[0].mean_abs_lambda_p);
    }
}
