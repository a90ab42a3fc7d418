//! Monte Carlo harness: moment estimates of `Lambda_n` over `(n, u, v, p)`
//! grids, eigenvalue and eigenvector statistics, and log-log scaling fits.

mod config;
mod fit;
mod local_law;
mod spectral_runs;
mod stats;

pub use config::{Constants, ExperimentConfig, Pipeline, Rule, VGrid, MAX_P};
pub use fit::{fit_log_log, fit_scaling, FitMode, ScalingFit, ScalingPoint};
pub use local_law::{
    run_local_law, simulate, single_trial, sort_records, AuditSummary, ExperimentRecord, LocalLawRun, TrialOutcome,
    MAX_RETRIES,
};
pub use spectral_runs::{
    edge_imag_experiment, run_spectral_statistics, EdgeRun, SpectralStatRecord, SpectralStatsConfig,
    SpectralStatsRun, SpectralTrial,
};
pub use stats::{
    counting_statistic, delocalization_resolvent_bound, delocalization_stat, kolmogorov_distance, median,
    rigidity_profile, DelocalizationCheck, DelocalizationStat, RigidityProfile, REPEATED_TOL,
};
