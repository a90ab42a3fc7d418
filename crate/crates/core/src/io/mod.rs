//! Configuration files, result tables, plot data and run manifests.

mod config;
mod manifest;
mod plot;
mod records;
mod table;

pub use config::{canonicalize, config_digest, ConstantsSection, DomainSection, RunConfig, RunSection};
pub use manifest::{unix_now, OutputRef, RunManifest};
pub use plot::{write_fit_plot, PlotFiles};
pub use records::{
    classification_table, experiment_table, fit_table, matrix_table, spectral_stat_table, spectral_trial_table,
    spectrum_table, truncation_table, ClassificationRow,
};
pub use table::{Cell, Column, ColumnKind, Format, ResultTable, SCHEMA_VERSION};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "LOCALLAW_OUT";

/// Output directory from the flag, then [`OUT_ENV`], then `locallaw-out`.
pub fn output_dir(flag: Option<&std::path::Path>) -> std::path::PathBuf {
    flag.map(std::path::Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_ENV).map(Into::into))
        .unwrap_or_else(|| "locallaw-out".into())
}
