//! Truncation at `sqrt(n)/R_over`, centring and renormalisation, the
//! configuration matrix of large entries and its admissibility classifier,
//! conditioned resampling and four-moment replacement.

mod config;
mod pipeline;
mod replace;

pub use config::{
    build_configuration, classify, inadmissibility_probability_bounds, AdmissibilityVerdict,
    ConfigParams, ConfigurationMatrix, InadmissibilityBounds,
};
pub use pipeline::{center_and_renormalize, truncate_hat, TruncatedMatrices, Truncation, TruncationReport};
pub use replace::{
    matched_small_law, replace_small_cells, replacement_matrix, sample_conditioned, small_entry_law,
};
