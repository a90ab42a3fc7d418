//! Eigendecomposition, resolvents, minors and exact resolvent identities.

mod eigen;
mod identities;
mod resolvent;

pub use eigen::{eigendecompose, eigenvalues, SpectralDecomposition};
pub use identities::{
    epsilon_decomposition, epsilon_decomposition_conditioned, epsilon_decomposition_downdate,
    local_law_from_eigenvalues, local_law_sample, local_law_sample_from, trace_difference_identity,
    ward_check, EpsilonDecomposition, LocalLawSample, TraceDifference, WardCheck,
};
pub use resolvent::{
    esd, resolvent, resolvent_diagonal, resolvent_spectral, stieltjes_esd, Esd, ResolventSlice,
};
