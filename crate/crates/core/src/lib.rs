//! Local semicircle law toolkit for Wigner matrices with finite fourth moment.
//!
//! The crate is organised bottom-up:
//!
//! * [`semicircle`]: closed-form analytics of the semicircle distribution.
//! * [`ensembles`]: seeded Wigner matrix generation, entry laws, conditioned
//!   laws and four-moment matched bounded replacements.
//! * [`truncation`]: the truncate / centre / renormalise pipeline and the
//!   configuration-matrix classifier.
//! * [`spectral`]: eigendecomposition, resolvents, minors and the exact
//!   algebraic identities relating `R_jj`, `T_n` and `Lambda_n`.
//! * [`experiments`]: the Monte Carlo harness and scaling fits.
//! * [`io`]: configuration files, result tables and run manifests.

pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod io;
pub mod matrix;
pub mod quadrature;
pub mod selftest;
pub mod semicircle;
pub mod spectral;
pub mod truncation;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
