use thiserror::Error;

/// Errors raised by the library.
///
/// The CLI maps these onto exit codes: configuration problems are `1`,
/// runtime or eigensolver failures `2`, identity-audit failures `3`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spectral point: imaginary part must be positive, got v = {0}")]
    InvalidSpectralPoint(f64),

    #[error("invalid entry law: {0}")]
    InvalidLaw(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible moment sequence: {0}")]
    InfeasibleMoments(String),

    #[error("matched law needs support {needed:.6}, exceeds bound D = {bound:.6}")]
    InsufficientBound { needed: f64, bound: f64 },

    #[error("annulus ({lo:.6}, {hi:.6}] carries zero probability; large-entry law cannot be sampled")]
    ZeroAnnulusMass { lo: f64, hi: f64 },

    #[error("rejection sampling exhausted {0} attempts")]
    RejectionExhausted(usize),

    #[error("degenerate truncation: sigma^2 = {0:e} below 1e-6")]
    DegenerateTruncation(f64),

    #[error("eigensolver did not converge within {iterations} iterations (matrix hash {hash:016x})")]
    NoConvergence { iterations: usize, hash: u64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("identity audit failed: {0}")]
    IdentityAudit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
