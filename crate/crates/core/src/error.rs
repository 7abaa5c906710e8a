use thiserror::Error;

/// Every failure the library can report. Variant names follow the error
/// vocabulary used by the CLI report and exit-code mapping.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("element is not self-adjoint (deviation {deviation:.3e})")]
    NotSelfAdjoint { deviation: f64 },
    #[error("spectral gap {gap:.3e} is below the required {required:.3e}")]
    SpectralGap { gap: f64, required: f64 },
    #[error("grid error: {0}")]
    Grid(String),
    #[error("depth error: {0}")]
    Depth(String),
    #[error("insufficient depth: {0}")]
    InsufficientDepth(String),
    #[error("element is zero")]
    ZeroElement,
    #[error("supply error: {0}")]
    Supply(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("could not clear lambda value {value:.6e} from generator spectra")]
    LambdaCollision { value: f64 },
    #[error("interval supply error: {0}")]
    IntervalSupply(String),
    #[error("multiplicity {n} is not larger than 2*{m}-1")]
    Multiplicity { n: usize, m: usize },
    #[error("hypothesis ({condition}) violated by {deviation:.3e}")]
    Hypothesis { condition: char, deviation: f64 },
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("Schur iteration did not converge for a {0}x{0} matrix")]
    NoConvergence(usize),
    #[error("configuration error at {path}: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }

    /// Resource and depth problems get their own exit code in the CLI.
    pub fn is_resource_or_depth(&self) -> bool {
        matches!(
            self,
            Error::Resource(_) | Error::Depth(_) | Error::InsufficientDepth(_) | Error::Supply(_)
        )
    }
}
