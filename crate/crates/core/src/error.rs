use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("non-finite evaluation of {label} at ({x}, {y})")]
    NonFiniteEvaluation { label: String, x: f64, y: f64 },

    #[error("moment does not exist under this law at requested precision: {0}")]
    MomentDoesNotExist(String),

    #[error("division by asymptotically degenerate denominator (|B| = {0:e})")]
    DegenerateDenominator(f64),

    #[error("delta method inapplicable at expansion point {0}")]
    DeltaMethodInapplicable(f64),

    #[error("degenerated marginal: {0}")]
    DegeneratedMarginal(&'static str),

    #[error("affine dependence, asymptotics excluded (rho = {0})")]
    AffineDependence(f64),

    #[error("inconsistent moment set: {0}")]
    InconsistentMoments(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid law: {0}")]
    InvalidLaw(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("gamma({i}, {j}): {source}")]
    GammaEntry {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("replicate {index}: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("internal consistency: {0}")]
    Internal(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
