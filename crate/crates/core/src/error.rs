use alloc::boxed::Box;
use alloc::string::String;

/// Errors raised by the simulator core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// The grid is too coarse for the requested gain.
    #[error("local gain per step {gain:.4} exceeds {limit}; refine the grid")]
    StepSize { gain: f64, limit: f64 },

    /// An intermediate value became NaN or infinite.
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    /// The undepleted-pump model left its range of validity.
    #[error("sideband energy is {fraction:.3e} of the pump energy (limit {limit:e})")]
    Depletion { fraction: f64, limit: f64 },

    /// An iterative solve did not converge.
    #[error("{0} did not converge; refine the grid")]
    NoConvergence(&'static str),

    /// A series evaluation hit its term cap before converging.
    #[error("series did not converge within {0} terms")]
    SeriesCap(usize),

    /// An argument is outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Array shapes do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A requested comb line does not exist.
    #[error("comb line {0} is not present")]
    MissingLine(i32),

    /// Not enough samples for a statistic.
    #[error("insufficient data: need at least {need}, got {got}")]
    InsufficientData { need: usize, got: usize },

    /// A dense computation would exceed the memory guard.
    #[error("memory guard: {0}")]
    Memory(String),

    /// The operation is not available for this configuration.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An error raised while simulating one shot of an ensemble.
    #[error("shot {shot}, fiber {fiber}: {source}")]
    Shot {
        shot: usize,
        fiber: usize,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(key: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// True for the numerical-validity guards (step size, depletion,
    /// non-finite values), including when wrapped in a shot annotation.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::StepSize { .. } | Error::NonFinite(_) | Error::Depletion { .. } | Error::NoConvergence(_) => true,
            Error::Shot { source, .. } => source.is_numeric(),
            _ => false,
        }
    }

    /// True for configuration errors, including when wrapped.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. } => true,
            Error::Shot { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
