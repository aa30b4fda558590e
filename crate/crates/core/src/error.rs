use thiserror::Error;

/// Errors raised anywhere in the detection pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index} below tolerance {tolerance:.3e})")]
    NotPositiveDefinite {
        index: usize,
        pivot: f64,
        tolerance: f64,
    },
    #[error("eigensolver did not converge after {sweeps} sweeps")]
    ConvergenceFailure { sweeps: usize },
    #[error("vector norm is zero")]
    ZeroVector,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian")]
    NotHermitian,

    #[error("roll-off factor {0} outside [0, 1]")]
    InvalidRolloff(f64),
    #[error("invalid signal format: {0}")]
    InvalidFormat(String),
    #[error("synthesized signal has zero energy")]
    ZeroSignal,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("channel draw degenerate after {attempts} attempts")]
    DegenerateDraw { attempts: usize },

    #[error("detector {0} requires the transmitted signal to be known")]
    MissingKnownSignal(&'static str),
    #[error("detector {0} requires reference-channel observations")]
    MissingReference(&'static str),
    #[error("residual energy term {0:.3e} is negative")]
    NegativeResidual(f64),
    #[error("denominator {denominator:.3e} is degenerate relative to total energy {energy:.3e}")]
    DegenerateDenominator { denominator: f64, energy: f64 },
    #[error("exhaustive search over {size} candidates exceeds cap {cap}")]
    SearchSpaceTooLarge { size: u128, cap: u64 },

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidRolloff(_)
                | Error::InvalidFormat(_)
                | Error::InvalidScenario(_)
                | Error::InvalidExperiment(_)
                | Error::Malformed(_)
                | Error::Io(_)
                | Error::MissingKnownSignal(_)
                | Error::MissingReference(_)
                | Error::DimensionMismatch(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
