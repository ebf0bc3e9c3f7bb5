use thiserror::Error;

/// Errors raised by model construction, simulation, solving and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("replication exceeded the horizon of {limit} steps (runaway procedure?)")]
    HorizonExceeded { limit: u64 },

    /// Indices are 0-based; the message shows 1-based labels.
    #[error(
        "invalid pairing: assessment treatment {} (D = {assess_power}) must have strictly \
         larger detection power than training treatment {} (D = {train_power})",
        .assess + 1,
        .train + 1
    )]
    InvalidPairing {
        train: usize,
        assess: usize,
        train_power: f64,
        assess_power: f64,
    },

    #[error(
        "treatment {} cannot trigger the change (zero transition probability) and cannot be \
         used for training",
        .treatment + 1
    )]
    InvalidTrainingTreatment { treatment: usize },

    #[error("unsupported change-point model: {0}")]
    UnsupportedModel(String),

    #[error("unsupported response family: {0}")]
    UnsupportedResponse(String),

    #[error(
        "value iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error(
        "no cost in the grid achieves error <= {alpha:e} (smallest observed {smallest:e}); \
         extend the cost grid toward smaller values"
    )]
    CalibrationFailure { alpha: f64, smallest: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input (files, flags, model parameters)
    /// rather than by a failure during a run.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::InvalidModel(_)
                | Error::Config(_)
                | Error::InvalidPairing { .. }
                | Error::InvalidTrainingTreatment { .. }
                | Error::UnsupportedModel(_)
                | Error::UnsupportedResponse(_)
                | Error::Json(_)
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
