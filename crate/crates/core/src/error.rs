use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("negative entry {value} at player {player}, strategy {strategy}")]
    NegativeEntry { player: usize, strategy: usize, value: f64 },

    #[error("row {player} sums to {sum}, outside tolerance of 1")]
    RowSumViolation { player: usize, sum: f64 },

    #[error("non-finite entry at player {player}, strategy {strategy}")]
    NonFinite { player: usize, strategy: usize },

    #[error("player {player} has no coordinate above the support threshold")]
    EmptySupportRow { player: usize },

    #[error("denominator is not positive ({value})")]
    DenominatorNonPositive { value: f64 },

    #[error("objective does not provide a Hessian")]
    HessianUnavailable,

    #[error("step size too large: factor {value} for player {player} is not positive")]
    StepSizeTooLarge { player: usize, value: f64 },

    #[error("Baum-Eagon denominator for player {player} is {value}")]
    ZeroDenominator { player: usize, value: f64 },

    #[error("point is not an interior fixed point: {0}")]
    NotInteriorFixedPoint(String),

    #[error("point is not a fixed point (step moves by {gap:e})")]
    NotFixedPoint { gap: f64 },

    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown built-in objective '{0}'")]
    UnknownObjective(String),

    #[error("witness not found: {0}")]
    WitnessNotFound(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidShape(_)
            | Error::ShapeMismatch { .. }
            | Error::NegativeEntry { .. }
            | Error::RowSumViolation { .. }
            | Error::NonFinite { .. }
            | Error::Parse { .. }
            | Error::UnknownObjective(_)
            | Error::InvalidConfig(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            _ => 3,
        }
    }
}
