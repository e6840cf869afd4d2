use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("invalid reward model: {0}")]
    InvalidReward(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An action was applied to a state where its connection is already gone.
    #[error("connection {action} is not present in state {state}")]
    ActionNotPresent { state: String, action: usize },

    /// An action outside the feasible set was submitted to the environment.
    #[error("action {action} is masked in state {state}")]
    MaskedAction { state: String, action: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("{what} = {value} exceeds the cap of {cap}{hint}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
        hint: &'static str,
    },

    #[error("reward {reward} > 0 for action {action} in state {state}; planners require non-positive rewards")]
    PositiveReward {
        state: String,
        action: usize,
        reward: f64,
    },

    #[error("value iteration did not converge within {iterations} sweeps (delta = {delta})")]
    NotConverged { iterations: usize, delta: f64 },

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::InvalidStructure(_) => "invalid-structure",
            Error::InvalidReward(_) => "invalid-reward",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::ActionNotPresent { .. } => "action-not-present",
            Error::MaskedAction { .. } => "masked-action",
            Error::Infeasible(_) => "infeasible",
            Error::CapExceeded { .. } => "cap-exceeded",
            Error::PositiveReward { .. } => "positive-reward",
            Error::NotConverged { .. } => "not-converged",
            Error::InvalidTrajectory(_) => "invalid-trajectory",
        }
    }
}
