use swarmplay_core::game::GameError;
use swarmplay_core::rl::PolicyFileError;
use swarmplay_core::sim::SimError;
use swarmplay_core::tournament::TournamentError;
use swarmplay_core::vision::VisionError;
use swarmplay_core::Cell;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("no session with id {0}")]
    UnknownSession(String),
    #[error("invalid session config: {0}")]
    InvalidConfig(String),
    #[error("could not load policy: {0}")]
    PolicyLoadFailure(#[from] PolicyFileError),
    #[error("cell {0} is already taken")]
    OccupiedCell(Cell),
    #[error("cell must be 1-9, got {0}")]
    InvalidCell(i64),
    #[error("it is not the {0} turn")]
    OutOfTurn(&'static str),
    #[error("the game is over")]
    GameOver,
    #[error("image moves need a session with vision enabled")]
    VisionDisabled,
    #[error(transparent)]
    Vision(#[from] VisionError),
    #[error("drone flight failed: {0}")]
    Flight(#[from] SimError),
    #[error("strategy failed: {0}")]
    Strategy(#[from] TournamentError),
    #[error("malformed request: {0}")]
    BadRequest(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ServiceError {
    /// Stable machine-readable name used in error responses.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "UnknownSession",
            ServiceError::InvalidConfig(_) => "InvalidConfig",
            ServiceError::PolicyLoadFailure(_) => "PolicyLoadFailure",
            ServiceError::OccupiedCell(_) => "OccupiedCell",
            ServiceError::InvalidCell(_) => "InvalidCell",
            ServiceError::OutOfTurn(_) => "OutOfTurn",
            ServiceError::GameOver => "GameOver",
            ServiceError::VisionDisabled => "VisionDisabled",
            ServiceError::Vision(e) => match e {
                VisionError::GridOutOfBounds => "GridOutOfBounds",
                VisionError::AmbiguousCell { .. } => "AmbiguousCell",
                VisionError::NoChange => "NoChange",
                VisionError::MultipleChanges(_) => "MultipleChanges",
                VisionError::NonHumanChange(_) => "NonHumanChange",
                VisionError::InvalidConfig(_) => "InvalidConfig",
                VisionError::InvalidImage(_) => "InvalidImage",
            },
            ServiceError::Flight(_) => "FlightFailure",
            ServiceError::Strategy(_) => "StrategyFailure",
            ServiceError::BadRequest(_) => "BadRequest",
            ServiceError::Internal(_) => "Internal",
        }
    }
}

impl From<GameError> for ServiceError {
    fn from(e: GameError) -> Self {
        match e {
            GameError::OccupiedCell(c) => ServiceError::OccupiedCell(c),
            GameError::GameOver => ServiceError::GameOver,
            GameError::InvalidCell(n) => ServiceError::InvalidCell(n),
            other => ServiceError::Internal(other.to_string()),
        }
    }
}
