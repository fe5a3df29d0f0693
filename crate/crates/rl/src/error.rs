use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] hqrl_core::Error),
    #[error("action {action} is masked")]
    MaskedAction { action: usize },
    #[error("action {action} out of range for {num_actions} actions")]
    ActionRange { action: usize, num_actions: usize },
    #[error("episode is over; call reset")]
    EpisodeOver,
    #[error("no action is available")]
    EmptyMask,
    #[error("trajectory is incomplete (last step not terminal)")]
    IncompleteTrajectory,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
