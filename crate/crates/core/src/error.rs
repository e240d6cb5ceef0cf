use std::path::PathBuf;

use thiserror::Error;

use crate::types::RoomId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("illegal move: {0}")]
    IllegalMove(String),

    #[error("unknown room {0}")]
    UnknownRoom(RoomId),

    #[error("only {available} start/target pairs at distance {steps}, {requested} requested")]
    InsufficientPairs { steps: u32, requested: usize, available: usize },

    #[error("graph has no rewards")]
    RewardsMissing,

    #[error("configuration already has no misplaced number")]
    NoSubgoal,

    #[error("actor produced no parseable action")]
    EmptyProposal,

    #[error("module reply has no valid/invalid or yes/no verdict: {0:?}")]
    UnparseableVerdict(String),

    #[error("module reply has no non-negative step estimate: {0:?}")]
    UnparseableValue(String),

    #[error("backend error: {0}")]
    Backend(String),

    #[error("transport error: {0}")]
    Transport(String),

    #[error("authentication rejected: {0}")]
    Auth(String),

    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}:{line}: {message}", file.display())]
    TraceFormat { file: PathBuf, line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
