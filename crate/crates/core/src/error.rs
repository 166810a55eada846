use thiserror::Error;

use crate::game::Diagnostic;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid game: {}", join(.0))]
    InvalidGame(Vec<Diagnostic>),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("unknown state {0:?}")]
    UnknownState(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("value vector is not a fixpoint at state {state}: residual {residual}")]
    NotFixpoint { state: String, residual: f64 },

    #[error("values are not exact; rational snapping did not succeed")]
    InexactValues,

    #[error("iteration cap {cap} reached; residual {residual}")]
    IterationCap { cap: usize, residual: f64 },

    #[error("unsound classification: {0}")]
    Unsound(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
