use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no branch for state {state}, input index {input}")]
    MissingBranch { state: usize, input: usize },
    #[error("duplicate branch for state {state}, input index {input}")]
    DuplicateBranch { state: usize, input: usize },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("enumeration of {length} sections over {alphabet} inputs exceeds the 2^24 path guard")]
    TooLarge { length: usize, alphabet: usize },
    #[error("invalid bit value {0} (expected 0 or 1)")]
    InvalidBit(u8),
    #[error("invalid convolutional code: {0}")]
    InvalidCode(String),
    #[error("search depth {depth} is below the minimum {minimum}")]
    DepthTooSmall { depth: usize, minimum: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("no metric table entry for symbol {symbol}, observation {observation}")]
    TableMiss { symbol: f64, observation: f64 },
    #[error("input sequence is empty")]
    EmptyInput,
    #[error("stream decoder has not been initialized")]
    NotInitialized,
    #[error("push after flush")]
    PushAfterFlush,
    #[error("non-positive likelihood {value} at section {section}")]
    NonpositiveLikelihood { section: usize, value: f64 },
    #[error("invalid priors: {0}")]
    InvalidPriors(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("symbol {0} is not in the channel alphabet")]
    InvalidLevel(f64),
    #[error("ISI trellis would need {0} states")]
    TooManyStates(usize),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("observation symbol {symbol} at position {position} is outside [0, {n_symbols})")]
    InvalidSymbol { symbol: usize, position: usize, n_symbols: usize },
    #[error("observation sequence{} has probability zero under the model", .sequence.map(|i| format!(" {i}")).unwrap_or_default())]
    ImpossibleObservation { sequence: Option<usize> },
    #[error("code rate must lie in (0, 1], got {0}")]
    BadRate(f64),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("target BER {0:e} is not bracketed by the report")]
    TargetNotBracketed(f64),
    #[error("{}: {message}", location(.path, *.line))]
    Config {
        path: Option<PathBuf>,
        line: Option<usize>,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn location(path: &Option<PathBuf>, line: Option<usize>) -> String {
    let file = path
        .as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_else(|| "<input>".to_string());
    match line {
        Some(line) => format!("{file}:{line}"),
        None => file,
    }
}

impl Error {
    pub(crate) fn config(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Config {
            path: None,
            line,
            message: message.into(),
        }
    }

    /// Attach a file path to a configuration error; other errors pass through.
    pub fn in_file(self, file: impl Into<PathBuf>) -> Self {
        match self {
            Error::Config { line, message, .. } => Error::Config {
                path: Some(file.into()),
                line,
                message,
            },
            other => other,
        }
    }

    /// True for errors caused by malformed user input or configuration.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::InvalidCode(_)
                | Error::InvalidChannel(_)
                | Error::InvalidModel(_)
                | Error::BadRate(_)
                | Error::BadParams(_)
                | Error::DepthTooSmall { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
