use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator and its analyses.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidInput { field: &'static str, reason: String },

    #[error("value {value:e} exceeds the magnitude cap {cap:e}")]
    Overflow { value: f64, cap: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("outside the domain of validity: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error{}: {message}", location(.line, .field))]
    Parse {
        field: Option<String>,
        line: Option<usize>,
        message: String,
    },

    #[error("unknown preset `{0}` (expected example1..example4)")]
    UnknownPreset(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn location(line: &Option<usize>, field: &Option<String>) -> String {
    match (line, field) {
        (Some(l), Some(f)) => format!(" at line {l}, field `{f}`"),
        (Some(l), None) => format!(" at line {l}"),
        (None, Some(f)) => format!(" in field `{f}`"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn parse_field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: Some(field.into()),
            line: None,
            message: message.into(),
        }
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput { .. }
            | Error::Parse { .. }
            | Error::UnknownPreset(_)
            | Error::Domain(_) => 2,
            Error::Convergence { .. } | Error::Numeric(_) | Error::Overflow { .. } => 3,
            Error::InsufficientData(_) => 4,
            Error::Io { .. } => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
