use std::fmt;

use hpcause::files::LoadError;
use hpcause::qbf::QbfError;
use hpcause::{BlameError, EngineError};

/// A failed command, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Malformed input text (exit 2).
    Parse(String),
    /// The model violates a structural requirement (exit 3).
    InvalidModel(String),
    /// The solver-call budget ran out (exit 4).
    Budget(String),
    /// Anything else (exit 1).
    Other(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::InvalidModel(_) => 3,
            Failure::Budget(_) => 4,
            Failure::Other(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Parse(_) => "parse",
            Failure::InvalidModel(_) => "invalid-model",
            Failure::Budget(_) => "budget",
            Failure::Other(_) => "other",
        }
    }

    /// Prefix the message with where it happened.
    pub fn context(self, what: &str) -> Self {
        let wrap = |m: String| format!("{what}: {m}");
        match self {
            Failure::Parse(m) => Failure::Parse(wrap(m)),
            Failure::InvalidModel(m) => Failure::InvalidModel(wrap(m)),
            Failure::Budget(m) => Failure::Budget(wrap(m)),
            Failure::Other(m) => Failure::Other(wrap(m)),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Parse(m) | Failure::InvalidModel(m) | Failure::Budget(m) | Failure::Other(m) => f.write_str(m),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::InvalidModel(_) => Failure::InvalidModel(e.to_string()),
            EngineError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Parse { .. } => Failure::Parse(e.to_string()),
            LoadError::Engine { ref path, ref source } => Failure::from(source.clone()).context(path),
            LoadError::Blame { ref path, ref source } => Failure::from(source.clone()).context(path),
            LoadError::Io { .. } | LoadError::NoModel(_) => Failure::Other(e.to_string()),
        }
    }
}

impl From<BlameError> for Failure {
    fn from(e: BlameError) -> Self {
        match e {
            BlameError::Situation { index, source } => Failure::from(source).context(&format!("situation {index}")),
            other => Failure::Other(other.to_string()),
        }
    }
}

impl From<QbfError> for Failure {
    fn from(e: QbfError) -> Self {
        Failure::Other(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

impl From<hpcause::FormulaError> for Failure {
    fn from(e: hpcause::FormulaError) -> Self {
        EngineError::from(e).into()
    }
}

impl From<hpcause::ModelError> for Failure {
    fn from(e: hpcause::ModelError) -> Self {
        EngineError::from(e).into()
    }
}
