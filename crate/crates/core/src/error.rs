use std::fmt;

/// A single violated invariant, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn join(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid {what}: {}", join(.diagnostics))]
    Invalid {
        what: &'static str,
        diagnostics: Vec<Diagnostic>,
    },

    #[error("division by zero prior cell (player {player}, type {ty})")]
    ZeroPrior { player: usize, ty: usize },

    #[error("scenario too large: {0}")]
    TooLarge(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("unknown scenario {name:?}; valid names: {}", .valid.join(", "))]
    UnknownScenario { name: String, valid: Vec<String> },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, diagnostics: Vec<Diagnostic>) -> Self {
        Error::Invalid { what, diagnostics }
    }

    /// True for refusals caused by a size guard rather than bad input.
    pub fn is_size_guard(&self) -> bool {
        matches!(self, Error::TooLarge(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
