use crate::io::FormatError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid {what} range: min {min} must be below max {max}")]
    InvalidRange {
        what: &'static str,
        min: f64,
        max: f64,
    },

    #[error("rig mesh has no faces")]
    EmptyMesh,

    #[error("image shape mismatch: {a:?} vs {b:?} (width, height, channels)")]
    ShapeMismatch {
        a: (usize, usize, usize),
        b: (usize, usize, usize),
    },

    #[error("resolution mismatch: expected {expected:?}, got {got:?}")]
    ResolutionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("non-finite value in {what} at element {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("desk-scale limit exceeded: {what} = {got} (limit {limit})")]
    ScaleLimit {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}
