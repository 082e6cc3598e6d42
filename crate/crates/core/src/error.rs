use alloc::string::String;

/// Errors produced by the perception and simulation routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("degenerate homography")]
    DegenerateHomography,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("rank deficient")]
    RankDeficient,
    #[error("singular solve")]
    SingularSolve,
    #[error("diverged; reduce learning rate")]
    Diverged,
    #[error("too few matched markers: {0} (need at least 3)")]
    TooFewMarkers(usize),
    #[error("empty contact mask")]
    EmptyMask,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
