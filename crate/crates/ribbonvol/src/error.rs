use thiserror::Error;

/// Failures reported by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid ribbon graph: {0}")]
    InvalidGraph(String),
    #[error("operation requires a trivalent ribbon graph")]
    NotTrivalent,
    #[error("unstable surface type (g={0}, n={1}); need 2g-2+n > 0")]
    UnstableType(usize, usize),
    #[error("request exceeds the desk-scale cap: {0}")]
    TooLarge(String),
    #[error("edge lengths must be strictly positive")]
    NonPositiveLength,
    #[error("expected {expected} lengths, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("boundary lengths are resonant")]
    Resonant,
    #[error("empty edge subset")]
    EmptySubset,
    #[error("rays are linearly dependent")]
    DependentRays,
    #[error("a ray has vanishing length after zero-length resolution")]
    DegenerateResolution,
    #[error("resolution dependence detected: {0}")]
    ResolutionMismatch(String),
    #[error("no full-dimensional cone found")]
    NoFullCone,
    #[error("non-positive radius")]
    NonPositiveRadius,
    #[error("zero samples requested")]
    NoSamples,
    #[error("power s={0} is outside the supported range")]
    PowerOutOfRange(f64),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
