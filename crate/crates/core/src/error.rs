use thiserror::Error;

/// Errors raised by the library. Each variant names the contract it guards.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("too few points: need at least {needed}, have {have}")]
    TooFewPoints { needed: usize, have: usize },
    #[error("ambiguous integer relation: residual {residual:e} lies between tol and 10*tol")]
    RelationAmbiguity { residual: f64 },
    #[error("sample points do not span the physical space")]
    DegenerateSpan,
    #[error("deviation profile has {0} radii, need at least 4")]
    InsufficientProfile(usize),
    #[error("point is not in the addressed sample")]
    PointNotInSample,
    #[error("rank {s} does not exceed the dimension {d}: internal space is trivial")]
    RankNotExceedingD { s: usize, d: usize },
    #[error("lifted lattice is singular (covolume {0:e})")]
    SingularLattice(f64),
    #[error("star images do not span the internal space")]
    DegenerateHull,
    #[error("no non-singular shift found after {0} trials")]
    NoNonSingularFound(usize),
    #[error("window translates have empty intersection")]
    EmptyIntersection,
    #[error("lattice enumeration needs {0} candidates, limit is 1e8")]
    UnboundedEnumeration(f64),
    #[error("unknown substitution rule `{0}`")]
    UnknownRule(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
