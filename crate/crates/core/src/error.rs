use thiserror::Error;

use crate::rhs::{EvalError, ParseError};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid time scale component #{index}: {reason}")]
    InvalidComponent { index: usize, reason: String },

    #[error("time scale components #{first} and #{second} overlap or are out of order")]
    OverlappingComponents { first: usize, second: usize },

    #[error("time scale has {found} distinct point(s); at least 2 are required")]
    TooFewPoints { found: usize },

    #[error("grid index {index} out of range for a scale of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("graininess is undefined at the minimum of the scale (index 0)")]
    UndefinedAtMinimum,

    #[error(
        "regressivity violated at grid index {index} (t = {t}): graininess {nu} times eps {eps} \
         must be < 1"
    )]
    Regressivity {
        index: usize,
        t: f64,
        nu: f64,
        eps: f64,
    },

    #[error("regressivity violated: h*eps = {product} must be < 1")]
    RegressivityScalar { product: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("grid functions live on different time scales")]
    ScaleMismatch,

    #[error("tube radius must be nonnegative, found {value} at grid index {index}")]
    NegativeRadius { index: usize, value: f64 },

    #[error("eps must be nonzero for the periodic linear problem")]
    ZeroEps,

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("right-hand side component {component} at t = {t}: {source}")]
    Eval {
        component: usize,
        t: f64,
        #[source]
        source: EvalError,
    },

    #[error("registry: {0}")]
    Registry(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}
