//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Errors are grouped by the
//! contract they violate rather than by module, because the same violation
//! (a zero frequency component, say) can surface from several entry points.

/// Errors reported by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A frequency vector had a zero component where a fully nonzero one is
    /// required (dyadic blocks only tile the axes-free part of the lattice).
    #[error("frequency {0:?} has a zero component; no dyadic block contains it")]
    ZeroFrequency(Vec<i32>),

    /// Dimension of an argument does not match the dimension of the object.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        /// Required dimension.
        expected: usize,
        /// Supplied dimension.
        got: usize,
    },

    /// An argument was outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A quadrature grid is too coarse for the polynomial it must integrate.
    #[error("grid too small: axis {axis} has {size} points, need at least {need}")]
    GridTooSmall {
        /// Offending axis.
        axis: usize,
        /// Points available on that axis.
        size: usize,
        /// Points required on that axis.
        need: usize,
    },

    /// A requested dense grid would exceed the allocation guard.
    #[error("grid too large: {points} points exceeds the {limit}-point guard")]
    GridTooLarge {
        /// Requested sample count.
        points: usize,
        /// Guard value.
        limit: usize,
    },

    /// The norm or error requested has no evaluation route for this input.
    #[error("unsupported evaluation: {0}")]
    Unsupported(String),

    /// A theorem's hypotheses are violated by the supplied parameters.
    #[error("hypothesis violated for {case}: {detail}")]
    Hypothesis {
        /// Which statement the parameters were checked against.
        case: String,
        /// Which hypothesis failed.
        detail: String,
    },

    /// Malformed textual input (coefficient files, generator specs, CSV).
    #[error("parse error: {0}")]
    Parse(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
