use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("all input vectors are numerically zero, span is empty")]
    EmptySpan,

    #[error("matrix is not symmetric: max |A - A^T| = {0:.3e}")]
    Symmetry(f64),

    #[error("ambient dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),

    #[error("derivative order {requested} exceeds cached maximum {max}")]
    Order { requested: usize, max: usize },

    #[error("space carries no fibration split")]
    MissingFibration,

    #[error("vector is not tangent to the subspace (residual {0:.3e})")]
    NotTangent(f64),

    #[error("subspace is not closed under the bracket (residual {0:.3e})")]
    NotASubalgebra(f64),

    #[error("bracket closure did not stabilize after {0} sweeps")]
    Closure(usize),

    #[error("internal consistency violation: {0}")]
    InternalConsistency(String),

    #[error("unknown space name: {0}")]
    UnknownSpace(String),

    #[error("zero initial velocity has no geodesic")]
    ZeroVelocity,

    #[error("unsupported base space: {0}")]
    UnsupportedBase(String),

    #[error("induced curvature is not of Berger type: {0}")]
    NotBerger(String),

    #[error("torus basis vectors do not commute (residual {0:.3e})")]
    NotAbelian(f64),

    #[error("operator is not a fixed-point-free order-3 isometry: {0}")]
    NotThreeSymmetric(String),

    #[error("invariant violated: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
