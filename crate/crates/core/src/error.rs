use crate::manifold::ManifoldKind;

/// Errors raised by the geometric primitives, operators and solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("manifold mismatch: expected {expected:?}, got {actual:?}")]
    KindMismatch {
        expected: ManifoldKind,
        actual: ManifoldKind,
    },

    #[error("points are antipodal (cut locus); the shortest geodesic is not unique")]
    AntipodalPoint,

    #[error("invalid manifold point: {0}")]
    InvalidPoint(String),

    #[error("invalid tangent vector: {0}")]
    InvalidTangent(String),

    #[error("direction vector is zero")]
    ZeroDirection,

    #[error("weighted mean did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("conjugate point reached (sqrt(lambda)*d = {0} >= pi)")]
    ConjugatePoint(f64),

    #[error("mean differential is singular (smallest |eigenvalue| {smallest:e}, largest {largest:e})")]
    SingularL { smallest: f64, largest: f64 },

    #[error("gradient of dist^p is singular at y = f for p = {0}")]
    SingularGradient(f64),

    #[error("kernel support {support} exceeds signal extent {extent} along axis {axis}")]
    KernelTooLarge { axis: usize, support: usize, extent: usize },

    #[error("invalid measurement matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("noise model {model} is not defined for {kind:?}")]
    IncompatibleNoise { model: String, kind: ManifoldKind },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_row(self, row: usize) -> Self {
        match self {
            Error::Row { .. } => self,
            other => Error::Row {
                row,
                source: Box::new(other),
            },
        }
    }

    /// Strips any row annotation.
    pub fn root(&self) -> &Error {
        match self {
            Error::Row { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
