use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared across the geometry, map, and analysis layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("singular surface point at ({0:.6}, {1:.6}, {2:.6})")]
    SingularSurfacePoint(f64, f64, f64),

    #[error("undefined projection direction: point coincides with the centroid")]
    UndefinedProjectionDirection,

    #[error("singular outer boundary point at ({0:.6}, {1:.6}, {2:.6})")]
    SingularOuterPoint(f64, f64, f64),

    #[error("undefined direction: point at the origin")]
    UndefinedDirection,

    #[error("point ({x:.6}, {y:.6}, {z:.6}) is not on the surface: |g| = {value:.3e} exceeds {tolerance:.1e}")]
    NotOnSurface {
        x: f64,
        y: f64,
        z: f64,
        value: f64,
        tolerance: f64,
    },

    #[error("point ({0:.6}, {1:.6}, {2:.6}) is not inside the outer domain")]
    NotInsideOuter(f64, f64, f64),

    #[error("point ({0:.6}, {1:.6}, {2:.6}) is inside the core")]
    InsideCore(f64, f64, f64),

    #[error("outer boundary not reached within the ray horizon {horizon:.3e}")]
    OuterBoundaryNotReached { horizon: f64 },

    #[error("geometric normal property violated at ({0:.6}, {1:.6}, {2:.6}): inward ray misses the core")]
    NormalPropertyViolated(f64, f64, f64),

    #[error("scenario globally critical; constants undefined")]
    GloballyCritical,

    #[error("point is not critical: |grad d| = {grad:.3e} exceeds {tolerance:.1e}")]
    NotCritical { grad: f64, tolerance: f64 },

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("invalid parameter '{name}': {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap the error with location context, e.g. which probe point failed.
    pub fn at(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
