use thiserror::Error;

/// Errors raised by the geometry, dynamics and sampling routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("point {coords:?} lies outside the domain of `{manifold}`")]
    OutOfDomain { manifold: String, coords: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("metric is singular or indefinite (condition number {condition:.3e})")]
    SingularMetric { condition: f64 },

    #[error("curvature symmetry residual {residual:.3e} exceeds breakdown threshold")]
    NumericalBreakdown { residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("component `{component}` has non-positive Fisher information {value:.3e} at {theta}")]
    NonPositiveInformation {
        component: String,
        theta: f64,
        value: f64,
    },

    #[error("degenerate geodesic: {0}")]
    DegenerateGeodesic(String),

    #[error("trajectory left the domain after tau = {last_tau} (crossing estimated near {crossing_estimate})")]
    LeftDomain {
        last_tau: f64,
        crossing_estimate: f64,
    },

    #[error("conserved speed drifted by {drift:.3e} (relative), limit {limit:.1e}")]
    SpeedDriftExceeded { drift: f64, limit: f64 },

    #[error("insufficient data: {got} points in window, need at least {needed}")]
    InsufficientData { got: usize, needed: usize },

    #[error("series has a non-positive value {value} at tau = {tau}")]
    NonPositiveSeries { tau: f64, value: f64 },

    #[error("draw {value} lies outside the support of {family}")]
    OutOfSupport { family: String, value: f64 },

    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T, E = GeoError> = std::result::Result<T, E>;

impl From<csv::Error> for GeoError {
    fn from(e: csv::Error) -> Self {
        GeoError::Csv(e.to_string())
    }
}
