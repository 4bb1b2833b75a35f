//! Information geometry of entropic-dynamics models: Fisher metrics,
//! connections and curvature, geodesic and Jacobi-field dynamics, volume
//! growth, and Monte-Carlo checks of the Fisher information.

pub mod error;
pub mod fisher_mc;
pub mod linalg;
pub mod manifold;
pub mod dynamics;
pub mod models;
pub mod verify;

pub use error::{GeoError, Result};
