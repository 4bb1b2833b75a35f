//! The concrete statistical manifolds.

pub mod expfam;
pub mod gauss;
pub mod m4;

pub use expfam::{
    build_m1_peng, build_m4, expfam_christoffel, expfam_connection_derivative, expfam_metric,
    sufficient_stat_moments, ExpFamilyComponent, ExpFamilyManifold, Jet, SufficientStatistic,
};
pub use gauss::*;
pub use m4::*;
