//! Geodesic and Jacobi-field dynamics, quadrature and growth classification.

mod csv_io;
mod geodesic;
mod growth;
mod jacobi;
mod quadrature;

pub use csv_io::{read_jacobi_csv, read_trajectory_csv, write_jacobi_csv, write_trajectory_csv};
pub use geodesic::{
    integrate_geodesic, integrate_geodesic_with, max_relative_error, rk4_step, sample_curve, Curve,
    IntegrationOptions, Trajectory, SPEED_DRIFT_LIMIT,
};
pub use growth::{classify_growth, GrowthClassification, GrowthKind, BOUNDED_SLOPE, MIN_POINTS, TIE_MARGIN};
pub use jacobi::{
    covariant_derivative, geodesic_deviation_fd, integrate_jacobi, jacobi_acceleration, jacobi_norm_sq,
    sup_relative_difference, JacobiTrajectory, DEVIATION_EPSILON,
};
pub use quadrature::{
    arc_length, arc_length_curve, average_volume, gauss_legendre, integrate_1d, volume_region,
    volume_region_separable, QuadratureRule, QuadratureSpec,
};
