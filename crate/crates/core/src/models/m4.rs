//! Closed-form geodesics, Jacobi fields and volumes on the flat
//! Poisson / Pareto / Laplace / Weibull manifold.

use crate::error::{GeoError, Result};
use crate::manifold::Point;

/// Geodesic `θ₁ = A₁(τ+B₁)²`, `θ_i = A_i e^{B_i τ}` (i = 2..4).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct M4GeodesicParams {
    pub coef_a: [f64; 4],
    pub coef_b: [f64; 4],
    /// Pareto scale.
    pub a: f64,
    /// Weibull shape.
    pub b: f64,
}

impl M4GeodesicParams {
    pub fn new(coef_a: [f64; 4], coef_b: [f64; 4], a: f64, b: f64) -> Result<Self> {
        if coef_a.iter().chain(&coef_b).any(|x| !x.is_finite()) {
            return Err(GeoError::InvalidParameter("geodesic constants must be finite".into()));
        }
        if !(coef_a[0] > 0.0) {
            return Err(GeoError::InvalidParameter(format!("A1 must be > 0, got {}", coef_a[0])));
        }
        if coef_a.iter().any(|&x| x == 0.0) {
            return Err(GeoError::InvalidParameter("A_i must be non-zero".into()));
        }
        if !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) {
            return Err(GeoError::InvalidParameter(format!("need a > 0 and b > 0, got a={a}, b={b}")));
        }
        Ok(M4GeodesicParams { coef_a, coef_b, a, b })
    }

    /// Constants of the geodesic through `p0` with velocity `v0` at τ = 0.
    ///
    /// The first coordinate must move (`v0[0] ≠ 0`): a geodesic with constant
    /// θ₁ is not of the `A₁(τ+B₁)²` form.
    pub fn from_initial(p0: &[f64], v0: &[f64], a: f64, b: f64) -> Result<Self> {
        if p0.len() != 4 || v0.len() != 4 {
            return Err(GeoError::DimensionMismatch {
                expected: 4,
                got: if p0.len() != 4 { p0.len() } else { v0.len() },
            });
        }
        if p0.iter().any(|&x| !(x > 0.0)) {
            return Err(GeoError::OutOfDomain {
                manifold: "M4".into(),
                coords: p0.to_vec(),
            });
        }
        if v0[0] == 0.0 {
            return Err(GeoError::DegenerateGeodesic(
                "theta1 is stationary; no (A1, B1) representation".into(),
            ));
        }
        let a1 = v0[0] * v0[0] / (4.0 * p0[0]);
        let b1 = 2.0 * p0[0] / v0[0];
        let mut ca = [a1, 0.0, 0.0, 0.0];
        let mut cb = [b1, 0.0, 0.0, 0.0];
        for i in 1..4 {
            ca[i] = p0[i];
            cb[i] = v0[i] / p0[i];
        }
        Self::new(ca, cb, a, b)
    }

    /// `s = B₂² + B₃² + b²B₄²`.
    pub fn transverse_speed_sq(&self) -> f64 {
        let [_, b2, b3, b4] = self.coef_b;
        b2 * b2 + b3 * b3 + self.b * self.b * b4 * b4
    }

    /// Constant speed `√(4A₁ + B₂² + B₃² + b²B₄²)`.
    pub fn speed(&self) -> f64 {
        (4.0 * self.coef_a[0] + self.transverse_speed_sq()).sqrt()
    }
}

/// Point and velocity on the closed-form geodesic.
pub fn m4_geodesic(params: &M4GeodesicParams, tau: f64) -> Result<(Point, Vec<f64>)> {
    let [a1, a2, a3, a4] = params.coef_a;
    let [b1, b2, b3, b4] = params.coef_b;
    let s = tau + b1;
    let e = [(b2 * tau).exp(), (b3 * tau).exp(), (b4 * tau).exp()];
    let coords = vec![a1 * s * s, a2 * e[0], a3 * e[1], a4 * e[2]];
    if coords.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(GeoError::OutOfDomain {
            manifold: "M4".into(),
            coords,
        });
    }
    let vel = vec![2.0 * a1 * s, a2 * b2 * e[0], a3 * b3 * e[1], a4 * b4 * e[2]];
    Ok((Point::new(coords)?, vel))
}

/// Residual of the geodesic equations `θ̈₁ − θ̇₁²/(2θ₁)` and `θ̈_i − θ̇_i²/θ_i`
/// evaluated on the closed form with its exact second derivative.
pub fn m4_geodesic_residual(params: &M4GeodesicParams, tau: f64) -> Result<[f64; 4]> {
    let (p, v) = m4_geodesic(params, tau)?;
    let th = p.coords();
    let mut acc = [2.0 * params.coef_a[0], 0.0, 0.0, 0.0];
    for i in 1..4 {
        acc[i] = v[i] * params.coef_b[i];
    }
    let mut out = [acc[0] - v[0] * v[0] / (2.0 * th[0]), 0.0, 0.0, 0.0];
    for i in 1..4 {
        out[i] = acc[i] - v[i] * v[i] / th[i];
    }
    Ok(out)
}

/// Length of the geodesic over `[0, τ]`.
pub fn m4_arclength(params: &M4GeodesicParams, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(GeoError::InvalidParameter(format!("tau must be >= 0, got {tau}")));
    }
    Ok(params.speed() * tau)
}

/// `J₁ = a₁₁(τ+B₁)`, `J_i = (a₁ᵢ + a₂ᵢτ) e^{B_i τ}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct M4JacobiConstants {
    pub a11: f64,
    /// `a₁ᵢ` for i = 2, 3, 4.
    pub a1: [f64; 3],
    /// `a₂ᵢ` for i = 2, 3, 4.
    pub a2: [f64; 3],
}

impl M4JacobiConstants {
    /// Constants of the Jacobi field with coordinate data `J(0)`, `J̇(0)`.
    ///
    /// `J₁` only has one free constant, so `J̇₁(0)` must equal `J₁(0)/B₁`.
    pub fn from_initial(params: &M4GeodesicParams, j0: &[f64], jdot0: &[f64]) -> Result<Self> {
        if j0.len() != 4 || jdot0.len() != 4 {
            return Err(GeoError::DimensionMismatch { expected: 4, got: j0.len().min(jdot0.len()) });
        }
        let b1 = params.coef_b[0];
        let a11 = jdot0[0];
        if (a11 * b1 - j0[0]).abs() > 1e-12 * (1.0 + j0[0].abs()) {
            return Err(GeoError::InvalidParameter(format!(
                "J1(0) = {} is not a11*B1 = {}",
                j0[0],
                a11 * b1
            )));
        }
        let mut a1 = [0.0; 3];
        let mut a2 = [0.0; 3];
        for i in 0..3 {
            a1[i] = j0[i + 1];
            a2[i] = jdot0[i + 1] - params.coef_b[i + 1] * j0[i + 1];
        }
        Ok(M4JacobiConstants { a11, a1, a2 })
    }
}

/// Coordinate components of the closed-form Jacobi field.
pub fn m4_jacobi(params: &M4GeodesicParams, c: &M4JacobiConstants, tau: f64) -> Result<Vec<f64>> {
    m4_geodesic(params, tau)?;
    let mut j = vec![c.a11 * (tau + params.coef_b[0])];
    for i in 0..3 {
        j.push((c.a1[i] + c.a2[i] * tau) * (params.coef_b[i + 1] * tau).exp());
    }
    Ok(j)
}

/// τ-derivative of [`m4_jacobi`].
pub fn m4_jacobi_rate(params: &M4GeodesicParams, c: &M4JacobiConstants, tau: f64) -> Result<Vec<f64>> {
    m4_geodesic(params, tau)?;
    let mut j = vec![c.a11];
    for i in 0..3 {
        let bi = params.coef_b[i + 1];
        j.push((c.a2[i] + bi * (c.a1[i] + c.a2[i] * tau)) * (bi * tau).exp());
    }
    Ok(j)
}

/// `g_ij J^i J^j = a₁₁²/A₁ + Σ ((a₁ᵢ + a₂ᵢτ)/A_i)²`, with `b²` on the Weibull term.
pub fn m4_jacobi_norm_sq(params: &M4GeodesicParams, c: &M4JacobiConstants, tau: f64) -> f64 {
    let mut s = c.a11 * c.a11 / params.coef_a[0];
    for i in 0..3 {
        let w = if i == 2 { params.b * params.b } else { 1.0 };
        let q = (c.a1[i] + c.a2[i] * tau) / params.coef_a[i + 1];
        s += w * q * q;
    }
    s
}

/// Length difference after τ between the geodesic and the one with `A₁ + δ`.
pub fn m4_length_divergence(params: &M4GeodesicParams, delta: f64, tau: f64) -> f64 {
    let s = params.transverse_speed_sq();
    let a1 = params.coef_a[0];
    ((4.0 * (a1 + delta) + s).sqrt() - (4.0 * a1 + s).sqrt()).abs() * tau
}

/// Riemannian volume of the coordinate box `[θ(0), θ(τ)]`, from the volume
/// element `b/(√θ₁ θ₂ θ₃ θ₄)`: `2√A₁(|τ+B₁| − |B₁|) · b B₂B₃B₄ τ³`.
pub fn m4_volume_region(params: &M4GeodesicParams, tau: f64) -> f64 {
    let [b1, b2, b3, b4] = params.coef_b;
    let first = 2.0 * params.coef_a[0].sqrt() * ((tau + b1).abs() - b1.abs());
    first * params.b * (b2 * tau) * (b3 * tau) * (b4 * tau)
}

/// `(1/τ)∫₀^τ` of [`m4_volume_region`], for windows on which `t + B₁` keeps its sign.
pub fn m4_average_volume(params: &M4GeodesicParams, tau: f64) -> f64 {
    let [b1, b2, b3, b4] = params.coef_b;
    let sign = if b1 >= 0.0 { 1.0 } else { -1.0 };
    2.0 * params.coef_a[0].sqrt() * sign * params.b * b2 * b3 * b4 * tau.powi(4) / 5.0
}

/// The published volume display `2√A₁ B₂B₃B₄ (τ+B₁) τ³`.
pub fn m4_volume_region_printed(params: &M4GeodesicParams, tau: f64) -> f64 {
    let [b1, b2, b3, b4] = params.coef_b;
    2.0 * params.coef_a[0].sqrt() * b2 * b3 * b4 * (tau + b1) * tau.powi(3)
}

/// The published average-volume display `2√A₁ B₂B₃B₄ (τ/5 + B₁/4) τ³`.
pub fn m4_average_volume_printed(params: &M4GeodesicParams, tau: f64) -> f64 {
    let [b1, b2, b3, b4] = params.coef_b;
    2.0 * params.coef_a[0].sqrt() * b2 * b3 * b4 * (tau / 5.0 + b1 / 4.0) * tau.powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> M4GeodesicParams {
        M4GeodesicParams::new([1.0; 4], [0.0; 4], 1.0, 1.0).unwrap()
    }

    #[test]
    fn evaluation_at_two() {
        let (p, v) = m4_geodesic(&unit(), 2.0).unwrap();
        assert_eq!(p.coords(), &[4.0, 1.0, 1.0, 1.0]);
        assert_eq!(v, vec![4.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn evaluation_at_origin() {
        let p = M4GeodesicParams::new([1.5, 1.0, 1.0, 1.0], [1.0, 0.2, 0.3, 0.4], 1.0, 1.0).unwrap();
        let (pt, _) = m4_geodesic(&p, 0.0).unwrap();
        assert_eq!(pt.coords()[0], 1.5);
    }

    #[test]
    fn arclength_values() {
        let p = M4GeodesicParams::new([1.0; 4], [0.0, 1.0, 1.0, 1.0], 1.0, 2.0).unwrap();
        assert!((m4_arclength(&p, 3.0).unwrap() - 10f64.sqrt() * 3.0).abs() < 1e-14);
        assert!((m4_arclength(&unit(), 3.0).unwrap() - 6.0).abs() < 1e-15);
        assert!(m4_arclength(&unit(), -1.0).is_err());
    }

    #[test]
    fn geodesic_residual_vanishes() {
        let p = M4GeodesicParams::new([0.7, 1.3, 0.4, 2.0], [0.9, 0.3, -0.2, 0.5], 1.0, 2.0).unwrap();
        for k in 0..50 {
            let r = m4_geodesic_residual(&p, k as f64 * 0.1).unwrap();
            assert!(r.iter().all(|x| x.abs() < 1e-10), "{r:?}");
        }
    }

    #[test]
    fn leaves_domain_when_theta1_hits_zero() {
        let p = M4GeodesicParams::new([1.0; 4], [-1.0, 0.0, 0.0, 0.0], 1.0, 1.0).unwrap();
        assert!(matches!(m4_geodesic(&p, 1.0), Err(GeoError::OutOfDomain { .. })));
    }

    #[test]
    fn initial_data_round_trip() {
        let p = M4GeodesicParams::new([0.7, 1.3, 0.4, 2.0], [0.9, 0.3, -0.2, 0.5], 1.0, 2.0).unwrap();
        let (p0, v0) = m4_geodesic(&p, 0.0).unwrap();
        let q = M4GeodesicParams::from_initial(p0.coords(), &v0, 1.0, 2.0).unwrap();
        for i in 0..4 {
            assert!((q.coef_a[i] - p.coef_a[i]).abs() < 1e-14);
            assert!((q.coef_b[i] - p.coef_b[i]).abs() < 1e-14);
        }
        assert!(M4GeodesicParams::from_initial(&[1.0; 4], &[0.0, 1.0, 1.0, 1.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn jacobi_norm_constant_for_first_component() {
        let c = M4JacobiConstants { a11: 1.0, ..Default::default() };
        for t in [0.0, 1.0, 7.5] {
            assert!((m4_jacobi_norm_sq(&unit(), &c, t) - 1.0).abs() < 1e-15);
        }
        let j = m4_jacobi(&unit(), &M4JacobiConstants::default(), 2.0).unwrap();
        assert!(j.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn jacobi_norm_matches_metric_contraction() {
        let p = M4GeodesicParams::new([0.7, 1.3, 0.4, 2.0], [0.9, 0.3, -0.2, 0.5], 1.0, 2.0).unwrap();
        let c = M4JacobiConstants { a11: 0.3, a1: [0.2, -0.4, 1.0], a2: [1.0, 0.5, -0.3] };
        let tau = 1.7;
        let (pt, _) = m4_geodesic(&p, tau).unwrap();
        let th = pt.coords();
        let j = m4_jacobi(&p, &c, tau).unwrap();
        let g = [1.0 / th[0], 1.0 / th[1].powi(2), 1.0 / th[2].powi(2), 4.0 / th[3].powi(2)];
        let direct: f64 = (0..4).map(|i| g[i] * j[i] * j[i]).sum();
        assert!((direct - m4_jacobi_norm_sq(&p, &c, tau)).abs() < 1e-12 * direct);
    }

    #[test]
    fn jacobi_rate_matches_difference_quotient() {
        let p = M4GeodesicParams::new([0.7, 1.3, 0.4, 2.0], [0.9, 0.3, -0.2, 0.5], 1.0, 2.0).unwrap();
        let c = M4JacobiConstants { a11: 0.3, a1: [0.2, -0.4, 1.0], a2: [1.0, 0.5, -0.3] };
        let h = 1e-5;
        let lo = m4_jacobi(&p, &c, 1.0 - h).unwrap();
        let hi = m4_jacobi(&p, &c, 1.0 + h).unwrap();
        let r = m4_jacobi_rate(&p, &c, 1.0).unwrap();
        for i in 0..4 {
            assert!(((hi[i] - lo[i]) / (2.0 * h) - r[i]).abs() < 1e-8);
        }
        let back = M4JacobiConstants::from_initial(&p, &m4_jacobi(&p, &c, 0.0).unwrap(), &m4_jacobi_rate(&p, &c, 0.0).unwrap()).unwrap();
        assert!((back.a11 - c.a11).abs() < 1e-14);
        for i in 0..3 {
            assert!((back.a1[i] - c.a1[i]).abs() < 1e-14 && (back.a2[i] - c.a2[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn divergence_is_linear() {
        let p = unit();
        let d1 = m4_length_divergence(&p, 0.1, 1.0);
        assert!((m4_length_divergence(&p, 0.1, 10.0) - 10.0 * d1).abs() < 1e-12);
        assert!(d1 > 0.0);
    }

    #[test]
    fn printed_and_derived_volumes_agree_in_special_case() {
        let p = M4GeodesicParams::new([2.0, 1.0, 1.0, 1.0], [0.0, 0.3, 0.2, 0.1], 1.0, 1.0).unwrap();
        for t in [0.5, 1.0, 2.0] {
            assert!((m4_volume_region(&p, t) - m4_volume_region_printed(&p, t)).abs() < 1e-14);
            assert!((m4_average_volume(&p, t) - m4_average_volume_printed(&p, t)).abs() < 1e-14);
        }
        let q = M4GeodesicParams::new([2.0, 1.0, 1.0, 1.0], [0.5, 0.3, 0.2, 0.1], 1.0, 2.0).unwrap();
        assert!((m4_volume_region(&q, 1.0) - m4_volume_region_printed(&q, 1.0)).abs() > 1e-3);
        assert_eq!(m4_volume_region(&q, 0.0), 0.0);
    }
}
