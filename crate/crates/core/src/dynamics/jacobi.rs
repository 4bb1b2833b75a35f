//! Jacobi fields along geodesics: propagation of the geodesic-deviation
//! equation and the finite-difference deviation oracle.

use super::geodesic::{geodesic_rhs, integrate_geodesic, rk4_step, Trajectory};
use crate::error::{GeoError, Result};
use crate::manifold::{
    christoffel_at, connection_derivative_at, curvature_at, curvature_from_connection, ManifoldSpec, Point,
    RiemannTensor,
};

/// Central-difference parameter for [`geodesic_deviation_fd`].
pub const DEVIATION_EPSILON: f64 = 1e-4;

/// A Jacobi field sampled on the grid of its base geodesic.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiTrajectory {
    pub base: Trajectory,
    pub j: Vec<Vec<f64>>,
    /// Coordinate derivative `dJ/dτ`.
    pub jdot: Vec<Vec<f64>>,
    /// Covariant derivative `DJ/dτ = dJ/dτ + Γ(J, θ̇)`.
    pub dj: Vec<Vec<f64>>,
}

impl JacobiTrajectory {
    pub fn tau(&self) -> &[f64] {
        &self.base.tau
    }
}

fn riemann_for_jacobi(spec: &ManifoldSpec, p: &Point) -> Result<RiemannTensor> {
    if spec.has_analytic_curvature() {
        Ok(curvature_at(spec, p)?.riemann)
    } else {
        Ok(curvature_from_connection(spec, p)?.riemann)
    }
}

/// `J̈` from the expanded deviation equation
/// `J̈^i = −2Γ^i_jk J̇^j θ̇^k − Γ^i_jk J^j θ̈^k − ∂_hΓ^i_jk θ̇^h θ̇^k J^j
///        − Γ^i_jk Γ^j_ts θ̇^s θ̇^k J^t + R^i_jlk θ̇^j θ̇^l J^k`.
pub fn jacobi_acceleration(spec: &ManifoldSpec, p: &Point, v: &[f64], j: &[f64], jdot: &[f64]) -> Result<Vec<f64>> {
    let n = spec.dim();
    let gam = christoffel_at(spec, p)?;
    let dgam = connection_derivative_at(spec, p)?;
    let riem = riemann_for_jacobi(spec, p)?;
    let acc: Vec<f64> = gam.contract(v, v).into_iter().map(|a| -a).collect();
    // Γ^j_ts θ̇^s J^t, i.e. the connection part of DJ
    let gjv = gam.contract(j, v);
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                let g = gam.get(i, a, b);
                if g != 0.0 {
                    s -= g * (2.0 * jdot[a] * v[b] + j[a] * acc[b] + gjv[a] * v[b]);
                }
                let mut dv = 0.0;
                for h in 0..n {
                    dv += dgam.get(h, i, a, b) * v[h];
                }
                s -= dv * v[b] * j[a];
                for c in 0..n {
                    s += riem.mixed(i, a, b, c) * v[a] * v[b] * j[c];
                }
            }
        }
        out[i] = s;
    }
    Ok(out)
}

/// `DJ/dτ = J̇ + Γ(J, θ̇)`.
pub fn covariant_derivative(spec: &ManifoldSpec, p: &Point, v: &[f64], j: &[f64], jdot: &[f64]) -> Result<Vec<f64>> {
    let g = christoffel_at(spec, p)?.contract(j, v);
    Ok(jdot.iter().zip(g).map(|(a, b)| a + b).collect())
}

/// Propagates the Jacobi field with `J(0) = j0`, `DJ/dτ(0) = dj0` along `base`.
///
/// The geodesic and the field are advanced together with the same RK4 steps,
/// so for a trajectory produced by [`integrate_geodesic`] the recomputed base
/// is identical to the stored one.
pub fn integrate_jacobi(spec: &ManifoldSpec, base: &Trajectory, j0: &[f64], dj0: &[f64]) -> Result<JacobiTrajectory> {
    let n = spec.dim();
    if base.dim() != n || j0.len() != n || dj0.len() != n {
        return Err(GeoError::DimensionMismatch {
            expected: n,
            got: [base.dim(), j0.len(), dj0.len()].into_iter().find(|&d| d != n).unwrap_or(n),
        });
    }
    if base.is_empty() {
        return Err(GeoError::InsufficientData { got: 0, needed: 1 });
    }
    let p0 = &base.points[0];
    let v0 = &base.velocities[0];
    let g0 = christoffel_at(spec, p0)?.contract(j0, v0);
    let jdot0: Vec<f64> = dj0.iter().zip(g0).map(|(a, b)| a - b).collect();

    let mut y: Vec<f64> = p0.coords().iter().chain(v0).chain(j0).chain(&jdot0).copied().collect();
    let mut rhs = |_t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let mut out = geodesic_rhs(spec, &y[..2 * n])?;
        let p = Point::from_slice(&y[..n])?;
        let (v, j, jd) = (&y[n..2 * n], &y[2 * n..3 * n], &y[3 * n..]);
        out.extend_from_slice(jd);
        out.extend(jacobi_acceleration(spec, &p, v, j, jd)?);
        Ok(out)
    };
    let mut js = vec![j0.to_vec()];
    let mut jdots = vec![jdot0];
    for w in base.tau.windows(2) {
        y = rk4_step(&mut rhs, w[0], &y, w[1] - w[0])?;
        js.push(y[2 * n..3 * n].to_vec());
        jdots.push(y[3 * n..].to_vec());
    }
    finish(spec, base.clone(), js, jdots)
}

fn finish(spec: &ManifoldSpec, base: Trajectory, j: Vec<Vec<f64>>, jdot: Vec<Vec<f64>>) -> Result<JacobiTrajectory> {
    let dj = base
        .points
        .iter()
        .zip(&base.velocities)
        .zip(j.iter().zip(&jdot))
        .map(|((p, v), (jj, jd))| covariant_derivative(spec, p, v, jj, jd))
        .collect::<Result<Vec<_>>>()?;
    Ok(JacobiTrajectory { base, j, jdot, dj })
}

/// Jacobi field of the geodesic family through `(p0 + s δp, v0 + s δv)`,
/// approximated by `(γ_{+ε} − γ_{−ε})/2ε`.
#[allow(clippy::too_many_arguments)]
pub fn geodesic_deviation_fd(
    spec: &ManifoldSpec,
    p0: &Point,
    v0: &[f64],
    dp: &[f64],
    dv: &[f64],
    tau_max: f64,
    step: f64,
    eps: f64,
) -> Result<JacobiTrajectory> {
    let n = spec.dim();
    if dp.len() != n || dv.len() != n {
        return Err(GeoError::DimensionMismatch {
            expected: n,
            got: if dp.len() != n { dp.len() } else { dv.len() },
        });
    }
    if !(eps > 0.0) {
        return Err(GeoError::InvalidParameter(format!("epsilon must be > 0, got {eps}")));
    }
    let base = integrate_geodesic(spec, p0, v0, tau_max, step)?;
    let shift = |s: f64| -> Result<(Point, Vec<f64>)> {
        let p = Point::new(p0.coords().iter().zip(dp).map(|(x, d)| x + s * d).collect())?;
        let v = v0.iter().zip(dv).map(|(x, d)| x + s * d).collect();
        Ok((p, v))
    };
    let (pp, vp) = shift(eps)?;
    let (pm, vm) = shift(-eps)?;
    let plus = integrate_geodesic(spec, &pp, &vp, tau_max, step)?;
    let minus = integrate_geodesic(spec, &pm, &vm, tau_max, step)?;
    let diff = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| (x - y) / (2.0 * eps)).collect() };
    let j = plus.points.iter().zip(&minus.points).map(|(a, b)| diff(a.coords(), b.coords())).collect();
    let jdot = plus.velocities.iter().zip(&minus.velocities).map(|(a, b)| diff(a, b)).collect();
    finish(spec, base, j, jdot)
}

/// `(τ, g_ij J^i J^j)` at each node.
pub fn jacobi_norm_sq(spec: &ManifoldSpec, base: &Trajectory, jac: &JacobiTrajectory) -> Result<Vec<(f64, f64)>> {
    if base.len() != jac.j.len() {
        return Err(GeoError::DimensionMismatch {
            expected: base.len(),
            got: jac.j.len(),
        });
    }
    base.points
        .iter()
        .zip(&jac.j)
        .zip(&base.tau)
        .map(|((p, j), &t)| Ok((t, spec.metric_at(p)?.inner(j, j))))
        .collect()
}

/// Largest `|a − b|` over all components, divided by the largest `|b|`.
pub fn sup_relative_difference(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut num = 0.0_f64;
    let mut den = 0.0_f64;
    for (x, y) in a.iter().zip(b) {
        for (u, w) in x.iter().zip(y) {
            num = num.max((u - w).abs());
            den = den.max(w.abs());
        }
    }
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_m4, gauss_geodesic, gauss_manifold, m4_geodesic, GaussGeodesicParams, M4GeodesicParams};

    #[test]
    fn velocity_is_a_jacobi_field() {
        let params = GaussGeodesicParams::new(1.0, 1.0, 0.5).unwrap();
        let spec = gauss_manifold(0.5).unwrap();
        let (p0, v0) = gauss_geodesic(&params, 0.0).unwrap();
        let base = integrate_geodesic(&spec, &p0, &v0, 3.0, 1e-3).unwrap();
        let jac = integrate_jacobi(&spec, &base, &v0, &[0.0; 3]).unwrap();
        assert!(sup_relative_difference(&jac.j, &base.velocities) < 1e-9);
    }

    #[test]
    fn zero_data_gives_zero_field() {
        let spec = build_m4(1.0, 2.0).unwrap().spec();
        let params = M4GeodesicParams::new([1.0; 4], [1.0; 4], 1.0, 2.0).unwrap();
        let (p0, v0) = m4_geodesic(&params, 0.0).unwrap();
        let base = integrate_geodesic(&spec, &p0, &v0, 1.0, 1e-2).unwrap();
        let jac = integrate_jacobi(&spec, &base, &[0.0; 4], &[0.0; 4]).unwrap();
        assert!(jac.j.iter().flatten().all(|&x| x == 0.0));
        let fd = geodesic_deviation_fd(&spec, &p0, &v0, &[0.0; 4], &[0.0; 4], 1.0, 1e-2, 1e-4).unwrap();
        assert!(fd.j.iter().flatten().all(|&x| x == 0.0));
        let n = jacobi_norm_sq(&spec, &base, &jac).unwrap();
        assert!(n.iter().all(|&(_, y)| y == 0.0));
    }

    #[test]
    fn propagation_agrees_with_deviation_on_gauss() {
        let params = GaussGeodesicParams::new(1.0, 1.0, 0.5).unwrap();
        let spec = gauss_manifold(0.5).unwrap();
        let (p0, v0) = gauss_geodesic(&params, 0.0).unwrap();
        let dp = [0.3, -0.2, 0.1];
        let dv = [0.05, 0.1, -0.2];
        let fd = geodesic_deviation_fd(&spec, &p0, &v0, &dp, &dv, 3.0, 1e-3, 1e-4).unwrap();
        // convert the coordinate perturbation of the velocity into DJ(0)
        let dj0 = covariant_derivative(&spec, &p0, &v0, &dp, &dv).unwrap();
        let jac = integrate_jacobi(&spec, &fd.base, &dp, &dj0).unwrap();
        let d = sup_relative_difference(&jac.j, &fd.j);
        assert!(d < 1e-4, "{d}");
    }
}
