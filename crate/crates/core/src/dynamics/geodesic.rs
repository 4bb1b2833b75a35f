//! Fixed-step RK4 geodesic integration.

use crate::error::{GeoError, Result};
use crate::manifold::{christoffel_at, ManifoldSpec, Point};

/// Relative drift of `g(θ̇, θ̇)` tolerated along an accepted trajectory.
pub const SPEED_DRIFT_LIMIT: f64 = 1e-8;

/// One classical fourth-order Runge-Kutta step of `ẏ = f(t, y)`.
pub fn rk4_step<F>(f: &mut F, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let axpy = |a: f64, k: &[f64]| -> Vec<f64> { y.iter().zip(k).map(|(y, k)| y + a * k).collect() };
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &axpy(0.5 * h, &k1))?;
    let k3 = f(t + 0.5 * h, &axpy(0.5 * h, &k2))?;
    let k4 = f(t + h, &axpy(h, &k3))?;
    Ok((0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// A sampled solution of the geodesic equations.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub spec_name: String,
    pub tau: Vec<f64>,
    pub points: Vec<Point>,
    pub velocities: Vec<Vec<f64>>,
    pub method: String,
    pub step: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Point::dim)
    }

    pub fn tau_max(&self) -> f64 {
        self.tau.last().copied().unwrap_or(0.0)
    }

    /// Squared speed `g(θ̇, θ̇)` at every node.
    pub fn speed_sq(&self, spec: &ManifoldSpec) -> Result<Vec<f64>> {
        self.points
            .iter()
            .zip(&self.velocities)
            .map(|(p, v)| Ok(spec.metric_at(p)?.inner(v, v)))
            .collect()
    }

    /// Largest relative deviation of the squared speed from its initial value.
    pub fn speed_drift(&self, spec: &ManifoldSpec) -> Result<f64> {
        let s = self.speed_sq(spec)?;
        let s0 = s.first().copied().unwrap_or(0.0);
        if s0 == 0.0 {
            return Ok(s.iter().fold(0.0_f64, |m, x| m.max(x.abs())));
        }
        Ok(s.iter().fold(0.0_f64, |m, x| m.max((x - s0).abs() / s0)))
    }

    /// Cubic Hermite interpolation of position and velocity between nodes.
    pub fn interpolate(&self, tau: f64) -> Result<(Point, Vec<f64>)> {
        let n = self.len();
        if n == 0 {
            return Err(GeoError::InsufficientData { got: 0, needed: 1 });
        }
        let (t0, t1) = (self.tau[0], self.tau[n - 1]);
        if !(tau >= t0 && tau <= t1) {
            return Err(GeoError::InvalidParameter(format!(
                "tau = {tau} outside trajectory range [{t0}, {t1}]"
            )));
        }
        if n == 1 {
            return Ok((self.points[0].clone(), self.velocities[0].clone()));
        }
        let k = match self.tau.binary_search_by(|x| x.total_cmp(&tau)) {
            Ok(i) => return Ok((self.points[i].clone(), self.velocities[i].clone())),
            Err(i) => i - 1,
        };
        let (ta, tb) = (self.tau[k], self.tau[k + 1]);
        let h = tb - ta;
        let s = (tau - ta) / h;
        let (pa, pb) = (self.points[k].coords(), self.points[k + 1].coords());
        let (va, vb) = (&self.velocities[k], &self.velocities[k + 1]);
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let d00 = (6.0 * s2 - 6.0 * s) / h;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / h;
        let d11 = 3.0 * s2 - 2.0 * s;
        let dim = pa.len();
        let p: Vec<f64> = (0..dim)
            .map(|i| h00 * pa[i] + h10 * h * va[i] + h01 * pb[i] + h11 * h * vb[i])
            .collect();
        let v: Vec<f64> = (0..dim)
            .map(|i| d00 * pa[i] + d10 * va[i] + d01 * pb[i] + d11 * vb[i])
            .collect();
        Ok((Point::new(p)?, v))
    }
}

/// Anything that can be evaluated as (point, velocity) at a parameter value.
pub trait Curve {
    fn eval(&self, tau: f64) -> Result<(Point, Vec<f64>)>;
}

impl<F> Curve for F
where
    F: Fn(f64) -> Result<(Point, Vec<f64>)>,
{
    fn eval(&self, tau: f64) -> Result<(Point, Vec<f64>)> {
        self(tau)
    }
}

impl Curve for Trajectory {
    fn eval(&self, tau: f64) -> Result<(Point, Vec<f64>)> {
        self.interpolate(tau)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    /// Relative speed-drift gate; `f64::INFINITY` disables it.
    pub speed_drift_limit: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            speed_drift_limit: SPEED_DRIFT_LIMIT,
        }
    }
}

/// `(θ, θ̇) ↦ (θ̇, −Γ(θ̇, θ̇))`.
pub(crate) fn geodesic_rhs(spec: &ManifoldSpec, y: &[f64]) -> Result<Vec<f64>> {
    let n = spec.dim();
    let p = Point::from_slice(&y[..n])?;
    let v = &y[n..2 * n];
    let acc = christoffel_at(spec, &p)?.contract(v, v);
    let mut out = v.to_vec();
    out.extend(acc.into_iter().map(|a| -a));
    Ok(out)
}

/// Uniform grid on `[0, τ_max]` whose spacing does not exceed `step`.
pub(crate) fn uniform_grid(tau_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(GeoError::InvalidParameter(format!("step must be > 0, got {step}")));
    }
    if !(tau_max > 0.0 && tau_max.is_finite()) {
        return Err(GeoError::InvalidParameter(format!("tau_max must be > 0, got {tau_max}")));
    }
    let n = ((tau_max / step) - 1e-9).ceil().max(1.0) as usize;
    let h = tau_max / n as f64;
    Ok((0..=n).map(|k| if k == n { tau_max } else { k as f64 * h }).collect())
}

/// Estimated parameter at which the straight continuation from the last
/// node leaves the domain, by bisection on `[0, h]`.
fn crossing_estimate(spec: &ManifoldSpec, p: &[f64], v: &[f64], t: f64, h: f64) -> f64 {
    let inside = |s: f64| {
        let q: Vec<f64> = p.iter().zip(v).map(|(x, d)| x + s * d).collect();
        spec.contains(&q)
    };
    if inside(h) {
        // the straight line stays inside; the curvature of the path took it out
        return t + h;
    }
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    t + 0.5 * (lo + hi)
}

/// Integrates `θ̈ + Γ(θ̇, θ̇) = 0` from `(p0, v0)` over `[0, τ_max]` with the
/// default speed-drift gate.
pub fn integrate_geodesic(spec: &ManifoldSpec, p0: &Point, v0: &[f64], tau_max: f64, step: f64) -> Result<Trajectory> {
    integrate_geodesic_with(spec, p0, v0, tau_max, step, IntegrationOptions::default())
}

pub fn integrate_geodesic_with(
    spec: &ManifoldSpec,
    p0: &Point,
    v0: &[f64],
    tau_max: f64,
    step: f64,
    opts: IntegrationOptions,
) -> Result<Trajectory> {
    let n = spec.dim();
    if p0.dim() != n || v0.len() != n {
        return Err(GeoError::DimensionMismatch {
            expected: n,
            got: if p0.dim() != n { p0.dim() } else { v0.len() },
        });
    }
    spec.check(p0)?;
    if v0.iter().any(|x| !x.is_finite()) {
        return Err(GeoError::InvalidParameter("initial velocity must be finite".into()));
    }
    let grid = uniform_grid(tau_max, step)?;
    let mut y: Vec<f64> = p0.coords().iter().chain(v0).copied().collect();
    let mut tau = vec![0.0];
    let mut points = vec![p0.clone()];
    let mut velocities = vec![v0.to_vec()];
    let mut rhs = |_t: f64, y: &[f64]| geodesic_rhs(spec, y);
    for w in grid.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        let next = rk4_step(&mut rhs, t, &y, h);
        let next = match next {
            Ok(v) if spec.contains(&v[..n]) && v.iter().all(|x| x.is_finite()) => v,
            Ok(_) | Err(GeoError::OutOfDomain { .. }) => {
                return Err(GeoError::LeftDomain {
                    last_tau: t,
                    crossing_estimate: crossing_estimate(spec, &y[..n], &y[n..], t, h),
                })
            }
            Err(e) => return Err(e),
        };
        y = next;
        tau.push(w[1]);
        points.push(Point::from_slice(&y[..n])?);
        velocities.push(y[n..].to_vec());
    }
    let traj = Trajectory {
        spec_name: spec.name().to_string(),
        tau,
        points,
        velocities,
        method: "rk4".into(),
        step: grid[1] - grid[0],
    };
    if opts.speed_drift_limit.is_finite() {
        let drift = traj.speed_drift(spec)?;
        if drift > opts.speed_drift_limit {
            return Err(GeoError::SpeedDriftExceeded {
                drift,
                limit: opts.speed_drift_limit,
            });
        }
    }
    Ok(traj)
}

/// Samples a closed-form curve on the grid of `like`.
pub fn sample_curve(curve: &impl Curve, name: &str, grid: &[f64]) -> Result<Trajectory> {
    let mut points = Vec::with_capacity(grid.len());
    let mut velocities = Vec::with_capacity(grid.len());
    for &t in grid {
        let (p, v) = curve.eval(t)?;
        points.push(p);
        velocities.push(v);
    }
    Ok(Trajectory {
        spec_name: name.to_string(),
        tau: grid.to_vec(),
        points,
        velocities,
        method: "closed-form".into(),
        step: if grid.len() > 1 { grid[1] - grid[0] } else { 0.0 },
    })
}

/// Largest relative error `|x − y| / max(|y|, floor)` over all coordinates of two aligned trajectories.
pub fn max_relative_error(a: &Trajectory, b: &Trajectory, floor: f64) -> f64 {
    let mut worst = 0.0_f64;
    for (pa, pb) in a.points.iter().zip(&b.points) {
        for (x, y) in pa.coords().iter().zip(pb.coords()) {
            worst = worst.max((x - y).abs() / y.abs().max(floor));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_m4, gauss_geodesic, m4_geodesic, GaussGeodesicParams, M4GeodesicParams};

    #[test]
    fn rk4_is_exact_for_cubics() {
        let mut f = |t: f64, _y: &[f64]| Ok(vec![3.0 * t * t]);
        let y = rk4_step(&mut f, 0.0, &[0.0], 2.0).unwrap();
        assert!((y[0] - 8.0).abs() < 1e-14);
    }

    #[test]
    fn grid_hits_endpoint() {
        let g = uniform_grid(1.0, 0.3).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(uniform_grid(5.0, 1e-3).unwrap().len(), 5001);
        assert!(uniform_grid(1.0, 0.0).is_err());
    }

    #[test]
    fn zero_velocity_is_stationary() {
        let spec = build_m4(1.0, 2.0).unwrap().spec();
        let p0 = Point::from_slice(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let t = integrate_geodesic(&spec, &p0, &[0.0; 4], 1.0, 0.1).unwrap();
        assert!(t.points.iter().all(|p| p == &p0));
    }

    #[test]
    fn m4_matches_closed_form() {
        let params = M4GeodesicParams::new([1.0; 4], [1.0; 4], 1.0, 2.0).unwrap();
        let spec = build_m4(1.0, 2.0).unwrap().spec();
        let (p0, v0) = m4_geodesic(&params, 0.0).unwrap();
        let traj = integrate_geodesic(&spec, &p0, &v0, 5.0, 1e-3).unwrap();
        let exact = sample_curve(&|t| m4_geodesic(&params, t), "m4", &traj.tau).unwrap();
        assert!(max_relative_error(&traj, &exact, 1e-300) < 1e-6);
    }

    #[test]
    fn gauss_matches_closed_form() {
        let params = GaussGeodesicParams::new(2.0, 1.0, 0.3).unwrap();
        let spec = crate::models::gauss_manifold(0.3).unwrap();
        let (p0, v0) = gauss_geodesic(&params, 0.0).unwrap();
        let traj = integrate_geodesic(&spec, &p0, &v0, 5.0, 1e-3).unwrap();
        let exact = sample_curve(&|t| gauss_geodesic(&params, t), "g", &traj.tau).unwrap();
        let err = traj
            .points
            .iter()
            .zip(&exact.points)
            .flat_map(|(a, b)| a.coords().iter().zip(b.coords()).map(|(x, y)| (x - y).abs()))
            .fold(0.0_f64, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn leaving_domain_is_reported() {
        // flat half-plane x > 0; the straight line x = 1 − τ exits at τ = 1
        let spec = ManifoldSpec::new(
            "half-plane",
            2,
            |c: &[f64]| c[0] > 0.0,
            |_p: &Point| Ok(crate::manifold::MetricTensor::identity(2)),
        );
        let p0 = Point::from_slice(&[1.0, 0.0]).unwrap();
        match integrate_geodesic(&spec, &p0, &[-1.0, 0.5], 2.0, 0.003) {
            Err(GeoError::LeftDomain { last_tau, crossing_estimate }) => {
                assert!(last_tau < 1.0 && last_tau > 0.99, "{last_tau}");
                assert!((crossing_estimate - 1.0).abs() < 1e-9, "{crossing_estimate}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coarse_step_trips_speed_gate() {
        let params = GaussGeodesicParams::new(2.0, 1.0, 0.3).unwrap();
        let spec = crate::models::gauss_manifold(0.3).unwrap();
        let (p0, v0) = gauss_geodesic(&params, 0.0).unwrap();
        assert!(matches!(
            integrate_geodesic(&spec, &p0, &v0, 5.0, 0.5),
            Err(GeoError::SpeedDriftExceeded { .. })
        ));
    }

    #[test]
    fn hermite_interpolation_is_fourth_order_accurate() {
        let params = GaussGeodesicParams::new(2.0, 1.0, 0.3).unwrap();
        let grid: Vec<f64> = (0..=50).map(|k| k as f64 * 0.1).collect();
        let traj = sample_curve(&|t| gauss_geodesic(&params, t), "g", &grid).unwrap();
        let (p, _) = traj.interpolate(1.234).unwrap();
        let (q, _) = gauss_geodesic(&params, 1.234).unwrap();
        for (a, b) in p.coords().iter().zip(q.coords()) {
            assert!((a - b).abs() < 1e-5);
        }
        assert!(traj.interpolate(6.0).is_err());
    }
}
