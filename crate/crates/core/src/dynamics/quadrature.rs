//! Composite quadrature for arc lengths, box volumes and averages.

use serde::{Deserialize, Serialize};

use super::geodesic::{Curve, Trajectory};
use crate::error::{GeoError, Result};
use crate::manifold::{volume_element_at, ManifoldSpec, Point};

/// Refinement stops at this many panels even if the tolerance is not met.
const MAX_PANELS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    Trapezoid,
    Simpson,
    /// Gauss-Legendre with the given number of nodes per panel.
    GaussLegendre(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
    pub panels: usize,
    /// When positive, panels are doubled until successive estimates agree to
    /// this relative tolerance.
    pub tolerance: f64,
}

impl QuadratureSpec {
    pub fn new(rule: QuadratureRule, panels: usize) -> Result<Self> {
        let q = QuadratureSpec { rule, panels, tolerance: 0.0 };
        q.validate()?;
        Ok(q)
    }

    pub fn simpson(panels: usize) -> Self {
        QuadratureSpec { rule: QuadratureRule::Simpson, panels, tolerance: 0.0 }
    }

    pub fn gauss_legendre(nodes: usize, panels: usize) -> Self {
        QuadratureSpec { rule: QuadratureRule::GaussLegendre(nodes), panels, tolerance: 0.0 }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.panels < 1 {
            return Err(GeoError::InvalidParameter("quadrature needs at least one panel".into()));
        }
        if let QuadratureRule::GaussLegendre(n) = self.rule {
            if !(1..=64).contains(&n) {
                return Err(GeoError::InvalidParameter(format!("Gauss-Legendre order {n} outside 1..=64")));
            }
        }
        if !(self.tolerance >= 0.0) {
            return Err(GeoError::InvalidParameter("tolerance must be >= 0".into()));
        }
        Ok(())
    }

    /// Nodes and weights on `[a, b]` (signed; `b < a` flips the weights).
    pub fn nodes(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let n = self.panels;
        let h = (b - a) / n as f64;
        let mut out = Vec::new();
        match self.rule {
            QuadratureRule::Trapezoid => {
                for k in 0..=n {
                    let w = if k == 0 || k == n { 0.5 * h } else { h };
                    out.push((a + k as f64 * h, w));
                }
            }
            QuadratureRule::Simpson => {
                for k in 0..=2 * n {
                    let w = if k == 0 || k == 2 * n {
                        h / 6.0
                    } else if k % 2 == 1 {
                        4.0 * h / 6.0
                    } else {
                        2.0 * h / 6.0
                    };
                    out.push((a + k as f64 * 0.5 * h, w));
                }
            }
            QuadratureRule::GaussLegendre(m) => {
                let (x, w) = gauss_legendre(m);
                for k in 0..n {
                    let mid = a + (k as f64 + 0.5) * h;
                    for (xi, wi) in x.iter().zip(&w) {
                        out.push((mid + 0.5 * h * xi, 0.5 * h * wi));
                    }
                }
            }
        }
        out
    }

    fn doubled(&self) -> Self {
        QuadratureSpec { panels: self.panels * 2, ..*self }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::gauss_legendre(8, 16)
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn with_refinement(q: &QuadratureSpec, mut f: impl FnMut(&QuadratureSpec) -> Result<f64>) -> Result<f64> {
    q.validate()?;
    let mut cur = *q;
    let mut val = f(&cur)?;
    if q.tolerance == 0.0 {
        return Ok(val);
    }
    while cur.panels < MAX_PANELS {
        cur = cur.doubled();
        let next = f(&cur)?;
        let done = (next - val).abs() <= q.tolerance * next.abs().max(1e-300);
        val = next;
        if done {
            break;
        }
    }
    Ok(val)
}

/// `∫_a^b f`.
pub fn integrate_1d(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, q: &QuadratureSpec) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    with_refinement(q, |q| {
        let mut s = 0.0;
        for (x, w) in q.nodes(a, b) {
            s += w * f(x)?;
        }
        Ok(s)
    })
}

/// Length `∫ √(g(θ̇, θ̇)) dτ` of a curve over `[0, τ_max]`.
pub fn arc_length_curve(spec: &ManifoldSpec, curve: &impl Curve, tau_max: f64, q: &QuadratureSpec) -> Result<f64> {
    integrate_1d(
        |t| {
            let (p, v) = curve.eval(t)?;
            Ok(spec.metric_at(&p)?.inner(&v, &v).max(0.0).sqrt())
        },
        0.0,
        tau_max,
        q,
    )
}

/// Length of a numerically integrated trajectory, using Hermite
/// interpolation between its nodes.
pub fn arc_length(spec: &ManifoldSpec, traj: &Trajectory, q: &QuadratureSpec) -> Result<f64> {
    if traj.len() < 2 {
        return Ok(0.0);
    }
    let t0 = traj.tau[0];
    integrate_1d(
        |t| {
            let (p, v) = traj.interpolate(t0 + t)?;
            Ok(spec.metric_at(&p)?.inner(&v, &v).max(0.0).sqrt())
        },
        0.0,
        traj.tau_max() - t0,
        q,
    )
}

/// `∫ √det g` over the coordinate box with corners `lo`, `hi`, by tensor-product
/// quadrature. Reversed edges contribute a negative orientation.
pub fn volume_region(spec: &ManifoldSpec, lo: &Point, hi: &Point, q: &QuadratureSpec) -> Result<f64> {
    let n = spec.dim();
    if lo.dim() != n || hi.dim() != n {
        return Err(GeoError::DimensionMismatch {
            expected: n,
            got: if lo.dim() != n { lo.dim() } else { hi.dim() },
        });
    }
    if lo.coords().iter().zip(hi.coords()).any(|(a, b)| a == b) {
        return Ok(0.0);
    }
    spec.check(lo)?;
    spec.check(hi)?;
    with_refinement(q, |q| {
        let axes: Vec<Vec<(f64, f64)>> = (0..n).map(|k| q.nodes(lo.coords()[k], hi.coords()[k])).collect();
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        let mut total = 0.0;
        loop {
            let mut w = 1.0;
            for k in 0..n {
                let (xk, wk) = axes[k][idx[k]];
                x[k] = xk;
                w *= wk;
            }
            total += w * volume_element_at(spec, &Point::from_slice(&x)?)?;
            let mut k = 0;
            loop {
                if k == n {
                    return Ok(total);
                }
                idx[k] += 1;
                if idx[k] < axes[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    })
}

/// Box volume for a separable volume element `√g(x) = Π f_k(x_k)`, from one
/// line integral per axis through `lo`:
/// `V = Π_k ∫ √g(lo; x_k = t) dt / √g(lo)^{n−1}`.
pub fn volume_region_separable(spec: &ManifoldSpec, lo: &Point, hi: &Point, q: &QuadratureSpec) -> Result<f64> {
    let n = spec.dim();
    if lo.dim() != n || hi.dim() != n {
        return Err(GeoError::DimensionMismatch { expected: n, got: lo.dim().min(hi.dim()) });
    }
    if lo.coords().iter().zip(hi.coords()).any(|(a, b)| a == b) {
        return Ok(0.0);
    }
    spec.check(lo)?;
    spec.check(hi)?;
    let v0 = volume_element_at(spec, lo)?;
    let mut prod = 1.0;
    for k in 0..n {
        let line = integrate_1d(
            |t| {
                let mut c = lo.coords().to_vec();
                c[k] = t;
                volume_element_at(spec, &Point::new(c)?)
            },
            lo.coords()[k],
            hi.coords()[k],
            q,
        )?;
        prod *= line / v0;
    }
    Ok(prod * v0)
}

/// `(1/τ_max) ∫₀^{τ_max} region(t) dt`.
pub fn average_volume(region: impl FnMut(f64) -> Result<f64>, tau_max: f64, q: &QuadratureSpec) -> Result<f64> {
    if !(tau_max > 0.0) {
        return Err(GeoError::InvalidParameter(format!("tau_max must be > 0, got {tau_max}")));
    }
    Ok(integrate_1d(region, 0.0, tau_max, q)? / tau_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_nodes_integrate_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            // exact for degree 2n-1
            let deg = 2 * n - 2;
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((s - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn rules_on_exponential() {
        let exact = 1f64.exp() - 1.0;
        for rule in [QuadratureRule::Trapezoid, QuadratureRule::Simpson, QuadratureRule::GaussLegendre(4)] {
            let q = QuadratureSpec::new(rule, 64).unwrap();
            let v = integrate_1d(|x| Ok(x.exp()), 0.0, 1.0, &q).unwrap();
            assert!((v - exact).abs() < 1e-4, "{rule:?}");
        }
        let v = integrate_1d(|x| Ok(x.exp()), 1.0, 0.0, &QuadratureSpec::simpson(8)).unwrap();
        assert!((v + exact).abs() < 1e-6);
    }

    #[test]
    fn tolerance_refines() {
        let q = QuadratureSpec::new(QuadratureRule::Trapezoid, 1).unwrap().with_tolerance(1e-10);
        let v = integrate_1d(|x| Ok(x.sin()), 0.0, 3.0, &q).unwrap();
        assert!((v - (1.0 - 3f64.cos())).abs() < 1e-8);
    }

    #[test]
    fn simpson_is_fourth_order() {
        let f = |x: f64| Ok(1.0 / (1.0 + x * x));
        let exact = 2f64.atan();
        let e1 = (integrate_1d(f, 0.0, 2.0, &QuadratureSpec::simpson(8)).unwrap() - exact).abs();
        let e2 = (integrate_1d(f, 0.0, 2.0, &QuadratureSpec::simpson(16)).unwrap() - exact).abs();
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "{ratio}");
    }

    #[test]
    fn invalid_spec() {
        assert!(QuadratureSpec::new(QuadratureRule::Simpson, 0).is_err());
        assert!(QuadratureSpec::new(QuadratureRule::GaussLegendre(0), 1).is_err());
    }

    #[test]
    fn euclidean_box_volume() {
        let spec = ManifoldSpec::euclidean(3);
        let lo = Point::from_slice(&[0.0, 0.0, 0.0]).unwrap();
        let hi = Point::from_slice(&[1.0, -2.0, 3.0]).unwrap();
        let q = QuadratureSpec::gauss_legendre(2, 1);
        assert!((volume_region(&spec, &lo, &hi, &q).unwrap() + 6.0).abs() < 1e-14);
        assert!((volume_region_separable(&spec, &lo, &hi, &q).unwrap() + 6.0).abs() < 1e-14);
        let flat = Point::from_slice(&[1.0, 0.0, 3.0]).unwrap();
        assert_eq!(volume_region(&spec, &lo, &flat, &q).unwrap(), 0.0);
    }

    #[test]
    fn average_of_zero_is_zero() {
        assert_eq!(average_volume(|_| Ok(0.0), 2.0, &QuadratureSpec::default()).unwrap(), 0.0);
        assert!(average_volume(|_| Ok(0.0), 0.0, &QuadratureSpec::default()).is_err());
    }
}
