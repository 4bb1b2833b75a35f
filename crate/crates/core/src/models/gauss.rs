//! Bivariate Gaussian with known correlation `r`, coordinates `(μ_x, μ_y, σ)`.
//!
//! The Fisher metric is `(1/σ²)[[a, −ra, 0], [−ra, a, 0], [0, 0, 4]]` with
//! `a = 1/(1−r²)`. The manifold has constant sectional curvature −1/4.

use crate::error::{GeoError, Result};
use crate::manifold::{
    ChristoffelTensor, ConnectionDerivative, CurvatureReport, ManifoldSpec, MetricTensor, Point,
    RiemannTensor,
};

/// Sectional curvature of the correlated Gaussian manifold.
pub const GAUSS_SECTIONAL_CURVATURE: f64 = -0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussCorrManifold {
    r: f64,
}

impl GaussCorrManifold {
    pub fn new(r: f64) -> Result<Self> {
        if !(r.abs() < 1.0) {
            return Err(GeoError::InvalidParameter(format!("correlation must satisfy |r| < 1, got {r}")));
        }
        Ok(GaussCorrManifold { r })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn name(&self) -> String {
        format!("gauss(r={})", self.r)
    }

    pub fn contains(&self, c: &[f64]) -> bool {
        c.len() == 3 && c.iter().all(|x| x.is_finite()) && c[2] > 0.0
    }

    fn sigma(&self, p: &Point) -> Result<f64> {
        if p.dim() != 3 {
            return Err(GeoError::DimensionMismatch { expected: 3, got: p.dim() });
        }
        if !self.contains(p.coords()) {
            return Err(GeoError::OutOfDomain {
                manifold: self.name(),
                coords: p.coords().to_vec(),
            });
        }
        Ok(p.coords()[2])
    }

    pub fn metric(&self, p: &Point) -> Result<MetricTensor> {
        let s = self.sigma(p)?;
        Ok(metric_at_sigma(self.r, s))
    }

    pub fn inverse_metric(&self, p: &Point) -> Result<MetricTensor> {
        let s2 = self.sigma(p)?.powi(2);
        let r = self.r;
        Ok(MetricTensor::from_fn(3, |i, j| {
            s2 * match (i, j) {
                (0, 0) | (1, 1) => 1.0,
                (0, 1) | (1, 0) => r,
                (2, 2) => 0.25,
                _ => 0.0,
            }
        }))
    }

    pub fn christoffel(&self, p: &Point) -> Result<ChristoffelTensor> {
        let s = self.sigma(p)?;
        let a = 1.0 / (1.0 - self.r * self.r);
        let mut g = ChristoffelTensor::zeros(3);
        g.set(2, 0, 0, a / (4.0 * s));
        g.set(2, 1, 1, a / (4.0 * s));
        g.set(2, 0, 1, -self.r * a / (4.0 * s));
        g.set(2, 2, 2, -1.0 / s);
        g.set(0, 0, 2, -1.0 / s);
        g.set(1, 1, 2, -1.0 / s);
        Ok(g)
    }

    /// Every symbol scales as `1/σ`, so `∂_σ Γ = −Γ/σ` and the μ-derivatives vanish.
    pub fn connection_derivative(&self, p: &Point) -> Result<ConnectionDerivative> {
        let s = self.sigma(p)?;
        let gam = self.christoffel(p)?;
        let mut out = ConnectionDerivative::zeros(3);
        out.by_coordinate[2] = gam.zip_map(&gam, |x, _| -x / s);
        Ok(out)
    }

    /// `R_ijkl = K (g_ik g_jl − g_il g_jk)` with `K = −1/4`.
    pub fn riemann(&self, p: &Point) -> Result<RiemannTensor> {
        let g = self.metric(p)?;
        let g_inv = self.inverse_metric(p)?;
        let k = GAUSS_SECTIONAL_CURVATURE;
        let mut lowered = vec![0.0; 81];
        for i in 0..3 {
            for j in 0..3 {
                for a in 0..3 {
                    for b in 0..3 {
                        lowered[((i * 3 + j) * 3 + a) * 3 + b] =
                            k * (g.get(i, a) * g.get(j, b) - g.get(i, b) * g.get(j, a));
                    }
                }
            }
        }
        Ok(RiemannTensor::from_lowered(3, lowered, &g_inv))
    }

    pub fn curvature(&self, p: &Point) -> Result<CurvatureReport> {
        let g_inv = self.inverse_metric(p)?;
        Ok(CurvatureReport::from_riemann(self.riemann(p)?, &g_inv))
    }

    /// `√det g = 2/(σ³√(1−r²))`.
    pub fn volume_element(&self, p: &Point) -> Result<f64> {
        let s = self.sigma(p)?;
        Ok(2.0 / (s.powi(3) * (1.0 - self.r * self.r).sqrt()))
    }

    pub fn spec(&self) -> ManifoldSpec {
        let (m0, m1, m2, m3, m4) = (*self, *self, *self, *self, *self);
        ManifoldSpec::new(self.name(), 3, move |c| m0.contains(c), move |p| m1.metric(p))
            .with_christoffel(move |p| m2.christoffel(p))
            .with_connection_derivative(move |p| m3.connection_derivative(p))
            .with_curvature(move |p| m4.curvature(p))
    }
}

fn metric_at_sigma(r: f64, s: f64) -> MetricTensor {
    let a = 1.0 / (1.0 - r * r);
    let s2 = s * s;
    MetricTensor::from_fn(3, |i, j| {
        (match (i, j) {
            (0, 0) | (1, 1) => a,
            (0, 1) | (1, 0) => -r * a,
            (2, 2) => 4.0,
            _ => 0.0,
        }) / s2
    })
}

/// The correlated Gaussian manifold as a [`ManifoldSpec`] with analytic
/// metric, connection and curvature.
pub fn gauss_manifold(r: f64) -> Result<ManifoldSpec> {
    Ok(GaussCorrManifold::new(r)?.spec())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussGeodesicParams {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl GaussGeodesicParams {
    pub fn new(cx: f64, cy: f64, r: f64) -> Result<Self> {
        GaussCorrManifold::new(r)?;
        if !cx.is_finite() || !cy.is_finite() {
            return Err(GeoError::InvalidParameter("Cx and Cy must be finite".into()));
        }
        Ok(GaussGeodesicParams { cx, cy, r })
    }

    /// `C = ¼ √((Cx² + Cy² − 2r Cx Cy)/(1 − r²))`.
    pub fn c(&self) -> f64 {
        let q = self.cx * self.cx + self.cy * self.cy - 2.0 * self.r * self.cx * self.cy;
        0.25 * (q.max(0.0) / (1.0 - self.r * self.r)).sqrt()
    }

    fn nondegenerate_c(&self) -> Result<f64> {
        let c = self.c();
        if c > 0.0 {
            Ok(c)
        } else {
            Err(GeoError::DegenerateGeodesic("C = 0 (Cx = Cy = 0)".into()))
        }
    }
}

/// `1/(1 + e^x)` without overflow.
fn logistic_complement(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// `σ(τ) = e^{Cτ}/(1 + e^{2Cτ}) = 1/(2 cosh Cτ)`.
fn sigma_curve(c: f64, tau: f64) -> (f64, f64) {
    let s = 0.5 / (c * tau).cosh();
    (s, -c * s * (c * tau).tanh())
}

fn curve_point(coords: Vec<f64>) -> Result<Point> {
    if !(coords[2] > 0.0) {
        return Err(GeoError::OutOfDomain {
            manifold: "gauss".into(),
            coords,
        });
    }
    Point::new(coords)
}

/// Unit-normalised geodesic with `σ(τ) = e^{Cτ}/(1+e^{2Cτ})`,
/// `μ_x(τ) = −(Cx/2C)/(1+e^{2Cτ})` and likewise for `μ_y`.
///
/// It satisfies `μ̇_x = Cx σ²`, `μ̇_y = Cy σ²`, has speed `2C`, and tends to
/// `(0, 0, 0)` as `τ → ∞`.
pub fn gauss_geodesic(params: &GaussGeodesicParams, tau: f64) -> Result<(Point, Vec<f64>)> {
    let c = params.nondegenerate_c()?;
    let (s, sd) = sigma_curve(c, tau);
    let l = logistic_complement(2.0 * c * tau);
    let k = -1.0 / (2.0 * c);
    let p = curve_point(vec![k * params.cx * l, k * params.cy * l, s])?;
    let s2 = s * s;
    Ok((p, vec![params.cx * s2, params.cy * s2, sd]))
}

/// The curve `μ_x = Cx/(1+e^{2Cτ})`, `μ_y = Cy/(1+e^{2Cτ})`, `σ = e^{Cτ}/(1+e^{2Cτ})`.
///
/// For `C = ½` it coincides with [`gauss_geodesic`] up to a translation in μ;
/// otherwise it is not a geodesic. The closed-form volume
/// [`gauss_volume_region`] refers to the coordinate box spanned by this curve.
pub fn gauss_printed_curve(params: &GaussGeodesicParams, tau: f64) -> Result<(Point, Vec<f64>)> {
    let c = params.nondegenerate_c()?;
    let (s, sd) = sigma_curve(c, tau);
    let l = logistic_complement(2.0 * c * tau);
    let p = curve_point(vec![params.cx * l, params.cy * l, s])?;
    let w = -2.0 * c * s * s;
    Ok((p, vec![w * params.cx, w * params.cy, sd]))
}

/// Geodesic acceleration `−Γ(v, v)` in closed form; used for ODE residuals.
pub fn gauss_geodesic_residual(params: &GaussGeodesicParams, tau: f64) -> Result<[f64; 3]> {
    let c = params.nondegenerate_c()?;
    let (p, v) = gauss_geodesic(params, tau)?;
    let (s, sd) = (p.coords()[2], v[2]);
    let th = (c * tau).tanh();
    // exact second derivatives of the closed form
    let acc = [
        2.0 * params.cx * s * sd,
        2.0 * params.cy * s * sd,
        -c * c * s * (1.0 - 2.0 * th * th),
    ];
    let gam = GaussCorrManifold::new(params.r)?.christoffel(&p)?;
    let q = gam.contract(&v, &v);
    Ok([acc[0] + q[0], acc[1] + q[1], acc[2] + q[2]])
}

/// `2Cτ`.
pub fn gauss_arclength(params: &GaussGeodesicParams, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(GeoError::InvalidParameter(format!("tau must be >= 0, got {tau}")));
    }
    Ok(2.0 * params.c() * tau)
}

/// Volume of the coordinate box between `τ = 0` and `τ` on [`gauss_printed_curve`]:
/// `−Cx Cy (1 − e^{2Cτ})⁴ / (4√(1−r²) e^{2Cτ} (1 + e^{2Cτ})²)`.
///
/// Evaluated as `−Cx Cy sinh²(Cτ) tanh²(Cτ)/√(1−r²)`, which is the same
/// expression without overflow.
pub fn gauss_volume_region(params: &GaussGeodesicParams, tau: f64) -> f64 {
    let ct = params.c() * tau;
    let (sh, th) = (ct.sinh(), ct.tanh());
    -params.cx * params.cy * sh * sh * th * th / (1.0 - params.r * params.r).sqrt()
}

/// The published average volume
/// `−Cx Cy/(8C√(1−r²)) · ((E − 1/E)/τ − 16/(τ(1+E)) − 12C + 8/τ)`, `E = e^{2Cτ}`,
/// which equals `(1/τ)∫₀^τ` [`gauss_volume_region`].
pub fn gauss_average_volume(params: &GaussGeodesicParams, tau: f64) -> f64 {
    let c = params.c();
    if c == 0.0 || params.cx * params.cy == 0.0 {
        return 0.0;
    }
    let e = (2.0 * c * tau).exp();
    let bracket = (e - 1.0 / e) / tau - 16.0 / (tau * (1.0 + e)) - 12.0 * c + 8.0 / tau;
    -params.cx * params.cy / (8.0 * c * (1.0 - params.r * params.r).sqrt()) * bracket
}

/// Volume of the coordinate box spanned by [`gauss_geodesic`]; the μ-extents
/// are those of the printed curve divided by `2C`.
pub fn gauss_geodesic_volume_region(params: &GaussGeodesicParams, tau: f64) -> f64 {
    let c = params.c();
    if c == 0.0 {
        return 0.0;
    }
    gauss_volume_region(params, tau) / (4.0 * c * c)
}

/// `(1/τ)∫₀^τ` [`gauss_geodesic_volume_region`].
pub fn gauss_geodesic_average_volume(params: &GaussGeodesicParams, tau: f64) -> f64 {
    let c = params.c();
    if c == 0.0 {
        return 0.0;
    }
    gauss_average_volume(params, tau) / (4.0 * c * c)
}

/// Integration constants of the large-τ Jacobi solution
/// `J_x = a_x1 + a_x2 e^{−2Cτ}`, `J_y = a_y1 + a_y2 e^{−2Cτ}`, `J_σ = (a_σ1 + a_σ2 τ) e^{−Cτ}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GaussJacobiConstants {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub sigma: [f64; 2],
}

pub fn gauss_jacobi_asymptotic(params: &GaussGeodesicParams, k: &GaussJacobiConstants, tau: f64) -> [f64; 3] {
    let c = params.c();
    let e2 = (-2.0 * c * tau).exp();
    [
        k.x[0] + k.x[1] * e2,
        k.y[0] + k.y[1] * e2,
        (k.sigma[0] + k.sigma[1] * tau) * (-c * tau).exp(),
    ]
}

/// First and second τ-derivatives of [`gauss_jacobi_asymptotic`].
pub fn gauss_jacobi_asymptotic_derivatives(
    params: &GaussGeodesicParams,
    k: &GaussJacobiConstants,
    tau: f64,
) -> ([f64; 3], [f64; 3]) {
    let c = params.c();
    let e2 = (-2.0 * c * tau).exp();
    let e1 = (-c * tau).exp();
    let lin = k.sigma[0] + k.sigma[1] * tau;
    (
        [-2.0 * c * k.x[1] * e2, -2.0 * c * k.y[1] * e2, (k.sigma[1] - c * lin) * e1],
        [
            4.0 * c * c * k.x[1] * e2,
            4.0 * c * c * k.y[1] * e2,
            (c * c * lin - 2.0 * c * k.sigma[1]) * e1,
        ],
    )
}

/// Residuals of `J̈_x + 2C J̇_x = 0`, `J̈_y + 2C J̇_y = 0`, `J̈_σ + 2C J̇_σ + C² J_σ = 0`.
pub fn gauss_jacobi_asymptotic_residual(params: &GaussGeodesicParams, k: &GaussJacobiConstants, tau: f64) -> [f64; 3] {
    let c = params.c();
    let j = gauss_jacobi_asymptotic(params, k, tau);
    let (d1, d2) = gauss_jacobi_asymptotic_derivatives(params, k, tau);
    [
        d2[0] + 2.0 * c * d1[0],
        d2[1] + 2.0 * c * d1[1],
        d2[2] + 2.0 * c * d1[2] + c * c * j[2],
    ]
}

/// `g_ij J^i J^j` of the asymptotic field along [`gauss_geodesic`].
pub fn gauss_jacobi_asymptotic_norm_sq(params: &GaussGeodesicParams, k: &GaussJacobiConstants, tau: f64) -> Result<f64> {
    let (p, _) = gauss_geodesic(params, tau)?;
    let g = metric_at_sigma(params.r, p.coords()[2]);
    let j = gauss_jacobi_asymptotic(params, k, tau);
    Ok(g.inner(&j, &j))
}

/// Leading large-τ behaviour `(a_x1² + a_y1² − 2r a_x1 a_y1)/(1−r²) · e^{2Cτ}`
/// of [`gauss_jacobi_asymptotic_norm_sq`].
pub fn gauss_jacobi_norm_leading(params: &GaussGeodesicParams, k: &GaussJacobiConstants, tau: f64) -> f64 {
    let (x, y, r) = (k.x[0], k.y[0], params.r);
    (x * x + y * y - 2.0 * r * x * y) / (1.0 - r * r) * (2.0 * params.c() * tau).exp()
}

/// Geodesic point/velocity together with a Jacobi field and its coordinate τ-derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussJacobiState {
    pub point: [f64; 3],
    pub velocity: [f64; 3],
    pub j: [f64; 3],
    pub jdot: [f64; 3],
}

fn jacobi_state_check(params: &GaussGeodesicParams, st: &GaussJacobiState) -> Result<f64> {
    let c = params.nondegenerate_c()?;
    if !(st.point[2] > 0.0) {
        return Err(GeoError::OutOfDomain {
            manifold: "gauss".into(),
            coords: st.point.to_vec(),
        });
    }
    Ok(c)
}

/// Second coordinate derivatives of the Jacobi field along a geodesic with
/// `μ̇ = (Cx, Cy) σ²`, from expanding the geodesic-deviation equation:
///
/// ```text
/// J̈_x = 2(σ̇/σ) J̇_x + 2Cx σ J̇_σ − 2Cx σ̇ J_σ
/// J̈_y = 2(σ̇/σ) J̇_y + 2Cy σ J̇_σ − 2Cy σ̇ J_σ
/// J̈_σ = −σ(Cx − rCy)/(2(1−r²)) J̇_x − σ(Cy − rCx)/(2(1−r²)) J̇_y
///        + 2(σ̇/σ) J̇_σ + (4C²σ² − σ̇²/σ²) J_σ
/// ```
pub fn gauss_jacobi_full_rhs(params: &GaussGeodesicParams, st: &GaussJacobiState) -> Result<[f64; 3]> {
    let c = jacobi_state_check(params, st)?;
    let (cx, cy, r) = (params.cx, params.cy, params.r);
    let (s, sd) = (st.point[2], st.velocity[2]);
    let w = sd / s;
    let one_m = 1.0 - r * r;
    Ok([
        2.0 * w * st.jdot[0] + 2.0 * cx * s * st.jdot[2] - 2.0 * cx * sd * st.j[2],
        2.0 * w * st.jdot[1] + 2.0 * cy * s * st.jdot[2] - 2.0 * cy * sd * st.j[2],
        -s * (cx - r * cy) / (2.0 * one_m) * st.jdot[0] - s * (cy - r * cx) / (2.0 * one_m) * st.jdot[1]
            + 2.0 * w * st.jdot[2]
            + (4.0 * c * c * s * s - w * w) * st.j[2],
    ])
}

/// The full Jacobi system exactly as published, solved for the second
/// derivatives, with `(∂σ/∂τ)²/σ²` read for the `(J_σ/∂τ)²/σ²` misprint.
///
/// It is not consistent with the geodesic-deviation equation of this
/// manifold and is kept only so reports can show the difference.
pub fn printed_jacobi_rhs(params: &GaussGeodesicParams, st: &GaussJacobiState) -> Result<[f64; 3]> {
    let c = jacobi_state_check(params, st)?;
    let (cx, cy, r) = (params.cx, params.cy, params.r);
    let (s, sd) = (st.point[2], st.velocity[2]);
    let (j, jd) = (st.j, st.jdot);
    let one_m = 1.0 - r * r;
    let s2 = s * s;
    let jx = 2.0 / s * sd * jd[0] + 2.0 * cx * s * jd[2]
        - (c * s2 + (cx + cy) * sd) * j[0]
        - cx * ((r * cy - cx) * s2 / (4.0 * one_m) + sd) * j[2];
    let jy = 2.0 / s * sd * jd[1] + 2.0 * cy * s * jd[2]
        - (c * s2 + (cx + cy) * sd) * j[1]
        - cy * ((r * cx - cy) * s2 / (4.0 * one_m) + sd) * j[2];
    let js = -s / (2.0 * (1.0 + r)) * (cx * jd[0] + cy * jd[1]) + 2.0 / s * sd * jd[2]
        - ((sd / s).powi(2) + (cx + cy) * sd) * j[2]
        - ((cx * cx - r * cy * cy + (r * r - 2.0) * cx * cy) * s2 / 4.0 + (cx - r * cy) * sd) * j[0]
            / (4.0 * one_m)
        - ((cy * cy - r * cx * cx + (r * r - 2.0) * cx * cy) * s2 / 4.0 + (cy - r * cx) * sd) * j[1]
            / (4.0 * one_m);
    Ok([jx, jy, js])
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TabulatedValue {
    /// `1/(4σ²(1−r²))`
    Quarter,
    /// `−r/(4σ²(1−r²))`
    QuarterR,
    /// `1/σ²`
    InvSq,
    /// `−r/(16σ²(1−r²))`
    SixteenthR,
    /// `1/(16σ²(1−r²))`
    Sixteenth,
    /// `r²/(16σ²(1−r²))`
    SixteenthR2,
    /// `−r/(2σ²(1−r²))`
    HalfR,
}

/// `(i, k, l, m, sign, value)`, 1-based as printed, in the order listed.
const TABULATED_CURVATURE: &[(u8, u8, u8, u8, i8, TabulatedValue)] = {
    use TabulatedValue::*;
    &[
        (1, 1, 1, 1, 1, Quarter),
        (1, 1, 2, 2, 1, Quarter),
        (2, 2, 2, 2, 1, Quarter),
        (2, 2, 1, 1, 1, Quarter),
        (1, 1, 3, 1, -1, Quarter),
        (2, 2, 3, 2, -1, Quarter),
        (1, 1, 2, 1, 1, QuarterR),
        (1, 1, 1, 2, 1, QuarterR),
        (2, 2, 1, 2, 1, QuarterR),
        (2, 2, 2, 1, 1, QuarterR),
        (1, 1, 3, 2, -1, QuarterR),
        (2, 2, 3, 1, -1, QuarterR),
        (1, 3, 1, 1, 1, InvSq),
        (1, 1, 3, 3, 1, InvSq),
        (1, 3, 1, 2, 1, InvSq),
        (2, 3, 2, 2, 1, InvSq),
        (2, 2, 3, 3, 1, InvSq),
        (2, 3, 2, 1, 1, InvSq),
        (3, 3, 3, 1, 1, InvSq),
        (3, 3, 3, 2, 1, InvSq),
        (1, 3, 3, 1, -1, InvSq),
        (1, 3, 1, 3, -1, InvSq),
        (2, 3, 3, 2, -1, InvSq),
        (2, 3, 2, 3, -1, InvSq),
        (3, 1, 2, 1, 1, SixteenthR),
        (3, 1, 1, 2, 1, SixteenthR),
        (3, 2, 1, 2, 1, SixteenthR),
        (3, 2, 2, 1, 1, SixteenthR),
        (3, 1, 1, 1, 1, Sixteenth),
        (3, 2, 2, 2, 1, Sixteenth),
        (3, 2, 1, 1, 1, SixteenthR2),
        (3, 1, 2, 2, 1, SixteenthR2),
        (3, 3, 3, 1, 1, HalfR),
        (3, 3, 3, 2, 1, HalfR),
        (3, 3, 2, 1, 1, HalfR),
        (3, 3, 1, 2, 1, HalfR),
    ]
};

/// Entry `R^i_{klm}` of the published curvature table (1-based indices),
/// taking the first listing when an index combination appears twice, and 0
/// for combinations the table omits.
///
/// The table does not satisfy the antisymmetry of any standard curvature
/// convention (for example `R¹₁₁₁ ≠ 0`); it is a fixture, not a curvature.
pub fn tabulated_curvature_entry(i: usize, k: usize, l: usize, m: usize, sigma: f64, r: f64) -> f64 {
    let d = sigma * sigma * (1.0 - r * r);
    for &(ti, tk, tl, tm, sign, v) in TABULATED_CURVATURE {
        if (ti as usize, tk as usize, tl as usize, tm as usize) == (i, k, l, m) {
            let val = match v {
                TabulatedValue::Quarter => 1.0 / (4.0 * d),
                TabulatedValue::QuarterR => -r / (4.0 * d),
                TabulatedValue::InvSq => 1.0 / (sigma * sigma),
                TabulatedValue::SixteenthR => -r / (16.0 * d),
                TabulatedValue::Sixteenth => 1.0 / (16.0 * d),
                TabulatedValue::SixteenthR2 => r * r / (16.0 * d),
                TabulatedValue::HalfR => -r / (2.0 * d),
            };
            return sign as f64 * val;
        }
    }
    0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{christoffel_fd, ricci_and_scalar, DEFAULT_CHRISTOFFEL_STEP, DEFAULT_CURVATURE_STEP};

    fn pt(c: &[f64]) -> Point {
        Point::from_slice(c).unwrap()
    }

    #[test]
    fn metric_entries() {
        let m = GaussCorrManifold::new(0.0).unwrap();
        let g = m.metric(&pt(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!((g.get(0, 0), g.get(1, 1), g.get(2, 2), g.get(0, 1)), (1.0, 1.0, 4.0, 0.0));
        let g = GaussCorrManifold::new(0.5).unwrap().metric(&pt(&[0.0, 0.0, 1.0])).unwrap();
        assert!((g.get(0, 1) + 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_correlation() {
        assert!(gauss_manifold(1.0).is_err());
        assert!(gauss_manifold(-1.2).is_err());
        assert!(gauss_manifold(f64::NAN).is_err());
    }

    #[test]
    fn inverse_is_inverse() {
        let m = GaussCorrManifold::new(0.7).unwrap();
        let p = pt(&[0.3, -1.0, 0.6]);
        let prod = m.metric(&p).unwrap().matrix() * m.inverse_metric(&p).unwrap().matrix();
        assert!((prod - nalgebra::DMatrix::identity(3, 3)).abs().max() < 1e-13);
    }

    #[test]
    fn christoffel_table_matches_fd() {
        let m = GaussCorrManifold::new(-0.4).unwrap();
        let spec = m.spec();
        let p = pt(&[0.2, 0.1, 0.8]);
        let fd = christoffel_fd(&spec, &p, DEFAULT_CHRISTOFFEL_STEP).unwrap();
        assert!(fd.max_abs_diff(&m.christoffel(&p).unwrap()) < 1e-8);
        assert_eq!(m.christoffel(&p).unwrap().get(1, 0, 2), 0.0);
    }

    #[test]
    fn analytic_curvature_values() {
        for r in [-0.9, 0.0, 0.5] {
            let m = GaussCorrManifold::new(r).unwrap();
            let p = pt(&[1.0, -2.0, 0.7]);
            let rep = m.curvature(&p).unwrap();
            assert!((rep.scalar + 1.5).abs() < 1e-12);
            let s = 0.7f64;
            let want = -1.0 / (4.0 * (1.0 - r * r) * s.powi(4));
            assert!((rep.riemann.lowered(0, 1, 0, 1) - want).abs() < 1e-12 * want.abs());
        }
    }

    #[test]
    fn fd_scalar_curvature() {
        let spec = gauss_manifold(0.3).unwrap();
        let rep = ricci_and_scalar(&spec, &pt(&[0.0, 0.0, 1.3]), DEFAULT_CURVATURE_STEP).unwrap();
        assert!((rep.scalar + 1.5).abs() < 1e-6);
    }

    #[test]
    fn c_formula() {
        let p = GaussGeodesicParams::new(2.0, 0.0, 0.0).unwrap();
        assert!((p.c() - 0.5).abs() < 1e-15);
        assert_eq!(GaussGeodesicParams::new(0.0, 0.0, 0.3).unwrap().c(), 0.0);
        assert!(gauss_geodesic(&GaussGeodesicParams::new(0.0, 0.0, 0.3).unwrap(), 1.0).is_err());
    }

    #[test]
    fn geodesic_satisfies_ode_and_velocity_identity() {
        let p = GaussGeodesicParams::new(2.0, 1.0, 0.3).unwrap();
        for k in 0..50 {
            let res = gauss_geodesic_residual(&p, k as f64 * 0.1).unwrap();
            assert!(res.iter().all(|x| x.abs() < 1e-10), "{res:?}");
        }
        let (pt0, _) = gauss_geodesic(&p, 0.0).unwrap();
        assert_eq!(pt0.coords()[2], 0.5);
        let h = 1e-5;
        let lo = gauss_geodesic(&p, 1.0 - h).unwrap().0;
        let hi = gauss_geodesic(&p, 1.0 + h).unwrap().0;
        let (mid, v) = gauss_geodesic(&p, 1.0).unwrap();
        let s = mid.coords()[2];
        assert!(((hi.coords()[0] - lo.coords()[0]) / (2.0 * h) - 2.0 * s * s).abs() < 1e-9);
        assert_eq!(v[0], 2.0 * s * s);
    }

    #[test]
    fn geodesic_speed_is_two_c() {
        let p = GaussGeodesicParams::new(1.3, -0.4, 0.6).unwrap();
        let m = GaussCorrManifold::new(0.6).unwrap();
        for t in [0.0, 0.5, 3.0, 10.0] {
            let (x, v) = gauss_geodesic(&p, t).unwrap();
            let speed = m.metric(&x).unwrap().inner(&v, &v).sqrt();
            assert!((speed - 2.0 * p.c()).abs() < 1e-12);
        }
    }

    #[test]
    fn geodesic_asymptotics() {
        let p = GaussGeodesicParams::new(2.0, 1.0, 0.3).unwrap();
        let c = p.c();
        let t = 20.0 / c;
        let (x, v) = gauss_geodesic(&p, t).unwrap();
        assert!((x.coords()[2] * (c * t).exp() - 1.0).abs() < 1e-6);
        assert!((v[2] / x.coords()[2] + c).abs() < 1e-6);
        assert!(x.coords()[0].abs() < 1e-10);
    }

    #[test]
    fn printed_curve_is_geodesic_only_for_half() {
        let half = GaussGeodesicParams::new(2.0, 0.0, 0.0).unwrap();
        let (a, _) = gauss_printed_curve(&half, 1.0).unwrap();
        let (b, _) = gauss_geodesic(&half, 1.0).unwrap();
        let (a0, _) = gauss_printed_curve(&half, 0.0).unwrap();
        let (b0, _) = gauss_geodesic(&half, 0.0).unwrap();
        assert!(((a.coords()[0] - a0.coords()[0]) + (b.coords()[0] - b0.coords()[0])).abs() < 1e-14);
        assert_eq!(a0.coords()[0], 1.0);
    }

    #[test]
    fn volume_formula_equivalent_forms() {
        let p = GaussGeodesicParams::new(1.0, 1.0, 0.0).unwrap();
        let c = p.c();
        for t in [0.3, 1.0, 4.0] {
            let e = (2.0 * c * t).exp();
            let lit = -(1.0 - e).powi(4) / (4.0 * e * (1.0 + e).powi(2));
            assert!((gauss_volume_region(&p, t) - lit).abs() < 1e-13 * lit.abs());
        }
        assert_eq!(gauss_volume_region(&p, 0.0), -0.0);
        assert!(gauss_volume_region(&GaussGeodesicParams::new(1.0, -2.0, 0.2).unwrap(), 1.0) > 0.0);
        assert_eq!(gauss_average_volume(&GaussGeodesicParams::new(0.0, 1.0, 0.0).unwrap(), 2.0), 0.0);
    }

    #[test]
    fn average_volume_matches_simple_quadrature() {
        let p = GaussGeodesicParams::new(1.0, 1.0, 0.0).unwrap();
        let tau = 2.0;
        let n = 20000;
        let h = tau / n as f64;
        let mut s = gauss_volume_region(&p, 0.0) + gauss_volume_region(&p, tau);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * gauss_volume_region(&p, k as f64 * h);
        }
        let q = s * h / 3.0 / tau;
        let a = gauss_average_volume(&p, tau);
        assert!((q - a).abs() < 1e-9 * a.abs());
    }

    #[test]
    fn asymptotic_jacobi_solves_its_equations() {
        let p = GaussGeodesicParams::new(1.0, 2.0, -0.3).unwrap();
        let k = GaussJacobiConstants { x: [0.3, -1.2], y: [0.7, 0.4], sigma: [1.1, -0.6] };
        for t in [0.0, 1.0, 5.0, 20.0] {
            let res = gauss_jacobi_asymptotic_residual(&p, &k, t);
            assert!(res.iter().all(|x| x.abs() < 1e-12), "{res:?}");
        }
        let only = GaussJacobiConstants { x: [1.0, 0.0], ..Default::default() };
        assert_eq!(gauss_jacobi_asymptotic(&p, &only, 3.0), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn asymptotic_norm_leading_term() {
        let p = GaussGeodesicParams::new(1.0, 2.0, -0.3).unwrap();
        let k = GaussJacobiConstants { x: [0.3, -1.2], y: [0.7, 0.4], sigma: [1.1, -0.6] };
        let t = 30.0 / p.c();
        let n = gauss_jacobi_asymptotic_norm_sq(&p, &k, t).unwrap();
        let lead = gauss_jacobi_norm_leading(&p, &k, t);
        assert!((n / lead - 1.0).abs() < 1e-6);
    }

    #[test]
    fn full_rhs_has_no_r_terms_at_r_zero() {
        let p = GaussGeodesicParams::new(1.0, 0.0, 0.0).unwrap();
        let (x, v) = gauss_geodesic(&p, 0.5).unwrap();
        let mut st = GaussJacobiState {
            point: [x.coords()[0], x.coords()[1], x.coords()[2]],
            velocity: [v[0], v[1], v[2]],
            j: [0.0; 3],
            jdot: [0.0, 1.0, 0.0],
        };
        // with Cx only and r = 0, J̇_y feeds neither J̈_x nor J̈_σ
        let out = gauss_jacobi_full_rhs(&p, &st).unwrap();
        assert_eq!(out[0], 0.0);
        assert_eq!(out[2], 0.0);
        st.jdot = [0.0; 3];
        assert_eq!(gauss_jacobi_full_rhs(&p, &st).unwrap(), [0.0; 3]);
    }

    #[test]
    fn tabulated_fixture() {
        assert!((tabulated_curvature_entry(1, 1, 1, 1, 1.0, 0.0) - 0.25).abs() < 1e-15);
        assert_eq!(tabulated_curvature_entry(3, 3, 3, 1, 1.0, 0.5), 1.0);
        assert!((tabulated_curvature_entry(1, 1, 3, 1, 2.0, 0.0) + 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(tabulated_curvature_entry(2, 1, 3, 3, 1.0, 0.0), 0.0);
    }
}
