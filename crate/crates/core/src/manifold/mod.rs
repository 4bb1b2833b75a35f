//! Generic Riemannian machinery on a single coordinate chart.
//!
//! A [`ManifoldSpec`] bundles a domain predicate with a metric evaluator and,
//! optionally, closed-form connection and curvature evaluators. Everything
//! else (finite-difference connection, curvature contractions, volume element,
//! products) is derived here from those evaluators.

mod tensor;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

pub use tensor::{
    ChristoffelTensor, ConnectionDerivative, CurvatureReport, MetricTensor, Point, RiemannTensor,
    SymmetryResiduals,
};

use crate::error::{GeoError, Result};

/// Default relative step for first derivatives of the metric.
pub const DEFAULT_CHRISTOFFEL_STEP: f64 = 1e-5;
/// Default relative step for derivatives of the connection (nested differences).
pub const DEFAULT_CURVATURE_STEP: f64 = 1e-3;
/// `inverse_metric_at` refuses metrics with a larger condition number.
pub const MAX_CONDITION_NUMBER: f64 = 1e12;
/// Symmetry residual (relative to `max(1, max |R|)`) that signals breakdown.
pub const BREAKDOWN_RESIDUAL: f64 = 1e-3;

pub type DomainFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;
pub type MetricFn = Arc<dyn Fn(&Point) -> Result<MetricTensor> + Send + Sync>;
pub type ChristoffelFn = Arc<dyn Fn(&Point) -> Result<ChristoffelTensor> + Send + Sync>;
pub type ConnectionDerivativeFn = Arc<dyn Fn(&Point) -> Result<ConnectionDerivative> + Send + Sync>;
pub type CurvatureFn = Arc<dyn Fn(&Point) -> Result<CurvatureReport> + Send + Sync>;

/// A coordinate chart with a Riemannian metric.
///
/// Evaluators are shared closures, so cloning is cheap and a spec can be used
/// from several threads at once.
#[derive(Clone)]
pub struct ManifoldSpec {
    name: String,
    dim: usize,
    domain: DomainFn,
    metric: MetricFn,
    christoffel: Option<ChristoffelFn>,
    connection_derivative: Option<ConnectionDerivativeFn>,
    curvature: Option<CurvatureFn>,
}

impl fmt::Debug for ManifoldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManifoldSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("analytic_christoffel", &self.christoffel.is_some())
            .field("analytic_connection_derivative", &self.connection_derivative.is_some())
            .field("analytic_curvature", &self.curvature.is_some())
            .finish()
    }
}

impl ManifoldSpec {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        domain: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
        metric: impl Fn(&Point) -> Result<MetricTensor> + Send + Sync + 'static,
    ) -> Self {
        ManifoldSpec {
            name: name.into(),
            dim,
            domain: Arc::new(domain),
            metric: Arc::new(metric),
            christoffel: None,
            connection_derivative: None,
            curvature: None,
        }
    }

    pub fn with_christoffel(
        mut self,
        f: impl Fn(&Point) -> Result<ChristoffelTensor> + Send + Sync + 'static,
    ) -> Self {
        self.christoffel = Some(Arc::new(f));
        self
    }

    pub fn with_connection_derivative(
        mut self,
        f: impl Fn(&Point) -> Result<ConnectionDerivative> + Send + Sync + 'static,
    ) -> Self {
        self.connection_derivative = Some(Arc::new(f));
        self
    }

    pub fn with_curvature(
        mut self,
        f: impl Fn(&Point) -> Result<CurvatureReport> + Send + Sync + 'static,
    ) -> Self {
        self.curvature = Some(Arc::new(f));
        self
    }

    /// Same chart and metric with every closed-form evaluator dropped.
    pub fn metric_only(&self) -> Self {
        ManifoldSpec {
            name: format!("{} (metric only)", self.name),
            dim: self.dim,
            domain: self.domain.clone(),
            metric: self.metric.clone(),
            christoffel: None,
            connection_derivative: None,
            curvature: None,
        }
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Flat `R^dim` with the identity metric.
    pub fn euclidean(dim: usize) -> Self {
        ManifoldSpec::new(
            format!("euclidean-{dim}"),
            dim,
            |_| true,
            move |_| Ok(MetricTensor::identity(dim)),
        )
        .with_christoffel(move |_| Ok(ChristoffelTensor::zeros(dim)))
        .with_connection_derivative(move |_| Ok(ConnectionDerivative::zeros(dim)))
        .with_curvature(move |_| {
            Ok(CurvatureReport {
                riemann: RiemannTensor::zeros(dim),
                ricci: DMatrix::zeros(dim, dim),
                scalar: 0.0,
            })
        })
    }

    /// The zero-dimensional manifold; neutral element of [`product`].
    pub fn point() -> Self {
        Self::euclidean(0).renamed("point")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_analytic_christoffel(&self) -> bool {
        self.christoffel.is_some()
    }

    pub fn has_analytic_curvature(&self) -> bool {
        self.curvature.is_some()
    }

    pub fn contains(&self, coords: &[f64]) -> bool {
        coords.len() == self.dim && coords.iter().all(|c| c.is_finite()) && (self.domain)(coords)
    }

    /// `Ok` iff `p` has the right dimension and satisfies the domain predicate.
    pub fn check(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim {
            return Err(GeoError::DimensionMismatch {
                expected: self.dim,
                got: p.dim(),
            });
        }
        if !self.contains(p.coords()) {
            return Err(GeoError::OutOfDomain {
                manifold: self.name.clone(),
                coords: p.coords().to_vec(),
            });
        }
        Ok(())
    }

    pub fn metric_at(&self, p: &Point) -> Result<MetricTensor> {
        self.check(p)?;
        (self.metric)(p)
    }

    pub fn analytic_christoffel_at(&self, p: &Point) -> Option<Result<ChristoffelTensor>> {
        let f = self.christoffel.as_ref()?;
        Some(self.check(p).and_then(|_| f(p)))
    }

    pub fn analytic_connection_derivative_at(&self, p: &Point) -> Option<Result<ConnectionDerivative>> {
        let f = self.connection_derivative.as_ref()?;
        Some(self.check(p).and_then(|_| f(p)))
    }

    pub fn analytic_curvature_at(&self, p: &Point) -> Option<Result<CurvatureReport>> {
        let f = self.curvature.as_ref()?;
        Some(self.check(p).and_then(|_| f(p)))
    }
}

/// Per-coordinate step `h * max(1, |x_k|)`.
fn step_for(h: f64, x: f64) -> f64 {
    h * x.abs().max(1.0)
}

/// Fourth-order central difference of a vector-valued function along `e_k`.
fn central_diff<T>(
    p: &Point,
    k: usize,
    h: f64,
    f: impl Fn(&Point) -> Result<T>,
    flatten: impl Fn(&T) -> Vec<f64>,
) -> Result<Vec<f64>> {
    let hk = step_for(h, p.coords()[k]);
    let fm2 = flatten(&f(&p.shifted(k, -2.0 * hk))?);
    let fm1 = flatten(&f(&p.shifted(k, -hk))?);
    let fp1 = flatten(&f(&p.shifted(k, hk))?);
    let fp2 = flatten(&f(&p.shifted(k, 2.0 * hk))?);
    Ok((0..fm2.len())
        .map(|i| (fm2[i] - 8.0 * fm1[i] + 8.0 * fp1[i] - fp2[i]) / (12.0 * hk))
        .collect())
}

/// `[g^ij]` at `p`.
pub fn inverse_metric_at(spec: &ManifoldSpec, p: &Point) -> Result<MetricTensor> {
    let g = spec.metric_at(p)?;
    invert_metric(&g)
}

pub(crate) fn invert_metric(g: &MetricTensor) -> Result<MetricTensor> {
    if g.dim() == 0 {
        return Ok(g.clone());
    }
    let cond = g.condition_number();
    if !(cond <= MAX_CONDITION_NUMBER) {
        return Err(GeoError::SingularMetric { condition: cond });
    }
    let chol = g
        .matrix()
        .clone()
        .cholesky()
        .ok_or(GeoError::SingularMetric { condition: cond })?;
    MetricTensor::from_matrix(&chol.inverse())
}

/// Christoffel symbols of the second kind by central differences of the metric.
///
/// `h` is relative: coordinate `k` is stepped by `h * max(1, |x_k|)`. Every
/// stencil point must lie in the domain.
pub fn christoffel_fd(spec: &ManifoldSpec, p: &Point, h: f64) -> Result<ChristoffelTensor> {
    if !(h > 0.0) {
        return Err(GeoError::InvalidParameter(format!("finite-difference step must be positive, got {h}")));
    }
    let g = spec.metric_at(p)?;
    let g_inv = invert_metric(&g)?;
    let n = spec.dim();
    let flatten = |m: &MetricTensor| m.matrix().as_slice().to_vec();
    // dg[k][(i, j)] = ∂_k g_ij, column-major like nalgebra.
    let dg: Vec<Vec<f64>> = (0..n)
        .map(|k| central_diff(p, k, h, |q| spec.metric_at(q), flatten))
        .collect::<Result<_>>()?;
    let d = |k: usize, i: usize, j: usize| 0.5 * (dg[k][i + j * n] + dg[k][j + i * n]);
    Ok(connection_from_metric_derivative(n, &g_inv, d))
}

/// `Γ^l_ij = g^{ls} Γ_ijs` with `Γ_ijs = ½(∂_i g_js + ∂_j g_si − ∂_s g_ij)`.
fn connection_from_metric_derivative(
    n: usize,
    g_inv: &MetricTensor,
    dg: impl Fn(usize, usize, usize) -> f64,
) -> ChristoffelTensor {
    let mut out = ChristoffelTensor::zeros(n);
    for i in 0..n {
        for j in i..n {
            let first_kind: Vec<f64> = (0..n)
                .map(|s| 0.5 * (dg(i, j, s) + dg(j, s, i) - dg(s, i, j)))
                .collect();
            for l in 0..n {
                let v: f64 = (0..n).map(|s| first_kind[s] * g_inv.get(s, l)).sum();
                out.set(l, i, j, v);
            }
        }
    }
    out
}

/// Closed-form connection when available, otherwise [`christoffel_fd`] at the default step.
pub fn christoffel_at(spec: &ManifoldSpec, p: &Point) -> Result<ChristoffelTensor> {
    match spec.analytic_christoffel_at(p) {
        Some(r) => r,
        None => christoffel_fd(spec, p, DEFAULT_CHRISTOFFEL_STEP),
    }
}

/// `∂_h Γ^l_ij` by central differences of [`christoffel_at`].
pub fn connection_derivative_fd(spec: &ManifoldSpec, p: &Point, h: f64) -> Result<ConnectionDerivative> {
    let n = spec.dim();
    let dim = n;
    let by_coordinate = (0..n)
        .map(|k| {
            let flat = central_diff(
                p,
                k,
                h,
                |q| match spec.analytic_christoffel_at(q) {
                    Some(r) => r,
                    None => christoffel_fd(spec, q, h),
                },
                |c: &ChristoffelTensor| {
                    let mut v = Vec::with_capacity(dim * dim * dim);
                    for l in 0..dim {
                        for i in 0..dim {
                            for j in 0..dim {
                                v.push(c.get(l, i, j));
                            }
                        }
                    }
                    v
                },
            )?;
            let mut t = ChristoffelTensor::zeros(dim);
            for l in 0..dim {
                for i in 0..dim {
                    for j in i..dim {
                        let a = flat[(l * dim + i) * dim + j];
                        let b = flat[(l * dim + j) * dim + i];
                        t.set(l, i, j, 0.5 * (a + b));
                    }
                }
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConnectionDerivative { by_coordinate })
}

/// Closed-form `∂Γ` when available, otherwise [`connection_derivative_fd`].
pub fn connection_derivative_at(spec: &ManifoldSpec, p: &Point) -> Result<ConnectionDerivative> {
    match spec.analytic_connection_derivative_at(p) {
        Some(r) => r,
        None => connection_derivative_fd(spec, p, DEFAULT_CURVATURE_STEP),
    }
}

/// Lowered curvature from a connection and its derivative:
/// `R_ijsl = (∂_j Γ^u_is − ∂_i Γ^u_js) g_ul + (Γ_jtl Γ^t_is − Γ_itl Γ^t_js)`
/// with `Γ_jtl = Γ^u_jt g_ul`.
pub fn riemann_from_connection(
    g: &MetricTensor,
    g_inv: &MetricTensor,
    gamma: &ChristoffelTensor,
    dgamma: &ConnectionDerivative,
) -> RiemannTensor {
    let n = g.dim();
    // first[(j, t, l)] = Γ_jtl
    let mut first = vec![0.0; n * n * n];
    for j in 0..n {
        for t in 0..n {
            for l in 0..n {
                first[(j * n + t) * n + l] = (0..n).map(|u| gamma.get(u, j, t) * g.get(u, l)).sum();
            }
        }
    }
    let mut lowered = vec![0.0; n.pow(4)];
    for i in 0..n {
        for j in 0..n {
            for s in 0..n {
                for l in 0..n {
                    let mut acc = 0.0;
                    for u in 0..n {
                        acc += (dgamma.get(j, u, i, s) - dgamma.get(i, u, j, s)) * g.get(u, l);
                    }
                    for t in 0..n {
                        acc += first[(j * n + t) * n + l] * gamma.get(t, i, s)
                            - first[(i * n + t) * n + l] * gamma.get(t, j, s);
                    }
                    lowered[((i * n + j) * n + s) * n + l] = acc;
                }
            }
        }
    }
    RiemannTensor::from_lowered(n, lowered, g_inv)
}

fn check_breakdown(r: &RiemannTensor) -> Result<()> {
    let residual = r.symmetry_residuals().max();
    let scale = r.max_abs_lowered().max(1.0);
    if residual > BREAKDOWN_RESIDUAL * scale || !residual.is_finite() {
        return Err(GeoError::NumericalBreakdown { residual });
    }
    Ok(())
}

/// Riemann tensor by nested central differences of the metric alone.
///
/// Ignores any closed-form evaluators, so it can serve as their oracle.
pub fn riemann_at(spec: &ManifoldSpec, p: &Point, h: f64) -> Result<RiemannTensor> {
    let bare = spec.metric_only();
    let g = bare.metric_at(p)?;
    let g_inv = invert_metric(&g)?;
    let gamma = christoffel_fd(&bare, p, h)?;
    let dgamma = connection_derivative_fd(&bare, p, h)?;
    let r = riemann_from_connection(&g, &g_inv, &gamma, &dgamma);
    check_breakdown(&r)?;
    Ok(r)
}

/// Riemann, Ricci (`R_is = R_ijsl g^jl`) and scalar curvature by finite differences.
pub fn ricci_and_scalar(spec: &ManifoldSpec, p: &Point, h: f64) -> Result<CurvatureReport> {
    let riemann = riemann_at(spec, p, h)?;
    let g_inv = inverse_metric_at(spec, p)?;
    Ok(CurvatureReport::from_riemann(riemann, &g_inv))
}

/// Curvature assembled from [`christoffel_at`] and [`connection_derivative_at`]:
/// the path used by Jacobi propagation.
pub fn curvature_from_connection(spec: &ManifoldSpec, p: &Point) -> Result<CurvatureReport> {
    let g = spec.metric_at(p)?;
    let g_inv = invert_metric(&g)?;
    let gamma = christoffel_at(spec, p)?;
    let dgamma = connection_derivative_at(spec, p)?;
    let r = riemann_from_connection(&g, &g_inv, &gamma, &dgamma);
    Ok(CurvatureReport::from_riemann(r, &g_inv))
}

/// Closed-form curvature when available, otherwise [`ricci_and_scalar`] at the default step.
pub fn curvature_at(spec: &ManifoldSpec, p: &Point) -> Result<CurvatureReport> {
    match spec.analytic_curvature_at(p) {
        Some(r) => r,
        None => ricci_and_scalar(spec, p, DEFAULT_CURVATURE_STEP),
    }
}

/// Riemannian volume density `sqrt(det g)`.
pub fn volume_element_at(spec: &ManifoldSpec, p: &Point) -> Result<f64> {
    let g = spec.metric_at(p)?;
    Ok(g.determinant()?.sqrt())
}

/// Riemannian product `a × b` with block-diagonal metric.
///
/// Closed-form evaluators are carried over only when both factors provide them.
pub fn product(a: &ManifoldSpec, b: &ManifoldSpec) -> ManifoldSpec {
    let (na, nb) = (a.dim(), b.dim());
    let split = move |p: &Point| -> Result<(Point, Point)> {
        let c = p.coords();
        Ok((Point::from_slice(&c[..na])?, Point::from_slice(&c[na..na + nb])?))
    };
    let name = format!("{} x {}", a.name(), b.name());

    let (da, db) = (a.domain.clone(), b.domain.clone());
    let domain = move |c: &[f64]| da(&c[..na]) && db(&c[na..]);
    let (ma, mb) = (a.clone(), b.clone());
    let metric = move |p: &Point| {
        let (pa, pb) = split(p)?;
        Ok(ma.metric_at(&pa)?.block_diag(&mb.metric_at(&pb)?))
    };
    let mut out = ManifoldSpec::new(name, na + nb, domain, metric);

    if a.christoffel.is_some() && b.christoffel.is_some() {
        let (fa, fb) = (a.clone(), b.clone());
        out = out.with_christoffel(move |p| {
            let (pa, pb) = split(p)?;
            let ca = fa.analytic_christoffel_at(&pa).expect("checked above")?;
            let cb = fb.analytic_christoffel_at(&pb).expect("checked above")?;
            Ok(ca.block_diag(&cb))
        });
    }
    if a.connection_derivative.is_some() && b.connection_derivative.is_some() {
        let (fa, fb) = (a.clone(), b.clone());
        out = out.with_connection_derivative(move |p| {
            let (pa, pb) = split(p)?;
            let da = fa.analytic_connection_derivative_at(&pa).expect("checked above")?;
            let db = fb.analytic_connection_derivative_at(&pb).expect("checked above")?;
            Ok(da.block_diag(&db))
        });
    }
    if a.curvature.is_some() && b.curvature.is_some() {
        let (fa, fb) = (a.clone(), b.clone());
        out = out.with_curvature(move |p| {
            let (pa, pb) = split(p)?;
            let ra = fa.analytic_curvature_at(&pa).expect("checked above")?;
            let rb = fb.analytic_curvature_at(&pb).expect("checked above")?;
            Ok(ra.block_diag(&rb))
        });
    }
    out
}

/// Splits product coordinates into the factor blocks.
pub fn split_coords(coords: &[f64], first_dim: usize) -> (&[f64], &[f64]) {
    coords.split_at(first_dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Poincaré half-plane `(dx² + dy²)/y²`, curvature −1 everywhere.
    fn half_plane() -> ManifoldSpec {
        ManifoldSpec::new(
            "half-plane",
            2,
            |c| c[1] > 0.0,
            |p| {
                let y = p.coords()[1];
                Ok(MetricTensor::diagonal(&[1.0 / (y * y), 1.0 / (y * y)]))
            },
        )
    }

    #[test]
    fn identity_metric_inverts_to_identity() {
        let e = ManifoldSpec::euclidean(3);
        let p = Point::new(vec![0.3, -1.0, 2.0]).unwrap();
        let gi = inverse_metric_at(&e, &p).unwrap();
        assert_eq!(gi, MetricTensor::identity(3));
    }

    #[test]
    fn constant_metric_has_vanishing_connection() {
        let spec = ManifoldSpec::new(
            "const",
            2,
            |_| true,
            |_| Ok(MetricTensor::from_fn(2, |i, j| if i == j { 2.0 } else { 0.5 })),
        );
        let p = Point::new(vec![1.5, -0.5]).unwrap();
        let c = christoffel_fd(&spec, &p, DEFAULT_CHRISTOFFEL_STEP).unwrap();
        assert!(c.max_abs() < 1e-10);
        let r = riemann_at(&spec, &p, DEFAULT_CURVATURE_STEP).unwrap();
        assert!(r.max_abs_lowered() < 1e-8);
    }

    #[test]
    fn euclidean_curvature_is_exactly_zero() {
        let e = ManifoldSpec::euclidean(3);
        let p = Point::new(vec![0.1, 0.2, 0.3]).unwrap();
        let r = riemann_at(&e, &p, DEFAULT_CURVATURE_STEP).unwrap();
        assert_eq!(r.max_abs_lowered(), 0.0);
    }

    #[test]
    fn half_plane_connection_and_curvature() {
        let hp = half_plane();
        let p = Point::new(vec![0.2, 1.5]).unwrap();
        let c = christoffel_fd(&hp, &p, DEFAULT_CHRISTOFFEL_STEP).unwrap();
        let y = 1.5;
        // Γ^x_xy = −1/y, Γ^y_xx = 1/y, Γ^y_yy = −1/y
        assert!((c.get(0, 0, 1) + 1.0 / y).abs() < 1e-9);
        assert!((c.get(1, 0, 0) - 1.0 / y).abs() < 1e-9);
        assert!((c.get(1, 1, 1) + 1.0 / y).abs() < 1e-9);
        let rep = ricci_and_scalar(&hp, &p, DEFAULT_CURVATURE_STEP).unwrap();
        assert!((rep.scalar + 2.0).abs() < 1e-7, "scalar {}", rep.scalar);
        // sectional curvature −1 → R_1212 = −det g
        let det = 1.0 / y.powi(4);
        assert!((rep.riemann.lowered(0, 1, 0, 1) + det).abs() < 1e-7);
    }

    #[test]
    fn stencil_outside_domain_is_reported() {
        let hp = half_plane();
        let p = Point::new(vec![0.0, 1e-6]).unwrap();
        let err = christoffel_fd(&hp, &p, 1.0).unwrap_err();
        assert!(matches!(err, GeoError::OutOfDomain { .. }));
    }

    #[test]
    fn singular_metric_rejected() {
        let spec = ManifoldSpec::new("bad", 2, |_| true, |_| Ok(MetricTensor::diagonal(&[1.0, 1e-14])));
        let p = Point::new(vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            inverse_metric_at(&spec, &p),
            Err(GeoError::SingularMetric { .. })
        ));
    }

    #[test]
    fn product_with_point_is_unchanged() {
        let hp = half_plane();
        let prod = product(&hp, &ManifoldSpec::point());
        assert_eq!(prod.dim(), 2);
        let p = Point::new(vec![0.4, 0.7]).unwrap();
        assert_eq!(prod.metric_at(&p).unwrap(), hp.metric_at(&p).unwrap());
    }

    #[test]
    fn volume_element_of_identity_is_one() {
        let e = ManifoldSpec::euclidean(4);
        let p = Point::new(vec![0.0; 4]).unwrap();
        assert_eq!(volume_element_at(&e, &p).unwrap(), 1.0);
    }
}
