//! Products of independent one-parameter exponential families,
//! `p(x, θ) = h(x) exp(Σ_s η_s(θ_s) T_s(x_s) − γ_s(θ_s))`.
//!
//! With uncoupled components the Fisher metric is diagonal,
//! `g_ss = (γ″η′ − γ′η″)/η′`, only `Γ^s_ss` survive and the manifold is flat.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{GeoError, Result};
use crate::manifold::{
    ChristoffelTensor, ConnectionDerivative, CurvatureReport, ManifoldSpec, MetricTensor, Point,
    RiemannTensor,
};

/// Value and first four derivatives of a scalar function at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            value: self.value + o.value,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
            d3: self.d3 + o.d3,
            d4: self.d4 + o.d4,
        }
    }
}

impl Jet {
    /// `slope * θ + offset`
    pub fn linear(theta: f64, slope: f64, offset: f64) -> Jet {
        Jet {
            value: slope * theta + offset,
            d1: slope,
            ..Jet::default()
        }
    }

    /// `scale * ln θ + offset`
    pub fn log(theta: f64, scale: f64, offset: f64) -> Jet {
        let t = theta;
        Jet {
            value: scale * t.ln() + offset,
            d1: scale / t,
            d2: -scale / (t * t),
            d3: 2.0 * scale / (t * t * t),
            d4: -6.0 * scale / (t * t * t * t),
        }
    }

    /// `scale * θ^p`
    pub fn power(theta: f64, scale: f64, p: f64) -> Jet {
        let t = theta;
        Jet {
            value: scale * t.powf(p),
            d1: scale * p * t.powf(p - 1.0),
            d2: scale * p * (p - 1.0) * t.powf(p - 2.0),
            d3: scale * p * (p - 1.0) * (p - 2.0) * t.powf(p - 3.0),
            d4: scale * p * (p - 1.0) * (p - 2.0) * (p - 3.0) * t.powf(p - 4.0),
        }
    }
}

pub type JetFn = Arc<dyn Fn(f64) -> Jet + Send + Sync>;

/// The function of the data that multiplies `η` in the exponent.
#[derive(Debug, Clone, PartialEq)]
pub enum SufficientStatistic {
    /// `T(x) = x`
    Identity,
    /// `T(x) = ln x`
    Log,
    /// `T(x) = |x|`
    Abs,
    /// `T(x) = x^b`
    Power(f64),
}

impl SufficientStatistic {
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            SufficientStatistic::Identity => x,
            SufficientStatistic::Log => x.ln(),
            SufficientStatistic::Abs => x.abs(),
            SufficientStatistic::Power(b) => x.powf(*b),
        }
    }
}

/// One factor `exp(η(θ) T(x) − γ(θ))` of the joint density.
#[derive(Clone)]
pub struct ExpFamilyComponent {
    name: String,
    eta: JetFn,
    gamma: JetFn,
    domain: (f64, f64),
    statistic: SufficientStatistic,
}

impl fmt::Debug for ExpFamilyComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExpFamilyComponent")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("statistic", &self.statistic)
            .finish()
    }
}

impl ExpFamilyComponent {
    /// `eta` and `gamma` must return exact derivatives up to fourth order on
    /// the open interval `domain`.
    pub fn new(
        name: impl Into<String>,
        eta: impl Fn(f64) -> Jet + Send + Sync + 'static,
        gamma: impl Fn(f64) -> Jet + Send + Sync + 'static,
        domain: (f64, f64),
        statistic: SufficientStatistic,
    ) -> Self {
        ExpFamilyComponent {
            name: name.into(),
            eta: Arc::new(eta),
            gamma: Arc::new(gamma),
            domain,
            statistic,
        }
    }

    /// Poisson with mean θ: `η = ln θ`, `γ = θ`, `T = x`.
    pub fn poisson() -> Self {
        Self::new(
            "poisson",
            |t| Jet::log(t, 1.0, 0.0),
            |t| Jet::linear(t, 1.0, 0.0),
            (0.0, f64::INFINITY),
            SufficientStatistic::Identity,
        )
    }

    /// Pareto with known scale `a` and shape θ: `η = −(θ+1)`, `γ = −ln θ − θ ln a`, `T = ln x`.
    pub fn pareto(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(GeoError::InvalidParameter(format!("Pareto scale a must be > 0, got {a}")));
        }
        let ln_a = a.ln();
        Ok(Self::new(
            format!("pareto(a={a})"),
            |t| Jet::linear(t, -1.0, -1.0),
            move |t| Jet::log(t, -1.0, 0.0) + Jet::linear(t, -ln_a, 0.0),
            (0.0, f64::INFINITY),
            SufficientStatistic::Log,
        ))
    }

    /// Laplace with scale θ: `η = −1/θ`, `γ = ln(2θ)`, `T = |x|`.
    pub fn laplace() -> Self {
        Self::new(
            "laplace",
            |t| Jet::power(t, -1.0, -1.0),
            |t| Jet::log(t, 1.0, std::f64::consts::LN_2),
            (0.0, f64::INFINITY),
            SufficientStatistic::Abs,
        )
    }

    /// Weibull with known shape `b` and scale θ: `η = −θ^{−b}`, `γ = b ln θ − ln b`, `T = x^b`.
    pub fn weibull(b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(GeoError::InvalidParameter(format!("Weibull shape b must be > 0, got {b}")));
        }
        Ok(Self::new(
            format!("weibull(b={b})"),
            move |t| Jet::power(t, -1.0, -b),
            move |t| Jet::log(t, b, -b.ln()),
            (0.0, f64::INFINITY),
            SufficientStatistic::Power(b),
        ))
    }

    /// Gamma with known shape ρ parameterised by its mean θ: `η = −ρ/θ`, `γ = ρ ln θ`, `T = x`.
    pub fn gamma_mean(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(GeoError::InvalidParameter(format!("Gamma shape rho must be > 0, got {rho}")));
        }
        Ok(Self::new(
            format!("gamma(rho={rho})"),
            move |t| Jet::power(t, -rho, -1.0),
            move |t| Jet::log(t, rho, 0.0),
            (0.0, f64::INFINITY),
            SufficientStatistic::Identity,
        ))
    }

    /// Exponential with mean θ: `η = −1/θ`, `γ = ln θ`, `T = x`.
    pub fn exponential_mean() -> Self {
        Self::new(
            "exponential",
            |t| Jet::power(t, -1.0, -1.0),
            |t| Jet::log(t, 1.0, 0.0),
            (0.0, f64::INFINITY),
            SufficientStatistic::Identity,
        )
    }

    /// Unit-variance Gaussian location family: `η = θ`, `γ = θ²/2`.
    pub fn gaussian_location() -> Self {
        Self::new(
            "gaussian-location",
            |t| Jet::linear(t, 1.0, 0.0),
            |t| Jet::power(t, 0.5, 2.0),
            (f64::NEG_INFINITY, f64::INFINITY),
            SufficientStatistic::Identity,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn statistic(&self) -> &SufficientStatistic {
        &self.statistic
    }

    pub fn eta(&self, theta: f64) -> Jet {
        (self.eta)(theta)
    }

    pub fn gamma(&self, theta: f64) -> Jet {
        (self.gamma)(theta)
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta.is_finite() && theta > self.domain.0 && theta < self.domain.1
    }

    fn check(&self, theta: f64) -> Result<()> {
        if self.contains(theta) {
            Ok(())
        } else {
            Err(GeoError::OutOfDomain {
                manifold: self.name.clone(),
                coords: vec![theta],
            })
        }
    }

    /// `N = γ″η′ − γ′η″` and its first two derivatives.
    fn numerator(&self, theta: f64) -> (f64, f64, f64, Jet) {
        let e = self.eta(theta);
        let g = self.gamma(theta);
        let n0 = g.d2 * e.d1 - g.d1 * e.d2;
        let n1 = g.d3 * e.d1 - g.d1 * e.d3;
        let n2 = g.d4 * e.d1 + g.d3 * e.d2 - g.d2 * e.d3 - g.d1 * e.d4;
        (n0, n1, n2, e)
    }

    /// Fisher information `g = (γ″η′ − γ′η″)/η′`.
    pub fn information(&self, theta: f64) -> Result<f64> {
        self.check(theta)?;
        let (n0, _, _, e) = self.numerator(theta);
        let value = n0 / e.d1;
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(GeoError::NonPositiveInformation {
                component: self.name.clone(),
                theta,
                value,
            })
        }
    }

    /// `Γ^s_ss = ½ [(γ‴η′ − γ′η‴)/(γ″η′ − γ′η″) − η″/η′]`.
    pub fn christoffel(&self, theta: f64) -> Result<f64> {
        self.information(theta)?;
        let (n0, n1, _, e) = self.numerator(theta);
        Ok(0.5 * (n1 / n0 - e.d2 / e.d1))
    }

    /// `d Γ^s_ss / dθ_s`.
    pub fn christoffel_derivative(&self, theta: f64) -> Result<f64> {
        self.information(theta)?;
        let (n0, n1, n2, e) = self.numerator(theta);
        let q = n1 / n0;
        let w = e.d2 / e.d1;
        Ok(0.5 * (n2 / n0 - q * q - e.d3 / e.d1 + w * w))
    }

    /// `E[T] = γ′/η′` and `Var[T] = (γ″η′ − γ′η″)/η′³`.
    pub fn moments(&self, theta: f64) -> Result<(f64, f64)> {
        self.information(theta)?;
        let (n0, _, _, e) = self.numerator(theta);
        let g = self.gamma(theta);
        Ok((g.d1 / e.d1, n0 / (e.d1 * e.d1 * e.d1)))
    }
}

/// Mean and variance of the sufficient statistic of `c` at `theta`.
pub fn sufficient_stat_moments(c: &ExpFamilyComponent, theta: f64) -> Result<(f64, f64)> {
    c.moments(theta)
}

/// A `k`-component exponential-family statistical manifold.
#[derive(Debug, Clone)]
pub struct ExpFamilyManifold {
    name: String,
    components: Vec<ExpFamilyComponent>,
    /// Human-readable description of the carrier density `h(x)`.
    base_measure: String,
}

impl ExpFamilyManifold {
    pub fn new(
        name: impl Into<String>,
        components: Vec<ExpFamilyComponent>,
        base_measure: impl Into<String>,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(GeoError::InvalidParameter("need at least one component".into()));
        }
        Ok(ExpFamilyManifold {
            name: name.into(),
            components,
            base_measure: base_measure.into(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ExpFamilyComponent] {
        &self.components
    }

    pub fn base_measure(&self) -> &str {
        &self.base_measure
    }

    pub fn contains(&self, coords: &[f64]) -> bool {
        coords.len() == self.dim() && self.components.iter().zip(coords).all(|(c, &t)| c.contains(t))
    }

    fn check(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(GeoError::DimensionMismatch {
                expected: self.dim(),
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

    /// The manifold as a [`ManifoldSpec`] with closed-form connection, its
    /// derivative, and (zero) curvature.
    pub fn spec(&self) -> ManifoldSpec {
        let n = self.dim();
        let (m1, m2, m3, m4) = (self.clone(), self.clone(), self.clone(), self.clone());
        ManifoldSpec::new(
            self.name.clone(),
            n,
            move |c| m1.contains(c),
            move |p| expfam_metric(&m2, p),
        )
        .with_christoffel(move |p| expfam_christoffel(&m3, p))
        .with_connection_derivative(move |p| expfam_connection_derivative(&m4, p))
        .with_curvature(move |_| {
            Ok(CurvatureReport {
                riemann: RiemannTensor::zeros(n),
                ricci: DMatrix::zeros(n, n),
                scalar: 0.0,
            })
        })
    }
}

/// Diagonal Fisher metric of an exponential-family manifold.
pub fn expfam_metric(m: &ExpFamilyManifold, p: &Point) -> Result<MetricTensor> {
    m.check(p)?;
    let diag = m
        .components
        .iter()
        .zip(p.coords())
        .map(|(c, &t)| c.information(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricTensor::diagonal(&diag))
}

/// Closed-form connection: only `Γ^i_ii` are non-zero.
pub fn expfam_christoffel(m: &ExpFamilyManifold, p: &Point) -> Result<ChristoffelTensor> {
    m.check(p)?;
    let mut out = ChristoffelTensor::zeros(m.dim());
    for (i, (c, &t)) in m.components.iter().zip(p.coords()).enumerate() {
        out.set(i, i, i, c.christoffel(t)?);
    }
    Ok(out)
}

/// `∂_h Γ^l_ij`; only `∂_i Γ^i_ii` are non-zero.
pub fn expfam_connection_derivative(m: &ExpFamilyManifold, p: &Point) -> Result<ConnectionDerivative> {
    m.check(p)?;
    let mut out = ConnectionDerivative::zeros(m.dim());
    for (i, (c, &t)) in m.components.iter().zip(p.coords()).enumerate() {
        out.by_coordinate[i].set(i, i, i, c.christoffel_derivative(t)?);
    }
    Ok(out)
}

/// Joint Poisson / Pareto(a) / Laplace / Weibull(b) manifold.
pub fn build_m4(a: f64, b: f64) -> Result<ExpFamilyManifold> {
    ExpFamilyManifold::new(
        format!("M4(a={a}, b={b})"),
        vec![
            ExpFamilyComponent::poisson(),
            ExpFamilyComponent::pareto(a)?,
            ExpFamilyComponent::laplace(),
            ExpFamilyComponent::weibull(b)?,
        ],
        format!("1/x1! * 1/x2 * 1/2 * b x4^(b-1), b={b}"),
    )
}

/// Joint Gamma(shape ρ, mean θ₁) / Exponential(mean θ₂) manifold.
///
/// The normalisers enter as `γ₁ = ρ ln θ₁` and `γ₂ = ln θ₂`; the opposite sign
/// gives negative "information" and is rejected by [`ExpFamilyComponent::information`].
pub fn build_m1_peng(rho: f64) -> Result<ExpFamilyManifold> {
    ExpFamilyManifold::new(
        format!("M1(rho={rho})"),
        vec![
            ExpFamilyComponent::gamma_mean(rho)?,
            ExpFamilyComponent::exponential_mean(),
        ],
        format!("x1^(rho-1) rho^rho / Gamma(rho), rho={rho}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{christoffel_fd, riemann_at, DEFAULT_CHRISTOFFEL_STEP, DEFAULT_CURVATURE_STEP};

    fn pt(c: &[f64]) -> Point {
        Point::from_slice(c).unwrap()
    }

    #[test]
    fn m4_metric_entries() {
        let m = build_m4(1.0, 1.0).unwrap();
        let g = expfam_metric(&m, &pt(&[2.0, 1.0, 1.0, 1.0])).unwrap();
        for (i, want) in [0.5, 1.0, 1.0, 1.0].iter().enumerate() {
            assert!((g.get(i, i) - want).abs() < 1e-15);
        }
        let m = build_m4(1.0, 2.0).unwrap();
        let g = expfam_metric(&m, &pt(&[1.0, 1.0, 1.0, 1.0])).unwrap();
        assert!((g.get(3, 3) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn weibull_with_unit_shape_gives_inverse_square() {
        let m = build_m4(1.0, 1.0).unwrap();
        let g = expfam_metric(&m, &pt(&[1.0, 1.0, 1.0, 3.0])).unwrap();
        assert!((g.get(3, 3) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_location_is_unit_information() {
        let c = ExpFamilyComponent::gaussian_location();
        assert_eq!(c.information(0.7).unwrap(), 1.0);
        assert_eq!(c.christoffel(0.7).unwrap(), 0.0);
        let (mean, var) = c.moments(0.7).unwrap();
        assert_eq!(mean, 0.7);
        assert_eq!(var, 1.0);
    }

    #[test]
    fn component_christoffels() {
        assert!((ExpFamilyComponent::poisson().christoffel(2.0).unwrap() + 0.25).abs() < 1e-15);
        assert!((ExpFamilyComponent::pareto(1.5).unwrap().christoffel(3.0).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        assert!((ExpFamilyComponent::laplace().christoffel(3.0).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        assert!((ExpFamilyComponent::weibull(2.5).unwrap().christoffel(3.0).unwrap() + 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn christoffel_derivative_matches_difference_quotient() {
        let comps = [
            ExpFamilyComponent::poisson(),
            ExpFamilyComponent::pareto(2.0).unwrap(),
            ExpFamilyComponent::laplace(),
            ExpFamilyComponent::weibull(1.7).unwrap(),
            ExpFamilyComponent::gamma_mean(3.0).unwrap(),
        ];
        for c in &comps {
            let t = 1.3;
            let h = 1e-4;
            let fd = (c.christoffel(t + h).unwrap() - c.christoffel(t - h).unwrap()) / (2.0 * h);
            assert!((fd - c.christoffel_derivative(t).unwrap()).abs() < 1e-7, "{}", c.name());
        }
    }

    #[test]
    fn moments_of_named_components() {
        let (m, v) = ExpFamilyComponent::poisson().moments(2.0).unwrap();
        assert!((m - 2.0).abs() < 1e-15 && (v - 2.0).abs() < 1e-15);
        let (m, v) = ExpFamilyComponent::laplace().moments(1.0).unwrap();
        assert!((m - 1.0).abs() < 1e-15 && (v - 1.0).abs() < 1e-15);
        // ln(x) for Pareto(a) shape θ: ln a + Exp(θ)
        let (m, v) = ExpFamilyComponent::pareto(2.0).unwrap().moments(4.0).unwrap();
        assert!((m - (2.0f64.ln() + 0.25)).abs() < 1e-15 && (v - 1.0 / 16.0).abs() < 1e-15);
        // x^b for Weibull(b) scale θ: Exp with mean θ^b
        let (m, v) = ExpFamilyComponent::weibull(2.0).unwrap().moments(1.5).unwrap();
        assert!((m - 2.25).abs() < 1e-14 && (v - 2.25f64.powi(2)).abs() < 1e-13);
    }

    #[test]
    fn m1_metric() {
        let m = build_m1_peng(1.0).unwrap();
        let g = expfam_metric(&m, &pt(&[1.0, 2.0])).unwrap();
        assert!((g.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((g.get(1, 1) - 0.25).abs() < 1e-15);
        let m = build_m1_peng(2.0).unwrap();
        let g = expfam_metric(&m, &pt(&[1.0, 2.0])).unwrap();
        assert!((g.get(0, 0) - 2.0).abs() < 1e-15);
        // second factor carries the same information as a Laplace scale
        let lap = ExpFamilyComponent::laplace();
        assert!((g.get(1, 1) - lap.information(2.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn flipped_normaliser_sign_is_rejected() {
        let rho = 1.0;
        let c = ExpFamilyComponent::new(
            "gamma-flipped",
            move |t| Jet::power(t, -rho, -1.0),
            move |t| Jet::log(t, -rho, 0.0),
            (0.0, f64::INFINITY),
            SufficientStatistic::Identity,
        );
        assert!(matches!(c.information(1.0), Err(GeoError::NonPositiveInformation { .. })));
    }

    #[test]
    fn invalid_constants_rejected() {
        assert!(build_m4(0.0, 1.0).is_err());
        assert!(build_m4(1.0, -2.0).is_err());
        assert!(build_m1_peng(0.0).is_err());
    }

    #[test]
    fn m4_out_of_domain() {
        let m = build_m4(1.0, 1.0).unwrap();
        assert!(matches!(
            expfam_metric(&m, &pt(&[1.0, -1.0, 1.0, 1.0])),
            Err(GeoError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn m4_fd_connection_and_flatness() {
        let spec = build_m4(1.0, 2.0).unwrap().spec();
        let p = pt(&[2.0, 0.7, 1.3, 2.2]);
        let fd = christoffel_fd(&spec, &p, DEFAULT_CHRISTOFFEL_STEP).unwrap();
        assert!((fd.get(0, 0, 0) + 0.25).abs() < 1e-9);
        let an = spec.analytic_christoffel_at(&p).unwrap().unwrap();
        assert!(fd.max_abs_diff(&an) < 1e-8);
        let r = riemann_at(&spec, &p, DEFAULT_CURVATURE_STEP).unwrap();
        assert!(r.max_abs_lowered() < 1e-6);
    }
}
