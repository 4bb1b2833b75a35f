//! Resolution of a [`ModelConfig`] into manifolds, closed forms and sampling specs.

use infogeo::dynamics::Curve;
use infogeo::fisher_mc::DistSpec;
use infogeo::manifold::{product, split_coords, ManifoldSpec, Point};
use infogeo::models::{
    build_m1_peng, build_m4, gauss_arclength, gauss_geodesic, gauss_manifold, m4_arclength, m4_geodesic,
    GaussGeodesicParams, M4GeodesicParams,
};
use infogeo::GeoError;

use crate::config::{GeodesicConfig, ModelConfig, ModelKind};
use crate::error::{config_err, CliError};

const DEFAULT_A: [f64; 4] = [1.0, 1.0, 1.0, 1.0];
const DEFAULT_B: [f64; 4] = [1.0, 0.1, 0.2, 0.05];
const DEFAULT_CX: f64 = 2.0;
const DEFAULT_CY: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    M4 { a: f64, b: f64 },
    M1 { rho: f64 },
    Gauss { r: f64 },
    Product(Vec<Model>),
}

fn need(v: Option<f64>, what: &str, kind: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Config(format!("model {kind} needs `{what}`")))
}

impl Model {
    pub fn from_config(m: &ModelConfig) -> Result<Model, CliError> {
        Ok(match m.kind {
            ModelKind::M4 => Model::M4 {
                a: need(m.a, "a", "m4")?,
                b: need(m.b, "b", "m4")?,
            },
            ModelKind::M1 => Model::M1 {
                rho: need(m.rho, "rho", "m1")?,
            },
            ModelKind::Gauss => Model::Gauss {
                r: need(m.r, "r", "gauss")?,
            },
            ModelKind::Product => match &m.factors {
                Some(f) => Model::Product(f.iter().map(Model::from_config).collect::<Result<_, _>>()?),
                // the M4 x Gaussian product, parameterised by the product's own fields
                None => Model::Product(vec![
                    Model::M4 {
                        a: need(m.a, "a", "product")?,
                        b: need(m.b, "b", "product")?,
                    },
                    Model::Gauss {
                        r: need(m.r, "r", "product")?,
                    },
                ]),
            },
        })
    }

    pub fn spec(&self) -> Result<ManifoldSpec, CliError> {
        match self {
            Model::M4 { a, b } => Ok(build_m4(*a, *b).map_err(config_err)?.spec()),
            Model::M1 { rho } => Ok(build_m1_peng(*rho).map_err(config_err)?.spec()),
            Model::Gauss { r } => gauss_manifold(*r).map_err(config_err),
            Model::Product(fs) => {
                let mut it = fs.iter();
                let first = it.next().expect("product has factors").spec()?;
                it.try_fold(first, |acc, f| Ok(product(&acc, &f.spec()?)))
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::M4 { .. } => 4,
            Model::M1 { .. } => 2,
            Model::Gauss { .. } => 3,
            Model::Product(fs) => fs.iter().map(Model::dim).sum(),
        }
    }

    pub fn default_point(&self) -> Vec<f64> {
        match self {
            Model::M4 { .. } => vec![1.0; 4],
            Model::M1 { .. } => vec![1.0; 2],
            Model::Gauss { .. } => vec![0.0, 0.0, 1.0],
            Model::Product(fs) => fs.iter().flat_map(Model::default_point).collect(),
        }
    }

    /// Velocity used when neither closed-form constants nor a velocity are given.
    fn default_velocity(&self) -> Vec<f64> {
        match self {
            Model::M4 { .. } => vec![2.0, 0.1, 0.2, 0.05],
            Model::M1 { .. } => vec![1.0, 0.5],
            Model::Gauss { .. } => vec![0.5, 0.25, -0.1],
            Model::Product(fs) => fs.iter().flat_map(Model::default_velocity).collect(),
        }
    }

    /// Scalar curvature known in closed form for the model.
    pub fn expected_scalar(&self) -> f64 {
        match self {
            Model::M4 { .. } | Model::M1 { .. } => 0.0,
            Model::Gauss { .. } => -1.5,
            Model::Product(fs) => fs.iter().map(Model::expected_scalar).sum(),
        }
    }

    /// Splits product coordinates into per-factor slices.
    pub fn split<'a>(&self, coords: &'a [f64]) -> Vec<&'a [f64]> {
        match self {
            Model::Product(fs) => {
                let mut rest = coords;
                let mut out = Vec::new();
                for f in fs {
                    let (head, tail) = split_coords(rest, f.dim());
                    out.push(head);
                    rest = tail;
                }
                out
            }
            _ => vec![coords],
        }
    }

    pub fn dist_spec(&self, theta: &[f64]) -> Result<DistSpec, CliError> {
        if theta.len() != self.dim() {
            return Err(CliError::Config(format!("point has {} coordinates, model needs {}", theta.len(), self.dim())));
        }
        match self {
            Model::M4 { a, b } => {
                DistSpec::m4(*a, *b, [theta[0], theta[1], theta[2], theta[3]]).map_err(config_err)
            }
            Model::Gauss { r } => DistSpec::bivariate_gaussian(*r, theta[0], theta[1], theta[2]).map_err(config_err),
            Model::M1 { .. } => Err(CliError::Config("mc-fisher has no sampler for the m1 model".into())),
            Model::Product(fs) => {
                let parts = fs
                    .iter()
                    .zip(self.split(theta))
                    .map(|(f, t)| f.dist_spec(t))
                    .collect::<Result<Vec<_>, _>>()?;
                DistSpec::joint(parts).map_err(config_err)
            }
        }
    }

    /// Closed-form geodesic described by `g`, if the model has one.
    pub fn closed_form(&self, g: &GeodesicConfig) -> Result<Option<ClosedForm>, CliError> {
        if let Some(p) = &g.point {
            if let Model::M4 { a, b } = self {
                let v = g.velocity.clone().unwrap_or_else(|| vec![0.0; 4]);
                return Ok(M4GeodesicParams::from_initial(p, &v, *a, *b).ok().map(ClosedForm::M4));
            }
            return Ok(None);
        }
        Ok(match self {
            Model::M4 { a, b } => {
                let ca = four(g.coef_a.as_deref(), DEFAULT_A, "A")?;
                let cb = four(g.coef_b.as_deref(), DEFAULT_B, "B")?;
                Some(ClosedForm::M4(M4GeodesicParams::new(ca, cb, *a, *b).map_err(config_err)?))
            }
            Model::Gauss { r } => {
                let p = GaussGeodesicParams::new(g.cx.unwrap_or(DEFAULT_CX), g.cy.unwrap_or(DEFAULT_CY), *r)
                    .map_err(config_err)?;
                if p.c() <= 0.0 {
                    return Err(CliError::Config("Cx = Cy = 0 gives a degenerate geodesic".into()));
                }
                Some(ClosedForm::Gauss(p))
            }
            Model::M1 { .. } => None,
            Model::Product(fs) => {
                let parts = fs.iter().map(|f| f.closed_form(g)).collect::<Result<Vec<_>, _>>()?;
                parts
                    .into_iter()
                    .zip(fs)
                    .map(|(c, f)| c.map(|c| (c, f.dim())))
                    .collect::<Option<Vec<_>>>()
                    .map(ClosedForm::Product)
            }
        })
    }

    /// Initial point and velocity: explicit values, else the closed form at `τ = 0`, else defaults.
    pub fn initial_data(&self, g: &GeodesicConfig, cf: Option<&ClosedForm>) -> Result<(Point, Vec<f64>), CliError> {
        let n = self.dim();
        let (p, v) = if let Some(p) = &g.point {
            (p.clone(), g.velocity.clone().unwrap_or_else(|| vec![0.0; n]))
        } else if let Some(cf) = cf {
            let (p, v) = cf.eval(0.0)?;
            (p.into_coords(), v)
        } else {
            (self.default_point(), self.default_velocity())
        };
        if p.len() != n || v.len() != n {
            return Err(CliError::Config(format!(
                "initial point/velocity have {}/{} coordinates, model needs {n}",
                p.len(),
                v.len()
            )));
        }
        Ok((Point::new(p).map_err(config_err)?, v))
    }
}

fn four(v: Option<&[f64]>, default: [f64; 4], name: &str) -> Result<[f64; 4], CliError> {
    match v {
        None => Ok(default),
        Some(s) => s
            .try_into()
            .map_err(|_| CliError::Config(format!("geodesic.{name} needs 4 entries, got {}", s.len()))),
    }
}

/// A closed-form geodesic, possibly stacked over product factors.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    M4(M4GeodesicParams),
    Gauss(GaussGeodesicParams),
    Product(Vec<(ClosedForm, usize)>),
}

impl ClosedForm {
    pub fn arclength(&self, tau: f64) -> Result<f64, GeoError> {
        match self {
            ClosedForm::M4(p) => m4_arclength(p, tau),
            ClosedForm::Gauss(p) => gauss_arclength(p, tau),
            ClosedForm::Product(parts) => {
                let s = parts.iter().map(|(c, _)| c.arclength(tau).map(|l| l * l)).sum::<Result<f64, _>>()?;
                Ok(s.sqrt())
            }
        }
    }
}

impl Curve for ClosedForm {
    fn eval(&self, tau: f64) -> Result<(Point, Vec<f64>), GeoError> {
        match self {
            ClosedForm::M4(p) => m4_geodesic(p, tau),
            ClosedForm::Gauss(p) => gauss_geodesic(p, tau),
            ClosedForm::Product(parts) => {
                let mut x = Vec::new();
                let mut v = Vec::new();
                for (c, _) in parts {
                    let (p, w) = c.eval(tau)?;
                    x.extend_from_slice(p.coords());
                    v.extend(w);
                }
                Ok((Point::new(x)?, v))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: ModelKind) -> ModelConfig {
        ModelConfig {
            a: Some(1.0),
            b: Some(2.0),
            r: Some(0.3),
            ..ModelConfig::of_kind(kind)
        }
    }

    #[test]
    fn default_product_is_m4_times_gauss() {
        let m = Model::from_config(&cfg(ModelKind::Product)).unwrap();
        assert_eq!(m.dim(), 7);
        assert_eq!(m.spec().unwrap().dim(), 7);
        assert_eq!(m.expected_scalar(), -1.5);
        assert_eq!(m.split(&[1., 2., 3., 4., 5., 6., 7.]), vec![&[1., 2., 3., 4.][..], &[5., 6., 7.][..]]);
    }

    #[test]
    fn missing_parameters_are_config_errors() {
        let m = ModelConfig::of_kind(ModelKind::M4);
        assert!(matches!(Model::from_config(&m), Err(CliError::Config(_))));
        let bad = ModelConfig {
            r: Some(1.0),
            ..ModelConfig::of_kind(ModelKind::Gauss)
        };
        assert!(matches!(Model::from_config(&bad).unwrap().spec(), Err(CliError::Config(_))));
    }

    #[test]
    fn product_closed_form_stacks() {
        let m = Model::from_config(&cfg(ModelKind::Product)).unwrap();
        let cf = m.closed_form(&GeodesicConfig::default()).unwrap().unwrap();
        let (p, v) = cf.eval(0.5).unwrap();
        assert_eq!(p.dim(), 7);
        assert_eq!(v.len(), 7);
        let l = cf.arclength(2.0).unwrap();
        let ClosedForm::Product(parts) = &cf else { panic!() };
        let want = (parts[0].0.arclength(2.0).unwrap().powi(2) + parts[1].0.arclength(2.0).unwrap().powi(2)).sqrt();
        assert!((l - want).abs() < 1e-14);
    }

    #[test]
    fn m1_has_no_closed_form_or_sampler() {
        let m = Model::from_config(&ModelConfig {
            rho: Some(2.0),
            ..ModelConfig::of_kind(ModelKind::M1)
        })
        .unwrap();
        assert!(m.closed_form(&GeodesicConfig::default()).unwrap().is_none());
        assert!(m.dist_spec(&[1.0, 1.0]).is_err());
        let (p, v) = m.initial_data(&GeodesicConfig::default(), None).unwrap();
        assert_eq!((p.dim(), v.len()), (2, 2));
    }
}
