//! Run configuration: the strict JSON document plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use infogeo::dynamics::{QuadratureRule, QuadratureSpec};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    M4,
    M1,
    Gauss,
    Product,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<ModelConfig>>,
}

impl ModelConfig {
    pub fn of_kind(kind: ModelKind) -> Self {
        ModelConfig {
            kind,
            a: None,
            b: None,
            rho: None,
            r: None,
            factors: None,
        }
    }
}

/// Closed-form geodesic constants, or an explicit initial point and velocity.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicConfig {
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub coef_a: Option<Vec<f64>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub coef_b: Option<Vec<f64>>,
    #[serde(rename = "Cx", default, skip_serializing_if = "Option::is_none")]
    pub cx: Option<f64>,
    #[serde(rename = "Cy", default, skip_serializing_if = "Option::is_none")]
    pub cy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub rule: String,
    pub panels: usize,
    /// Nodes per panel for the Gauss-Legendre rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
}

impl QuadratureConfig {
    pub fn to_spec(&self) -> Result<QuadratureSpec, CliError> {
        let rule = match self.rule.as_str() {
            "trapezoid" => QuadratureRule::Trapezoid,
            "simpson" => QuadratureRule::Simpson,
            "gauss-legendre" => QuadratureRule::GaussLegendre(self.nodes.unwrap_or(8)),
            other => return Err(CliError::Config(format!("unknown quadrature rule {other:?}"))),
        };
        if self.nodes.is_some() && !matches!(rule, QuadratureRule::GaussLegendre(_)) {
            return Err(CliError::Config("quadrature.nodes only applies to gauss-legendre".into()));
        }
        QuadratureSpec::new(rule, self.panels).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Jacobi initial data: either `j0`/`dj0` (covariant derivative) or M4 closed-form constants.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JacobiConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dj0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a11: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<[f64; 3]>,
    /// Growth-fit window; its lower end is where the asymptotic regime is assumed to start.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
}

impl JacobiConfig {
    pub fn has_constants(&self) -> bool {
        self.a11.is_some() || self.a1.is_some() || self.a2.is_some()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<GeodesicConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jacobi: Option<JacobiConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Evaluation points for `curvature` (first one also used by `mc-fisher`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
}

impl RunConfig {
    pub fn new(model: ModelConfig) -> Self {
        RunConfig {
            model,
            geodesic: None,
            tau_max: None,
            step: None,
            quadrature: None,
            jacobi: None,
            mc: None,
            out_dir: None,
            points: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Structural checks that need no model evaluation.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        check_model(&self.model)?;
        if let Some(t) = self.tau_max {
            if !(t >= 0.0 && t.is_finite()) {
                return bad(format!("tau_max must be finite and non-negative, got {t}"));
            }
        }
        if let Some(h) = self.step {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("step must be positive, got {h}"));
            }
        }
        if let Some(q) = &self.quadrature {
            q.to_spec()?;
        }
        if let Some(mc) = &self.mc {
            if let Some(n) = mc.n {
                if n < 100 {
                    return bad(format!("mc.n must be at least 100, got {n}"));
                }
            }
        }
        if let Some(j) = &self.jacobi {
            if j.has_constants() && (j.j0.is_some() || j.dj0.is_some()) {
                return bad("jacobi: give either j0/dj0 or closed-form constants, not both".into());
            }
            if let Some([lo, hi]) = j.window {
                if !(lo > 0.0 && hi > lo) {
                    return bad(format!("jacobi.window must satisfy 0 < lo < hi, got [{lo}, {hi}]"));
                }
            }
        }
        if let Some(g) = &self.geodesic {
            if g.velocity.is_some() && g.point.is_none() {
                return bad("geodesic.velocity requires geodesic.point".into());
            }
        }
        Ok(())
    }
}

fn check_model(m: &ModelConfig) -> Result<(), CliError> {
    let bad = |s: &str| Err(CliError::Config(s.into()));
    match m.kind {
        ModelKind::Product => {
            if let Some(f) = &m.factors {
                if f.len() < 2 {
                    return bad("product model needs at least two factors");
                }
                f.iter().try_for_each(check_model)?;
            }
        }
        _ => {
            if m.factors.is_some() {
                return bad("factors only apply to the product model");
            }
        }
    }
    Ok(())
}

/// Command-line values that override the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<ModelKind>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub rho: Option<f64>,
    pub r: Option<f64>,
    pub points: Vec<Vec<f64>>,
    pub tau_max: Option<f64>,
    pub step: Option<f64>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub cx: Option<f64>,
    pub cy: Option<f64>,
    pub coef_a: Option<Vec<f64>>,
    pub coef_b: Option<Vec<f64>>,
}

impl Overrides {
    /// Merges onto `base` (or a fresh config when no file was given).
    pub fn apply(self, base: Option<RunConfig>) -> Result<RunConfig, CliError> {
        let mut cfg = match (base, self.model) {
            (Some(mut c), Some(kind)) => {
                if c.model.kind != kind {
                    c.model = ModelConfig::of_kind(kind);
                }
                c
            }
            (Some(c), None) => c,
            (None, Some(kind)) => RunConfig::new(ModelConfig::of_kind(kind)),
            (None, None) => return Err(CliError::Config("no model: pass --model or --config".into())),
        };
        let m = &mut cfg.model;
        m.a = self.a.or(m.a);
        m.b = self.b.or(m.b);
        m.rho = self.rho.or(m.rho);
        m.r = self.r.or(m.r);
        if !self.points.is_empty() {
            cfg.points = Some(self.points);
        }
        cfg.tau_max = self.tau_max.or(cfg.tau_max);
        cfg.step = self.step.or(cfg.step);
        cfg.out_dir = self.out_dir.or(cfg.out_dir);
        if self.seed.is_some() || self.n.is_some() {
            let mc = cfg.mc.get_or_insert_with(McConfig::default);
            mc.seed = self.seed.or(mc.seed);
            mc.n = self.n.or(mc.n);
        }
        if self.cx.is_some() || self.cy.is_some() || self.coef_a.is_some() || self.coef_b.is_some() {
            let g = cfg.geodesic.get_or_insert_with(GeodesicConfig::default);
            g.cx = self.cx.or(g.cx);
            g.cy = self.cy.or(g.cy);
            g.coef_a = self.coef_a.or(g.coef_a.take());
            g.coef_b = self.coef_b.or(g.coef_b.take());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `1,2.5,-3` into numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"{
        "model": {"kind": "product", "factors": [{"kind": "m4", "a": 1, "b": 2}, {"kind": "gauss", "r": 0.3}]},
        "geodesic": {"A": [1, 1, 1, 1], "B": [1, 0.1, 0.2, 0.05], "Cx": 2, "Cy": 1},
        "tau_max": 5, "step": 0.001,
        "quadrature": {"rule": "gauss-legendre", "panels": 4, "nodes": 6},
        "jacobi": {"j0": [0, 0, 0, 0, 0.1, 0.2, 0.3], "dj0": [0, 0, 0, 0, 0, 0, 0]},
        "mc": {"n": 1000, "seed": 3},
        "out_dir": "out"
    }"#;

    #[test]
    fn parses_full_document() {
        let c = RunConfig::from_json(FULL).unwrap();
        assert_eq!(c.model.factors.as_ref().unwrap().len(), 2);
        assert_eq!(c.geodesic.as_ref().unwrap().cx, Some(2.0));
        assert_eq!(c.quadrature.as_ref().unwrap().to_spec().unwrap().rule, QuadratureRule::GaussLegendre(6));
    }

    #[test]
    fn round_trip_is_idempotent() {
        let c = RunConfig::from_json(FULL).unwrap();
        let again = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.to_json(), again.to_json());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"model": {"kind": "m4", "a": 1, "b": 2}, "tau": 3}"#).is_err());
        assert!(RunConfig::from_json(r#"{"model": {"kind": "m4", "alpha": 1}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"model": {"kind": "m5"}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"model": {"kind": "gauss"}, "geodesic": {"cx": 1}}"#).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(RunConfig::from_json(r#"{"model": {"kind": "gauss"}, "step": 0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"model": {"kind": "gauss"}, "mc": {"n": 10}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"model": {"kind": "gauss"}, "quadrature": {"rule": "simpson", "panels": 0}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"model": {"kind": "product", "factors": [{"kind": "m4"}]}}"#).is_err());
    }

    #[test]
    fn overrides_win() {
        let base = RunConfig::from_json(r#"{"model": {"kind": "gauss", "r": 0.1}, "tau_max": 2}"#).unwrap();
        let o = Overrides {
            r: Some(0.5),
            seed: Some(9),
            ..Default::default()
        };
        let c = o.apply(Some(base)).unwrap();
        assert_eq!(c.model.r, Some(0.5));
        assert_eq!(c.tau_max, Some(2.0));
        assert_eq!(c.mc.unwrap().seed, Some(9));
        assert!(Overrides::default().apply(None).is_err());
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list("1, 2.5,-3").unwrap(), vec![1.0, 2.5, -3.0]);
        assert!(parse_list("1,x").is_err());
    }
}
