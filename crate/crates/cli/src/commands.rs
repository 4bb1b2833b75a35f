//! The subcommands. Each writes its files and a JSON report under the output root.

use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use infogeo::dynamics::{
    arc_length, arc_length_curve, average_volume, classify_growth, covariant_derivative, integrate_geodesic,
    integrate_jacobi, jacobi_norm_sq, sample_curve, sup_relative_difference, volume_region, volume_region_separable, write_jacobi_csv,
    write_trajectory_csv, Curve, GrowthClassification, GrowthKind, QuadratureSpec, Trajectory,
};
use infogeo::fisher_mc::estimate_fisher_mc;
use infogeo::manifold::{
    christoffel_at, curvature_from_connection, ricci_and_scalar, riemann_at, ManifoldSpec, Point, SymmetryResiduals,
    DEFAULT_CURVATURE_STEP,
};
use infogeo::models::{
    gauss_average_volume, gauss_geodesic_average_volume, gauss_geodesic_volume_region, gauss_printed_curve,
    gauss_volume_region, m4_average_volume, m4_average_volume_printed, m4_jacobi, m4_jacobi_norm_sq, m4_jacobi_rate,
    m4_volume_region, m4_volume_region_printed, M4JacobiConstants,
};
use infogeo::verify::{criterion_6_m4_setup, gauss_with_flipped_christoffel, run_all, VerifyOptions, VerifyReport};

use crate::config::{GeodesicConfig, JacobiConfig, RunConfig};
use crate::error::{config_err, CliError};
use crate::model::{ClosedForm, Model};
use crate::report::{resolve_out_dir, Compared, OutDir, Report};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_GEODESIC_TAU: f64 = 5.0;
pub const DEFAULT_JACOBI_TAU: f64 = 50.0;
pub const DEFAULT_VOLUME_TAU: f64 = 1.0;
pub const DEFAULT_MC_N: usize = 100_000;
/// Relative difference above which a published formula is flagged.
pub const DISCREPANCY_THRESHOLD: f64 = 1e-6;

/// What a subcommand leaves behind.
#[derive(Debug)]
pub struct Outcome {
    pub report: PathBuf,
    pub verdicts: Vec<String>,
}

fn finish<T: Serialize>(
    command: &str,
    cfg: Option<&RunConfig>,
    results: T,
    verdicts: Vec<String>,
    out: &mut OutDir,
) -> Result<Outcome, CliError> {
    let report = Report {
        command: command.into(),
        config: cfg.cloned(),
        results,
        verdicts: verdicts.clone(),
        files: out.files(),
    };
    Ok(Outcome {
        report: out.finish(&report)?,
        verdicts,
    })
}

fn out_dir(cfg: &RunConfig) -> Result<OutDir, CliError> {
    OutDir::create(resolve_out_dir(cfg.out_dir.as_deref()))
}

fn model_and_spec(cfg: &RunConfig) -> Result<(Model, ManifoldSpec), CliError> {
    let m = Model::from_config(&cfg.model)?;
    let s = m.spec()?;
    Ok((m, s))
}

fn user_point(spec: &ManifoldSpec, c: &[f64]) -> Result<Point, CliError> {
    if c.len() != spec.dim() {
        return Err(CliError::Config(format!("point {c:?} has {} coordinates, model needs {}", c.len(), spec.dim())));
    }
    let p = Point::from_slice(c).map_err(config_err)?;
    spec.check(&p).map_err(config_err)?;
    Ok(p)
}

fn quadrature(cfg: &RunConfig, default: QuadratureSpec) -> Result<QuadratureSpec, CliError> {
    cfg.quadrature.as_ref().map_or(Ok(default), |q| q.to_spec())
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", parts.join(", "))
}

#[derive(Debug, Serialize)]
pub struct PointCurvature {
    pub point: Vec<f64>,
    pub scalar_finite_difference: Compared,
    pub scalar_closed_form: Option<Compared>,
    pub scalar_from_connection: Option<Compared>,
    pub max_abs_riemann_finite_difference: f64,
    pub max_abs_riemann_closed_form: Option<f64>,
    pub symmetry_residuals: SymmetryResiduals,
}

#[derive(Debug, Serialize)]
pub struct CurvatureResults {
    pub model: String,
    pub dim: usize,
    pub expected_scalar: f64,
    pub points: Vec<PointCurvature>,
}

fn curvature_row(spec: &ManifoldSpec, expected: f64, p: &Point) -> Result<PointCurvature, CliError> {
    let riem = riemann_at(spec, p, DEFAULT_CURVATURE_STEP)?;
    let fd = ricci_and_scalar(spec, p, DEFAULT_CURVATURE_STEP)?;
    let analytic = spec.analytic_curvature_at(p).transpose()?;
    let from_conn = if spec.has_analytic_christoffel() {
        Some(curvature_from_connection(spec, p)?)
    } else {
        None
    };
    Ok(PointCurvature {
        point: p.coords().to_vec(),
        scalar_finite_difference: Compared::against(fd.scalar, expected),
        scalar_closed_form: analytic.as_ref().map(|a| Compared::against(a.scalar, expected)),
        scalar_from_connection: from_conn.map(|c| Compared::against(c.scalar, expected)),
        max_abs_riemann_finite_difference: riem.max_abs_lowered(),
        max_abs_riemann_closed_form: analytic.map(|a| a.riemann.max_abs_lowered()),
        symmetry_residuals: riem.symmetry_residuals(),
    })
}

pub fn cmd_curvature(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (model, spec) = model_and_spec(cfg)?;
    let coords = cfg.points.clone().unwrap_or_else(|| vec![model.default_point()]);
    let points = coords.iter().map(|c| user_point(&spec, c)).collect::<Result<Vec<_>, _>>()?;
    let expected = model.expected_scalar();
    let rows = points
        .par_iter()
        .map(|p| curvature_row(&spec, expected, p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut verdicts = vec![format!("model {}: dim {}", spec.name(), spec.dim())];
    for r in &rows {
        let shown = r.scalar_closed_form.unwrap_or(r.scalar_finite_difference).computed;
        verdicts.push(format!(
            "point {}: scalar curvature {shown:.10} (finite-difference {:.10}, expected {expected}); max |R| {:.3e}",
            fmt_vec(&r.point),
            r.scalar_finite_difference.computed,
            r.max_abs_riemann_closed_form.unwrap_or(r.max_abs_riemann_finite_difference)
        ));
    }
    let results = CurvatureResults {
        model: spec.name().into(),
        dim: spec.dim(),
        expected_scalar: expected,
        points: rows,
    };
    let mut out = out_dir(cfg)?;
    finish("curvature", Some(cfg), results, verdicts, &mut out)
}

/// Per-coordinate `max_τ |x − y| / max_τ |y|`, maximised over coordinates.
fn coordinate_sup_error(a: &Trajectory, b: &Trajectory) -> f64 {
    (0..b.dim())
        .map(|i| {
            let num = a
                .points
                .iter()
                .zip(&b.points)
                .map(|(x, y)| (x.coords()[i] - y.coords()[i]).abs())
                .fold(0.0, f64::max);
            let den = b.points.iter().map(|y| y.coords()[i].abs()).fold(0.0, f64::max);
            if den == 0.0 {
                num
            } else {
                num / den
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Serialize)]
pub struct GeodesicResults {
    pub model: String,
    pub tau_max: f64,
    pub step: f64,
    pub nodes: usize,
    pub initial_point: Vec<f64>,
    pub initial_velocity: Vec<f64>,
    pub speed_drift: f64,
    pub closed_form_max_rel_error: Option<f64>,
    pub closed_form_max_abs_error: Option<f64>,
    /// Quadrature along the integrated trajectory against the closed-form length.
    pub arc_length: Compared,
    /// Quadrature along the closed-form curve against the closed-form length.
    pub arc_length_closed_form_curve: Option<Compared>,
}

pub fn cmd_geodesic(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (model, spec) = model_and_spec(cfg)?;
    let g = cfg.geodesic.clone().unwrap_or_default();
    let cf = model.closed_form(&g)?;
    let (p0, v0) = model.initial_data(&g, cf.as_ref())?;
    spec.check(&p0).map_err(config_err)?;
    let tau_max = cfg.tau_max.unwrap_or(DEFAULT_GEODESIC_TAU);
    let step = cfg.step.unwrap_or(DEFAULT_STEP);
    let q = quadrature(cfg, QuadratureSpec::default())?;

    let traj = integrate_geodesic(&spec, &p0, &v0, tau_max, step)?;
    let mut out = out_dir(cfg)?;
    write_trajectory_csv(out.file("geodesic.csv")?, &traj)?;
    let numeric_len = arc_length(&spec, &traj, &q)?;
    let mut results = GeodesicResults {
        model: spec.name().into(),
        tau_max,
        step: traj.step,
        nodes: traj.len(),
        initial_point: p0.coords().to_vec(),
        initial_velocity: v0.clone(),
        speed_drift: traj.speed_drift(&spec)?,
        closed_form_max_rel_error: None,
        closed_form_max_abs_error: None,
        arc_length: Compared::new(numeric_len, None),
        arc_length_closed_form_curve: None,
    };
    let mut verdicts = vec![format!(
        "{}: integrated {} nodes to tau = {tau_max}, speed drift {:.2e}",
        spec.name(),
        traj.len(),
        results.speed_drift
    )];
    if let Some(cf) = &cf {
        let exact = sample_curve(cf, spec.name(), &traj.tau)?;
        write_trajectory_csv(out.file("geodesic_closed_form.csv")?, &exact)?;
        let k = traj.dim();
        let mut header = vec!["tau".to_string()];
        header.extend((1..=k).map(|i| format!("err_{i}")));
        let rows: Vec<Vec<f64>> = traj
            .points
            .iter()
            .zip(&exact.points)
            .zip(&traj.tau)
            .map(|((a, b), &t)| {
                let mut row = vec![t];
                row.extend(a.coords().iter().zip(b.coords()).map(|(x, y)| (x - y).abs()));
                row
            })
            .collect();
        let max_abs = rows.iter().flat_map(|r| r[1..].iter().copied()).fold(0.0, f64::max);
        out.table("geodesic_error.csv", &header, &rows)?;
        let rel = coordinate_sup_error(&traj, &exact);
        results.closed_form_max_rel_error = Some(rel);
        results.closed_form_max_abs_error = Some(max_abs);
        let len = cf.arclength(tau_max)?;
        results.arc_length = Compared::against(numeric_len, len);
        results.arc_length_closed_form_curve = Some(Compared::against(arc_length_curve(&spec, cf, tau_max, &q)?, len));
        verdicts.push(format!("max relative error against the closed form {rel:.3e}"));
        verdicts.push(format!("arc length {numeric_len:.12} (closed form {len:.12})"));
    } else {
        verdicts.push(format!("arc length {numeric_len:.12} (no closed form for this model)"));
    }
    finish("geodesic", Some(cfg), results, verdicts, &mut out)
}

#[derive(Debug, Serialize)]
pub struct JacobiResults {
    pub model: String,
    pub tau_max: f64,
    pub step: f64,
    pub j0: Vec<f64>,
    pub dj0: Vec<f64>,
    pub growth: GrowthClassification,
    pub final_norm_sq: Compared,
    /// Sup-norm relative difference of the propagated field from the closed form.
    pub closed_form_sup_rel_diff: Option<f64>,
    pub closed_form_constants: Option<[f64; 7]>,
    pub degree: Option<Compared>,
    pub rate: Option<Compared>,
}

fn generic_vector(n: usize, pattern: &[f64]) -> Vec<f64> {
    pattern.iter().copied().cycle().take(n).collect()
}

fn zero_growth(window: (f64, f64)) -> GrowthClassification {
    GrowthClassification {
        kind: GrowthKind::Bounded,
        degree: Some(0.0),
        rate: None,
        fit_r2: 1.0,
        polynomial_r2: 1.0,
        exponential_r2: 1.0,
        window,
    }
}

struct JacobiStart {
    j0: Vec<f64>,
    dj0: Vec<f64>,
    constants: Option<M4JacobiConstants>,
}

fn jacobi_start(
    model: &Model,
    spec: &ManifoldSpec,
    cf: Option<&ClosedForm>,
    jc: &JacobiConfig,
    p0: &Point,
    v0: &[f64],
) -> Result<JacobiStart, CliError> {
    let n = spec.dim();
    let m4 = match cf {
        Some(ClosedForm::M4(p)) => Some(*p),
        _ => None,
    };
    if jc.has_constants() {
        let p = m4.ok_or_else(|| CliError::Config("Jacobi constants a11/a1/a2 need an m4 closed-form geodesic".into()))?;
        let k = M4JacobiConstants {
            a11: jc.a11.unwrap_or(0.0),
            a1: jc.a1.unwrap_or([0.0; 3]),
            a2: jc.a2.unwrap_or([0.0; 3]),
        };
        let j0 = m4_jacobi(&p, &k, 0.0)?;
        let dj0 = covariant_derivative(spec, p0, v0, &j0, &m4_jacobi_rate(&p, &k, 0.0)?)?;
        return Ok(JacobiStart { j0, dj0, constants: Some(k) });
    }
    let (j0, dj0) = match (&jc.j0, &jc.dj0) {
        (None, None) => {
            if let (Some(p), Model::M4 { .. }) = (m4, model) {
                let k = criterion_6_m4_setup().1;
                let j0 = m4_jacobi(&p, &k, 0.0)?;
                let dj0 = covariant_derivative(spec, p0, v0, &j0, &m4_jacobi_rate(&p, &k, 0.0)?)?;
                return Ok(JacobiStart { j0, dj0, constants: Some(k) });
            }
            (generic_vector(n, &[0.3, -0.2, 0.5, 0.1]), generic_vector(n, &[0.1, 0.4, -0.3, 0.2]))
        }
        (j, d) => (j.clone().unwrap_or_else(|| vec![0.0; n]), d.clone().unwrap_or_else(|| vec![0.0; n])),
    };
    if j0.len() != n || dj0.len() != n {
        return Err(CliError::Config(format!("jacobi.j0/dj0 need {n} entries, got {}/{}", j0.len(), dj0.len())));
    }
    let constants = match m4 {
        Some(p) => {
            let gam = christoffel_at(spec, p0)?.contract(&j0, v0);
            let jdot: Vec<f64> = dj0.iter().zip(gam).map(|(a, b)| a - b).collect();
            M4JacobiConstants::from_initial(&p, &j0, &jdot).ok()
        }
        None => None,
    };
    Ok(JacobiStart { j0, dj0, constants })
}

pub fn cmd_jacobi(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (model, spec) = model_and_spec(cfg)?;
    let g = cfg.geodesic.clone().unwrap_or_default();
    let jc = cfg.jacobi.clone().unwrap_or_default();
    let cf = model.closed_form(&g)?;
    let (p0, v0) = model.initial_data(&g, cf.as_ref())?;
    spec.check(&p0).map_err(config_err)?;
    let gauss_c = match &cf {
        Some(ClosedForm::Gauss(p)) => Some(p.c()),
        _ => None,
    };
    let tau_max = cfg.tau_max.unwrap_or_else(|| gauss_c.map_or(DEFAULT_JACOBI_TAU, |c| 20.0 / c));
    let step = cfg.step.unwrap_or(DEFAULT_STEP);
    let window = match (jc.window, gauss_c) {
        (Some([lo, hi]), _) => (lo, hi),
        (None, Some(c)) if 20.0 / c <= tau_max * (1.0 + 1e-12) => (10.0 / c, 20.0 / c),
        _ => (tau_max / 10.0, tau_max),
    };
    let start = jacobi_start(&model, &spec, cf.as_ref(), &jc, &p0, &v0)?;

    let base = integrate_geodesic(&spec, &p0, &v0, tau_max, step)?;
    let jac = integrate_jacobi(&spec, &base, &start.j0, &start.dj0)?;
    let norms = jacobi_norm_sq(&spec, &base, &jac)?;
    let growth = if norms.iter().all(|&(_, y)| y == 0.0) {
        zero_growth(window)
    } else {
        classify_growth(&norms, window)?
    };

    let mut out = out_dir(cfg)?;
    write_jacobi_csv(out.file("jacobi.csv")?, &jac)?;
    let m4p = match &cf {
        Some(ClosedForm::M4(p)) => Some(*p),
        _ => None,
    };
    let closed = m4p.zip(start.constants);
    let mut header = vec!["tau".to_string(), "norm_sq".to_string()];
    if closed.is_some() {
        header.push("closed_form_norm_sq".into());
    }
    let rows: Vec<Vec<f64>> = norms
        .iter()
        .map(|&(t, y)| {
            let mut r = vec![t, y];
            if let Some((p, k)) = &closed {
                r.push(m4_jacobi_norm_sq(p, k, t));
            }
            r
        })
        .collect();
    out.table("jacobi_norm.csv", &header, &rows)?;

    let last = norms.last().map_or(0.0, |x| x.1);
    let mut results = JacobiResults {
        model: spec.name().into(),
        tau_max,
        step: base.step,
        j0: start.j0.clone(),
        dj0: start.dj0.clone(),
        growth,
        final_norm_sq: Compared::new(last, None),
        closed_form_sup_rel_diff: None,
        closed_form_constants: None,
        degree: None,
        rate: None,
    };
    let mut verdicts = vec![match growth.kind {
        GrowthKind::Exponential => format!(
            "verdict exponential, rate {:.6} on window [{:.4}, {:.4}]",
            growth.rate.unwrap_or(f64::NAN),
            window.0,
            window.1
        ),
        kind => format!(
            "verdict {}, degree {:.6} on window [{:.4}, {:.4}]",
            format!("{kind:?}").to_lowercase(),
            growth.degree.unwrap_or(f64::NAN),
            window.0,
            window.1
        ),
    }];
    if let Some((p, k)) = closed {
        let exact = jac.tau().iter().map(|&t| m4_jacobi(&p, &k, t)).collect::<Result<Vec<_>, _>>()?;
        let d = sup_relative_difference(&jac.j, &exact);
        results.closed_form_sup_rel_diff = Some(d);
        results.closed_form_constants = Some([k.a11, k.a1[0], k.a1[1], k.a1[2], k.a2[0], k.a2[1], k.a2[2]]);
        results.final_norm_sq = Compared::against(last, m4_jacobi_norm_sq(&p, &k, base.tau_max()));
        if k.a2.iter().any(|&x| x != 0.0) {
            if let Some(deg) = growth.degree {
                results.degree = Some(Compared::against(deg, 2.0));
            }
        }
        verdicts.push(format!("closed-form Jacobi field sup relative difference {d:.3e}"));
    }
    if let Some(c) = gauss_c {
        if let Some(rate) = growth.rate {
            let cmp = Compared::against(rate, 2.0 * c);
            verdicts.push(format!("rate {rate:.6} vs 2C = {:.6} (rel diff {:.3e})", 2.0 * c, cmp.rel_diff.unwrap_or(0.0)));
            results.rate = Some(cmp);
        }
    }
    finish("jacobi", Some(cfg), results, verdicts, &mut out)
}

#[derive(Debug, Serialize)]
pub struct PublishedCheck {
    pub name: String,
    pub published: f64,
    pub reference: f64,
    pub rel_diff: f64,
    pub discrepancy: bool,
    pub note: String,
}

impl PublishedCheck {
    fn new(name: &str, published: f64, reference: f64, note: &str) -> Self {
        let c = Compared::against(published, reference);
        let rel_diff = c.rel_diff.unwrap_or(0.0);
        PublishedCheck {
            name: name.into(),
            published,
            reference,
            rel_diff,
            discrepancy: rel_diff > DISCREPANCY_THRESHOLD,
            note: note.into(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VolumeResults {
    pub model: String,
    pub tau: f64,
    /// User-supplied rule; `None` means the per-model default.
    pub quadrature: Option<QuadratureSpec>,
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
    /// Quadrature over the coordinate box spanned by the geodesic, against the derived closed form.
    pub region: Compared,
    /// `(1/τ)∫ΔV` of the derived closed form, against its own closed form.
    pub average: Option<Compared>,
    pub published: Vec<PublishedCheck>,
}

/// Box volume; products factor because the volume element does.
fn quad_volume(model: &Model, lo: &[f64], hi: &[f64], q: Option<QuadratureSpec>) -> Result<f64, CliError> {
    if let Model::Product(fs) = model {
        let mut v = 1.0;
        for ((f, l), h) in fs.iter().zip(model.split(lo)).zip(model.split(hi)) {
            v *= quad_volume(f, l, h, q)?;
        }
        return Ok(v);
    }
    let spec = model.spec()?;
    let (lo, hi) = (Point::from_slice(lo)?, Point::from_slice(hi)?);
    match model {
        // diagonal exponential-family metrics have a separable volume element
        Model::M4 { .. } | Model::M1 { .. } => {
            let q = q.unwrap_or(QuadratureSpec::gauss_legendre(8, 16));
            Ok(volume_region_separable(&spec, &lo, &hi, &q)?)
        }
        _ => Ok(volume_region(&spec, &lo, &hi, &q.unwrap_or(QuadratureSpec::gauss_legendre(8, 4)))?),
    }
}

fn region_oracle(cf: &ClosedForm, tau: f64) -> f64 {
    match cf {
        ClosedForm::M4(p) => m4_volume_region(p, tau),
        ClosedForm::Gauss(p) => gauss_geodesic_volume_region(p, tau),
        ClosedForm::Product(parts) => parts.iter().map(|(c, _)| region_oracle(c, tau)).product(),
    }
}

pub fn cmd_volume(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (model, spec) = model_and_spec(cfg)?;
    let g: GeodesicConfig = cfg.geodesic.clone().unwrap_or_default();
    let cf = model.closed_form(&g)?;
    let tau = cfg.tau_max.unwrap_or(DEFAULT_VOLUME_TAU);
    let q_user = cfg.quadrature.as_ref().map(|q| q.to_spec()).transpose()?;
    let q_avg = QuadratureSpec::gauss_legendre(8, 16);

    let (lo, hi) = match &cf {
        Some(c) => (c.eval(0.0)?.0, c.eval(tau)?.0),
        None => {
            let (p0, v0) = model.initial_data(&g, None)?;
            let traj = integrate_geodesic(&spec, &p0, &v0, tau, cfg.step.unwrap_or(DEFAULT_STEP))?;
            let hi = traj.points.last().cloned().unwrap_or_else(|| p0.clone());
            (p0, hi)
        }
    };
    let v = quad_volume(&model, lo.coords(), hi.coords(), q_user)?;
    let region = Compared::new(v, cf.as_ref().map(|c| region_oracle(c, tau)));
    let mut average = None;
    let mut published = Vec::new();
    match &cf {
        Some(ClosedForm::M4(p)) => {
            published.push(PublishedCheck::new(
                "M4 region volume",
                m4_volume_region_printed(p, tau),
                v,
                "published 2 sqrt(A1) B2 B3 B4 (tau+B1) tau^3 against quadrature",
            ));
            if tau > 0.0 {
                let a = average_volume(|t| Ok(m4_volume_region(p, t)), tau, &q_avg)?;
                average = Some(Compared::against(a, m4_average_volume(p, tau)));
                published.push(PublishedCheck::new(
                    "M4 average volume",
                    m4_average_volume_printed(p, tau),
                    a,
                    "published 2 sqrt(A1) B2 B3 B4 (tau/5 + B1/4) tau^3 against the average of the derived region volume",
                ));
            }
        }
        Some(ClosedForm::Gauss(p)) => {
            let plo = gauss_printed_curve(p, 0.0)?.0;
            let phi = gauss_printed_curve(p, tau)?.0;
            let pv = quad_volume(&model, plo.coords(), phi.coords(), q_user)?;
            published.push(PublishedCheck::new(
                "Gaussian region volume",
                gauss_volume_region(p, tau),
                pv,
                "published closed form against quadrature over the box of the published curve",
            ));
            if tau > 0.0 {
                let a = average_volume(|t| Ok(gauss_geodesic_volume_region(p, t)), tau, &q_avg)?;
                average = Some(Compared::against(a, gauss_geodesic_average_volume(p, tau)));
                let pa = average_volume(|t| Ok(gauss_volume_region(p, t)), tau, &q_avg)?;
                published.push(PublishedCheck::new(
                    "Gaussian average volume",
                    gauss_average_volume(p, tau),
                    pa,
                    "published closed form against the average of the published region volume",
                ));
            }
        }
        _ => {}
    }
    let mut verdicts = vec![match region.oracle {
        Some(o) => format!("region volume {v:.12e} (closed form {o:.12e}, rel diff {:.3e})", region.rel_diff.unwrap_or(0.0)),
        None => format!("region volume {v:.12e} (no closed form for this model)"),
    }];
    if let Some(a) = &average {
        verdicts.push(format!("average volume {:.12e} (closed form {:.12e})", a.computed, a.oracle.unwrap_or(f64::NAN)));
    }
    for c in &published {
        verdicts.push(format!(
            "{}: published {:.6e} vs reference {:.6e}, rel diff {:.3e}{}",
            c.name,
            c.published,
            c.reference,
            c.rel_diff,
            if c.discrepancy { " [informational discrepancy]" } else { "" }
        ));
    }
    let results = VolumeResults {
        model: spec.name().into(),
        tau,
        quadrature: q_user,
        box_lo: lo.into_coords(),
        box_hi: hi.into_coords(),
        region,
        average,
        published,
    };
    let mut out = out_dir(cfg)?;
    finish("volume", Some(cfg), results, verdicts, &mut out)
}

#[derive(Debug, Serialize)]
pub struct McEntry {
    pub i: usize,
    pub j: usize,
    pub mc: f64,
    pub stderr: f64,
    pub analytic: f64,
    pub z: f64,
}

#[derive(Debug, Serialize)]
pub struct McResults {
    pub model: String,
    pub family: String,
    pub point: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub entries: Vec<McEntry>,
    pub max_abs_z: f64,
}

pub fn cmd_mc_fisher(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (model, spec) = model_and_spec(cfg)?;
    let theta = cfg
        .points
        .as_ref()
        .and_then(|p| p.first().cloned())
        .unwrap_or_else(|| model.default_point());
    let p = user_point(&spec, &theta)?;
    let d = model.dist_spec(&theta)?;
    let mc = cfg.mc.clone().unwrap_or_default();
    let n = mc.n.unwrap_or(DEFAULT_MC_N);
    let seed = mc.seed.unwrap_or(infogeo::verify::MC_SEED);
    let est = estimate_fisher_mc(&d, n, seed)?;
    let g = spec.metric_at(&p)?;
    let k = g.dim();
    let reference: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| g.get(i, j)).collect()).collect();
    let z = est.z_scores(&reference);
    let mut entries = Vec::new();
    for i in 0..k {
        for j in i..k {
            entries.push(McEntry {
                i,
                j,
                mc: est.matrix[i][j],
                stderr: est.stderr[i][j],
                analytic: reference[i][j],
                z: z[i][j],
            });
        }
    }
    let max_abs_z = entries.iter().fold(0.0_f64, |m, e| m.max(e.z.abs()));
    let verdicts = vec![format!(
        "{}: n = {n}, seed = {seed}, max |z| = {max_abs_z:.3} over {} entries ({})",
        est.family,
        entries.len(),
        if max_abs_z <= 3.0 { "all within 3 SE" } else { "some entries beyond 3 SE" }
    )];
    let results = McResults {
        model: spec.name().into(),
        family: est.family.clone(),
        point: theta,
        n,
        seed,
        entries,
        max_abs_z,
    };
    let mut out = out_dir(cfg)?;
    finish("mc-fisher", Some(cfg), results, verdicts, &mut out)
}

#[derive(Debug, Clone, Default)]
pub struct VerifyArgs {
    pub seed: Option<u64>,
    pub mc_n: Option<usize>,
    pub out_dir: Option<PathBuf>,
    /// Replace the Gaussian model by one with a wrong Christoffel sign.
    pub inject_christoffel_fault: bool,
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<(Outcome, VerifyReport), CliError> {
    let mut opts = VerifyOptions::default();
    if let Some(s) = args.seed {
        opts.seed = s;
    }
    if let Some(n) = args.mc_n {
        if n < 100 {
            return Err(CliError::Config(format!("--n must be at least 100, got {n}")));
        }
        opts.mc_n = n;
    }
    if args.inject_christoffel_fault {
        opts.models.gauss = Arc::new(gauss_with_flipped_christoffel);
    }
    let report = run_all(&opts);
    let mut verdicts: Vec<String> = report.criteria.iter().map(|c| c.line()).collect();
    verdicts.extend(report.informational.iter().map(|d| d.line()));
    let mut out = OutDir::create(resolve_out_dir(args.out_dir.as_deref()))?;
    let outcome = finish("verify", None, report.clone(), verdicts, &mut out)?;
    Ok((outcome, report))
}
