use proptest::prelude::*;

use infogeo::dynamics::{
    arc_length_curve, classify_growth, integrate_geodesic, integrate_jacobi, read_trajectory_csv, volume_region,
    volume_region_separable, write_trajectory_csv, QuadratureSpec,
};
use infogeo::fisher_mc::{estimate_fisher_mc, DistSpec};
use infogeo::manifold::{
    christoffel_fd, inverse_metric_at, product, ricci_and_scalar, riemann_at, volume_element_at, ManifoldSpec, Point,
    DEFAULT_CHRISTOFFEL_STEP, DEFAULT_CURVATURE_STEP,
};
use infogeo::models::{
    build_m1_peng, build_m4, gauss_geodesic, gauss_geodesic_residual, gauss_manifold, m4_arclength, m4_geodesic,
    m4_geodesic_residual, GaussGeodesicParams, M4GeodesicParams,
};

fn pt(c: &[f64]) -> Point {
    Point::from_slice(c).unwrap()
}

fn gauss_point() -> impl Strategy<Value = (f64, Vec<f64>)> {
    (-0.9..0.9f64, -3.0..3.0f64, -3.0..3.0f64, 0.2..4.0f64).prop_map(|(r, x, y, s)| (r, vec![x, y, s]))
}

fn m4_point() -> impl Strategy<Value = (f64, f64, Vec<f64>)> {
    (0.5..3.0f64, 0.5..3.0f64, prop::collection::vec(0.2..5.0f64, 4)).prop_map(|(a, b, p)| (a, b, p))
}

fn m4_params() -> impl Strategy<Value = M4GeodesicParams> {
    (
        prop::array::uniform4(0.5..2.0f64),
        0.5..2.0f64,
        prop::array::uniform3(-0.3..0.3f64),
        0.5..2.0f64,
        0.5..2.5f64,
    )
        .prop_map(|(ca, b1, bs, a, b)| M4GeodesicParams::new(ca, [b1, bs[0], bs[1], bs[2]], a, b).unwrap())
}

fn gauss_params() -> impl Strategy<Value = GaussGeodesicParams> {
    (-2.0..2.0f64, -2.0..2.0f64, -0.8..0.8f64)
        .prop_map(|(x, y, r)| GaussGeodesicParams::new(x, y, r).unwrap())
        .prop_filter("non-degenerate", |p| p.c() > 0.15)
}

fn max_christoffel_gap(spec: &ManifoldSpec, p: &Point) -> f64 {
    let an = spec.analytic_christoffel_at(p).unwrap().unwrap();
    christoffel_fd(spec, p, DEFAULT_CHRISTOFFEL_STEP).unwrap().max_abs_diff(&an)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn christoffel_fd_matches_closed_form_gauss((r, c) in gauss_point()) {
        let spec = gauss_manifold(r).unwrap();
        prop_assert!(max_christoffel_gap(&spec, &pt(&c)) <= 1e-6);
    }

    #[test]
    fn christoffel_fd_matches_closed_form_m4((a, b, c) in m4_point()) {
        let spec = build_m4(a, b).unwrap().spec();
        prop_assert!(max_christoffel_gap(&spec, &pt(&c)) <= 1e-6);
    }

    #[test]
    fn christoffel_fd_matches_closed_form_m1(rho in 0.5..4.0f64, c in prop::collection::vec(0.3..4.0f64, 2)) {
        let spec = build_m1_peng(rho).unwrap().spec();
        prop_assert!(max_christoffel_gap(&spec, &pt(&c)) <= 1e-6);
    }

    #[test]
    fn riemann_symmetries_hold((r, c) in gauss_point(), (a, b, d) in m4_point()) {
        let g = riemann_at(&gauss_manifold(r).unwrap(), &pt(&c), DEFAULT_CURVATURE_STEP).unwrap();
        prop_assert!(g.symmetry_residuals().max() <= 1e-6);
        let m = riemann_at(&build_m4(a, b).unwrap().spec(), &pt(&d), DEFAULT_CURVATURE_STEP).unwrap();
        prop_assert!(m.symmetry_residuals().max() <= 1e-6);
    }

    #[test]
    fn gauss_scalar_curvature_is_constant((r, c) in gauss_point()) {
        let s = ricci_and_scalar(&gauss_manifold(r).unwrap(), &pt(&c), DEFAULT_CURVATURE_STEP).unwrap().scalar;
        prop_assert!((s + 1.5).abs() <= 1e-6, "{}", s);
    }

    #[test]
    fn inverse_metric_is_inverse((r, c) in gauss_point()) {
        let spec = gauss_manifold(r).unwrap();
        let p = pt(&c);
        let g = spec.metric_at(&p).unwrap();
        let gi = inverse_metric_at(&spec, &p).unwrap();
        let prod = g.matrix() * gi.matrix();
        let err = (prod - nalgebra::DMatrix::<f64>::identity(3, 3)).abs().max();
        prop_assert!(err <= 1e-12 * g.condition_number().max(1.0), "{}", err);
    }

    #[test]
    fn volume_element_is_root_determinant((a, b, c) in m4_point()) {
        let spec = build_m4(a, b).unwrap().spec();
        let p = pt(&c);
        let det = spec.metric_at(&p).unwrap().determinant().unwrap();
        let v = volume_element_at(&spec, &p).unwrap();
        prop_assert!((v - det.sqrt()).abs() <= 1e-14 * v.abs().max(1.0));
        let closed = b / (c[0].sqrt() * c[1] * c[2] * c[3]);
        prop_assert!((v - closed).abs() <= 1e-12 * closed);
    }

    #[test]
    fn product_metric_restricts_to_factors((r, c) in gauss_point(), (a, b, d) in m4_point()) {
        let m4 = build_m4(a, b).unwrap().spec();
        let ga = gauss_manifold(r).unwrap();
        let prod = product(&m4, &ga);
        let joint: Vec<f64> = d.iter().chain(&c).copied().collect();
        let g = prod.metric_at(&pt(&joint)).unwrap();
        let ga_g = ga.metric_at(&pt(&c)).unwrap();
        let m4_g = m4.metric_at(&pt(&d)).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let want = match (i < 4, j < 4) {
                    (true, true) => m4_g.get(i, j),
                    (false, false) => ga_g.get(i - 4, j - 4),
                    _ => 0.0,
                };
                prop_assert_eq!(g.get(i, j), want);
            }
        }
    }

    #[test]
    fn closed_form_geodesics_solve_their_equations(p in m4_params(), g in gauss_params(), t in 0.0..5.0f64) {
        let r = m4_geodesic_residual(&p, t).unwrap();
        prop_assert!(r.iter().all(|x| x.abs() <= 1e-10), "{:?}", r);
        let r = gauss_geodesic_residual(&g, t).unwrap();
        prop_assert!(r.iter().all(|x| x.abs() <= 1e-10), "{:?}", r);
    }

    #[test]
    fn gauss_speed_is_two_c(g in gauss_params(), t in 0.0..8.0f64) {
        let spec = gauss_manifold(g.r).unwrap();
        let (x, v) = gauss_geodesic(&g, t).unwrap();
        let s = spec.metric_at(&x).unwrap().inner(&v, &v).sqrt();
        prop_assert!((s - 2.0 * g.c()).abs() <= 1e-10 * s);
    }

    #[test]
    fn arc_length_closed_forms(p in m4_params(), g in gauss_params(), t in 0.5..5.0f64) {
        let q = QuadratureSpec::gauss_legendre(8, 16);
        let spec = build_m4(p.a, p.b).unwrap().spec();
        let l = arc_length_curve(&spec, &|s| m4_geodesic(&p, s), t, &q).unwrap();
        let want = m4_arclength(&p, t).unwrap();
        prop_assert!((l - want).abs() <= 1e-8 * want);
        let spec = gauss_manifold(g.r).unwrap();
        let l = arc_length_curve(&spec, &|s| gauss_geodesic(&g, s), t, &q).unwrap();
        prop_assert!((l / (2.0 * g.c() * t) - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn m4_box_volume_factorises(p in m4_params(), t in 0.2..2.0f64) {
        let spec = build_m4(p.a, p.b).unwrap().spec();
        let lo = m4_geodesic(&p, 0.0).unwrap().0;
        let hi = m4_geodesic(&p, t).unwrap().0;
        let q = QuadratureSpec::gauss_legendre(6, 2);
        let full = volume_region(&spec, &lo, &hi, &q).unwrap();
        let sep = volume_region_separable(&spec, &lo, &hi, &q).unwrap();
        prop_assert!((full - sep).abs() <= 1e-12 * sep.abs().max(1e-300));
    }

    #[test]
    fn growth_verdict_is_scale_invariant(k in 0.5..4.0f64, rate in 0.1..1.0f64, scale in 1e-3..1e3f64) {
        for f in [
            Box::new(move |t: f64| t.powf(k)) as Box<dyn Fn(f64) -> f64>,
            Box::new(move |t: f64| (rate * t).exp() * (1.0 + 0.1 * t.sin())),
        ] {
            let series: Vec<(f64, f64)> = (1..=100).map(|i| (i as f64 * 0.2, f(i as f64 * 0.2))).collect();
            let scaled: Vec<(f64, f64)> = series.iter().map(|&(t, y)| (t, scale * y)).collect();
            let a = classify_growth(&series, (0.2, 20.0)).unwrap();
            let b = classify_growth(&scaled, (0.2, 20.0)).unwrap();
            prop_assert_eq!(a.kind, b.kind);
            let gap = |x: Option<f64>, y: Option<f64>| (x.unwrap_or(0.0) - y.unwrap_or(0.0)).abs();
            prop_assert!(gap(a.degree, b.degree) <= 1e-9 && gap(a.rate, b.rate) <= 1e-9);
        }
    }

    #[test]
    fn trajectory_csv_round_trip(g in gauss_params(), tau in 0.1..2.0f64) {
        let spec = gauss_manifold(g.r).unwrap();
        let (p0, v0) = gauss_geodesic(&g, 0.0).unwrap();
        let traj = integrate_geodesic(&spec, &p0, &v0, tau, 0.005).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj).unwrap();
        let back = read_trajectory_csv(buf.as_slice(), spec.name()).unwrap();
        prop_assert_eq!(back.points, traj.points);
        prop_assert_eq!(back.velocities, traj.velocities);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn jacobi_propagation_is_linear(
        g in gauss_params(),
        j1 in prop::array::uniform3(-1.0..1.0f64),
        d1 in prop::array::uniform3(-1.0..1.0f64),
        j2 in prop::array::uniform3(-1.0..1.0f64),
        d2 in prop::array::uniform3(-1.0..1.0f64),
        alpha in -2.0..2.0f64,
    ) {
        let spec = gauss_manifold(g.r).unwrap();
        let (p0, v0) = gauss_geodesic(&g, 0.0).unwrap();
        let base = integrate_geodesic(&spec, &p0, &v0, 3.0, 0.01).unwrap();
        let a = integrate_jacobi(&spec, &base, &j1, &d1).unwrap();
        let b = integrate_jacobi(&spec, &base, &j2, &d2).unwrap();
        let comb = |x: &[f64; 3], y: &[f64; 3]| -> Vec<f64> { x.iter().zip(y).map(|(p, q)| alpha * p + q).collect() };
        let c = integrate_jacobi(&spec, &base, &comb(&j1, &j2), &comb(&d1, &d2)).unwrap();
        let scale = c.j.iter().flatten().fold(1.0_f64, |m, x| m.max(x.abs()));
        for n in 0..c.j.len() {
            for i in 0..3 {
                let want = alpha * a.j[n][i] + b.j[n][i];
                prop_assert!((c.j[n][i] - want).abs() <= 1e-10 * scale);
            }
        }
    }
}

#[test]
fn mc_is_deterministic_and_se_scales() {
    let d = DistSpec::m4(1.0, 2.0, [2.0; 4]).unwrap();
    let a = estimate_fisher_mc(&d, 20_000, 11).unwrap();
    let b = estimate_fisher_mc(&d, 20_000, 11).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.matrix, b.matrix);
    let c = estimate_fisher_mc(&d, 80_000, 11).unwrap();
    for i in 0..4 {
        let ratio = a.stderr[i][i] / c.stderr[i][i];
        assert!((ratio / 2.0 - 1.0).abs() <= 0.2, "entry {i}: ratio {ratio}");
    }
    for (m, s) in c.score_mean.iter().zip(&c.score_stderr) {
        assert!(m.abs() <= 3.0 * s);
    }
}

#[test]
fn simpson_arc_length_converges_at_fourth_order() {
    let p = M4GeodesicParams::new([1.0, 1.2, 0.8, 1.0], [0.7, 0.2, -0.1, 0.15], 1.0, 2.0).unwrap();
    let spec = build_m4(1.0, 2.0).unwrap().spec();
    let want = m4_arclength(&p, 4.0).unwrap();
    let g = GaussGeodesicParams::new(1.5, -0.5, 0.2).unwrap();
    let gspec = gauss_manifold(0.2).unwrap();
    // the M4 speed is constant, so reparameterise the Gaussian curve by τ = e^s − 1 for a non-polynomial integrand
    let curve = |s: f64| -> infogeo::Result<(Point, Vec<f64>)> {
        let (x, v) = gauss_geodesic(&g, s.exp() - 1.0)?;
        Ok((x, v.iter().map(|c| c * s.exp()).collect()))
    };
    let exact = 2.0 * g.c() * (2.0_f64.exp() - 1.0);
    let err = |panels| (arc_length_curve(&gspec, &curve, 2.0, &QuadratureSpec::simpson(panels)).unwrap() - exact).abs();
    let ratio = err(8) / err(16);
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    let l = arc_length_curve(&spec, &|s| m4_geodesic(&p, s), 4.0, &QuadratureSpec::simpson(4)).unwrap();
    assert!((l - want).abs() <= 1e-12 * want);
}
