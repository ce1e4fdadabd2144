//! Acceptance criteria. Each prints a single `criterion N: PASS|FAIL ...`
//! line; the run exits non-zero when any criterion fails.

use asymnet::affine_structure::{analyze_structure, verify_lelieuvre, AffineStructure, omega_conormal_residual, moutard_residual};
use asymnet::generators::{hyperboloid_net, integrate_lelieuvre, minimal_net, paraboloid_net, AnalyticHyperboloid, HyperboloidSpec};
use asymnet::reconstruction::{affine_align, extract, gamma_from_p, reconstruct, AffineMap};
use asymnet::structural::{affine_sphere_residual, classify};
use asymnet::suites::verify_net;
use asymnet::{AsymptoticNet, Family, ResidualReport, SiteField, Tolerances, Vec3};
use nalgebra::Matrix3;

type Verdict = (bool, String);

fn reference_net(du: f64, dv: f64) -> (AsymptoticNet, AnalyticHyperboloid) {
    hyperboloid_net(&HyperboloidSpec { c: 1.0, u0: 1.0, v0: 1.0, du, dv, nu: 20, nv: 20, ..HyperboloidSpec::default() }).unwrap()
}

fn structure(net: &AsymptoticNet, seed: f64) -> AffineStructure {
    analyze_structure(net, seed, (0, 0), &Tolerances::default()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1_hyperboloid_closed_forms() -> Verdict {
    let (net, a) = reference_net(0.1, 0.2);
    let s = structure(&net, a.gamma(0, 0));
    let d = s.domain;
    let worst = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
    let errors = [
        ("omega", worst(&mut d.sites(Family::Quad).map(|(i, j)| rel(s.omega[(i, j)], a.omega(i, j))))),
        ("gamma", worst(&mut d.sites(Family::Quad).map(|(i, j)| rel(s.gamma[(i, j)], a.gamma(i, j))))),
        ("xi", worst(&mut d.sites(Family::Quad).map(|(i, j)| (s.xi[(i, j)] - a.xi(i, j)).norm() / a.xi(i, j).norm()))),
        (
            "p",
            worst(&mut d.sites(Family::InteriorUEdge).map(|(i, j)| rel(s.p_u[(i, j)], a.p_u(i, j)))
                .chain(d.sites(Family::InteriorVEdge).map(|(i, j)| rel(s.p_v[(i, j)], a.p_v(i, j))))),
        ),
        (
            "h",
            worst(&mut d.sites(Family::InteriorUEdge).map(|(i, j)| rel(s.h_u[(i, j)], a.h_u(i, j)))
                .chain(d.sites(Family::InteriorVEdge).map(|(i, j)| rel(s.h_v[(i, j)], a.h_v(i, j))))),
        ),
        (
            "H",
            worst(&mut d.sites(Family::InteriorUEdge).map(|(i, j)| rel(s.mean_curv_u[(i, j)], a.mean_curv_u(i, j)))
                .chain(d.sites(Family::InteriorVEdge).map(|(i, j)| rel(s.mean_curv_v[(i, j)], a.mean_curv_v(i, j))))),
        ),
    ];
    let pass = errors.iter().all(|(_, e)| *e <= 1e-9);
    let details: Vec<String> = errors.iter().map(|(n, e)| format!("{n}={e:.1e}")).collect();
    (pass, format!("max relative error {} (tol 1e-9)", details.join(" ")))
}

fn criterion_2_identity_suites() -> Verdict {
    let tol = Tolerances::default();
    let (h, a) = reference_net(0.1, 0.2);
    let p = paraboloid_net(20, 20).unwrap();
    let mut failed = Vec::new();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (name, net, seed) in [("hyperboloid", &h, a.gamma(0, 0)), ("paraboloid", &p, 1.0)] {
        let v = verify_net(net, seed, &tol);
        if let Some(halt) = &v.halted {
            failed.push(format!("{name}:{}", halt.suite));
        }
        for r in &v.reports {
            count += 1;
            worst = worst.max(r.max_abs);
            if !r.passed() {
                failed.push(format!("{name}:{}={:.1e}", r.name, r.max_abs));
            }
        }
    }
    (failed.is_empty(), format!("{count} suite runs, worst residual {worst:.1e} (tol 1e-9) failed [{}]", failed.join(", ")))
}

fn criterion_3_gauge_invariance() -> Verdict {
    let (net, _) = reference_net(0.1, 0.2);
    let lambda = 7.3;
    let (s1, s2) = (structure(&net, 1.0), structure(&net, lambda));
    let field_err = |a: &SiteField<f64>, b: &SiteField<f64>| {
        a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE)).fold(0.0, f64::max)
    };
    // H and h vanish nowhere here, so relative comparison is meaningful
    let invariant = [
        field_err(&s1.p_u, &s2.p_u),
        field_err(&s1.p_v, &s2.p_v),
        field_err(&s1.h_u, &s2.h_u),
        field_err(&s1.h_v, &s2.h_v),
        field_err(&s1.mean_curv_u, &s2.mean_curv_u),
        field_err(&s1.mean_curv_v, &s2.mean_curv_v),
        field_err(&s1.omega, &s2.omega),
        field_err(&s1.m, &s2.m),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let gamma_err = s1
        .gamma
        .iter()
        .map(|((i, j), &g)| {
            let f = if (i + j) % 2 == 0 { lambda } else { 1.0 / lambda };
            rel(s2.gamma[(i, j)], f * g)
        })
        .fold(0.0, f64::max);
    let nu_err = s1
        .nu
        .iter()
        .map(|((i, j), n)| {
            let f = if (i + j) % 2 == 0 { 1.0 / lambda } else { lambda };
            (s2.nu[(i, j)] - n * f).norm() / (n * f).norm()
        })
        .fold(0.0, f64::max);
    let (c1, c2) = (classify(&s1, 1e-8), classify(&s2, 1e-8));
    let same_class = c1.minimal.minimal == c2.minimal.minimal
        && c1.affine_sphere == c2.affine_sphere
        && c1.constant_c.constant == c2.constant_c.constant
        && rel(c2.constant_c.c, c1.constant_c.c) <= 1e-12;
    let pass = invariant <= 1e-12 && gamma_err <= 1e-12 && nu_err <= 1e-12 && same_class;
    (
        pass,
        format!("seeds 1, {lambda}: invariants {invariant:.1e} gamma {gamma_err:.1e} nu {nu_err:.1e} classifications equal {same_class} (tol 1e-12)"),
    )
}

fn criterion_4_smooth_limit() -> Verdict {
    let centre = |step: f64| {
        let n = (0.2 / step).round() as usize;
        let spec = HyperboloidSpec { u0: 0.9, v0: 0.9, du: step, dv: step, nu: n, nv: n, ..HyperboloidSpec::default() };
        let (net, a) = hyperboloid_net(&spec).unwrap();
        let s = structure(&net, a.gamma(0, 0));
        (s.mean_curv_v[(n / 2, n / 2)] - a.smooth_mean_curvature()).abs()
    };
    let (e1, e2) = (centre(0.02), centre(0.01));
    let ratio = e1 / e2;
    ((3.5..=4.5).contains(&ratio), format!("error {e1:.3e} -> {e2:.3e}, ratio {ratio:.3} (want 3.5..4.5)"))
}

fn criterion_5_classification() -> Verdict {
    let tol = 1e-9;
    let (net, a) = reference_net(0.1, 0.2);
    let s = structure(&net, a.gamma(0, 0));
    let (ra, rb) = affine_sphere_residual(&s, tol);
    let sphere = ra.passed() && rb.passed();
    let unequal = classify(&s, tol).constant_c.spread;
    let (net, a) = reference_net(0.1, 0.1);
    let equal = classify(&structure(&net, a.gamma(0, 0)), tol).constant_c.spread;
    let pass = sphere && unequal > 1e-3 && equal <= 1e-9;
    (
        pass,
        format!(
            "affine sphere residual {:.1e} (tol 1e-9); c spread du!=dv {unequal:.1e} (want > 1e-3), du=dv {equal:.1e} (want <= 1e-9)",
            ra.max_abs.max(rb.max_abs)
        ),
    )
}

fn criterion_6_minimal_nets() -> Verdict {
    let curve = |n: usize, f: &dyn Fn(f64) -> Vec3| (0..=n).map(|k| f(k as f64)).collect::<Vec<_>>();
    let cases: Vec<(Vec<Vec3>, Vec<Vec3>)> = vec![
        (curve(10, &|t| Vec3::new(-t, 0.0, -0.5)), curve(10, &|t| Vec3::new(0.0, -t, -0.5))),
        (
            curve(12, &|t| Vec3::new(-t, 0.3 * (0.7 * t).sin(), -0.5 + 0.05 * t * t)),
            curve(9, &|t| Vec3::new(0.2 * (0.9 * t).cos(), -t, -0.5 - 0.1 * t)),
        ),
        (
            curve(8, &|t| Vec3::new(-1.5 * t, 0.1 * (0.5 * t).sin(), -0.5 + 0.02 * t * t)),
            curve(8, &|t| Vec3::new(0.01 * t * t, -t, -0.5 + 0.05 * (0.6 * t).cos())),
        ),
    ];
    let (mut p_err, mut h_err, mut closure): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (f, g) in &cases {
        let net = minimal_net(f, g, Vec3::new(0.5, -1.0, 2.0)).unwrap();
        let s = structure(&net, 1.0);
        p_err = s.p_u.values().iter().chain(s.p_v.values()).map(|p| (p - 1.0).abs()).fold(p_err, f64::max);
        h_err = s.mean_curv_u.values().iter().chain(s.mean_curv_v.values()).map(|h| h.abs()).fold(h_err, f64::max);
        let nu = SiteField::from_fn(net.domain(), Family::Vertex, |i, j| f[i] + g[j]);
        let (_, report) = integrate_lelieuvre(&nu, Vec3::zeros()).unwrap();
        closure = closure.max(report.max_abs);
    }
    let paraboloid = paraboloid_net(6, 6).unwrap();
    let s = structure(&paraboloid, 1.0);
    p_err = s.p_u.values().iter().chain(s.p_v.values()).map(|p| (p - 1.0).abs()).fold(p_err, f64::max);
    h_err = s.mean_curv_u.values().iter().chain(s.mean_curv_v.values()).map(|h| h.abs()).fold(h_err, f64::max);
    let pass = p_err <= 1e-12 && h_err <= 1e-12 && closure <= 1e-12;
    (pass, format!("{} nets: max |p-1| {p_err:.1e} max |H| {h_err:.1e} closure {closure:.1e} (tol 1e-12)", cases.len() + 1))
}

fn criterion_7_reconstruction() -> Verdict {
    let tol = Tolerances::default();
    let (net, a) = reference_net(0.1, 0.2);
    let d = net.domain();
    let inner = net.sub_net(1, 1, d.nu() - 2, d.nv() - 2).unwrap();
    let data = extract(&net, a.gamma(0, 0), &tol).unwrap();
    let (align, rebuilt) = match reconstruct(&data, &tol) {
        Ok(r) => (affine_align(&r.net, &inner).unwrap().1, true),
        Err(e) => {
            return (false, format!("reconstruction rejected: {e}"));
        }
    };

    let linear = Matrix3::<f64>::new(1.0, 0.7, -0.2, 0.0, 2.0, 0.3, 0.1, 0.4, 0.0);
    let m = AffineMap { linear: linear / linear.determinant().cbrt(), translation: Vec3::new(3.0, -1.0, 0.5) };
    let mut moved = data.clone();
    moved.frame = moved.frame.map(|p| m.apply(&p));
    let r = reconstruct(&moved, &tol).unwrap();
    let (found, moved_align) = affine_align(&inner, &r.net).unwrap();
    let det = found.det();
    let expected = inner.map_points(|p| m.apply(p)).unwrap();
    let recovered = r.net.points().iter().map(|((i, j), p)| (p - expected.point(i, j)).norm()).fold(0.0, f64::max) / expected.diameter();
    let pass = rebuilt && align <= 1e-8 && moved_align <= 1e-8 && recovered <= 1e-8 && (det - 1.0).abs() <= 1e-9;
    (
        pass,
        format!("aligned residual {align:.1e}, transformed frame residual {recovered:.1e} (tol 1e-8), det {det:.15} (tol 1 +- 1e-9)"),
    )
}

fn failing(r: &ResidualReport) -> Vec<(usize, usize)> {
    let mut f = r.failing_sites();
    f.sort_by_key(|&(i, j)| (j, i));
    f
}

fn criterion_8_negative_controls() -> Verdict {
    const TOL: f64 = 1e-9;
    let (net, a) = hyperboloid_net(&HyperboloidSpec { u0: 0.2, v0: 0.2, nu: 8, nv: 8, ..HyperboloidSpec::default() }).unwrap();
    let s = structure(&net, a.gamma(0, 0));
    let mut misses = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            misses.push(name.to_string());
        }
    };

    let clean = verify_net(&net, a.gamma(0, 0), &Tolerances::default());
    check("clean net", clean.passed());

    // moving one vertex off its plane tilts the stars of its four neighbours too
    let bad = net.with_point(4, 4, net.point(4, 4) + a.nu(4, 4).normalize() * 1e-4).unwrap();
    let v = verify_net(&bad, 1.0, &Tolerances::default());
    check(
        "displaced vertex",
        v.failed_suites() == ["planarity"] && failing(&v.reports[0]) == [(4, 3), (3, 4), (4, 4), (5, 4), (4, 5)],
    );

    let nu = s.nu.replaced(4, 4, -s.nu[(4, 4)]).unwrap();
    let (lu, lv) = verify_lelieuvre(&net, &nu, TOL);
    check("negated co-normal", failing(&lu) == [(3, 4), (4, 4)] && failing(&lv) == [(4, 3), (4, 4)]);

    let gamma = s.gamma.replaced(3, 5, s.gamma[(3, 5)] * (1.0 + 1e-6)).unwrap();
    check(
        "perturbed gamma",
        moutard_residual(&s.nu, &s.gamma, TOL).passed() && failing(&moutard_residual(&s.nu, &gamma, TOL)) == [(3, 5)],
    );

    let omega = s.omega.replaced(6, 2, s.omega[(6, 2)] * (1.0 + 1e-6)).unwrap();
    check(
        "perturbed omega",
        omega_conormal_residual(&s.nu, &s.gamma, &s.omega, TOL).passed()
            && failing(&omega_conormal_residual(&s.nu, &s.gamma, &omega, TOL)) == [(6, 2)],
    );

    let mut sa = s.clone();
    sa.a = sa.a.replaced(4, 4, sa.a_scale[(4, 4)] * 1e-6).unwrap();
    let (ra, rb) = affine_sphere_residual(&sa, TOL);
    check("perturbed A", rb.passed() && failing(&ra) == [(4, 3), (4, 4)]);

    let p_v = s.p_v.replaced(3, 5, s.p_v[(3, 5)] * (1.0 + 1e-6)).unwrap();
    let (_, loops) = gamma_from_p(&s.p_u, &p_v, s.gamma[(0, 0)], TOL);
    check("perturbed p", failing(&loops) == (3..8).map(|i| (i, 5)).collect::<Vec<_>>());

    (misses.is_empty(), format!("7 controls, missed [{}]", misses.join(", ")))
}

fn main() {
    let criteria: [fn() -> Verdict; 8] = [
        criterion_1_hyperboloid_closed_forms,
        criterion_2_identity_suites,
        criterion_3_gauge_invariance,
        criterion_4_smooth_limit,
        criterion_5_classification,
        criterion_6_minimal_nets,
        criterion_7_reconstruction,
        criterion_8_negative_controls,
    ];
    let mut failed = 0;
    for (n, run) in criteria.iter().enumerate() {
        let (pass, details) = run();
        println!("criterion {}: {} {details}", n + 1, if pass { "PASS" } else { "FAIL" });
        failed += usize::from(!pass);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
