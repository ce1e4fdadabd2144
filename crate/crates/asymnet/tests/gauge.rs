//! Changing the gauge seed rescales γ and ν in a checkerboard and leaves
//! every gauge-free quantity alone.

mod common;

use asymnet::structural::classify;
use asymnet::{Family, SiteField};
use common::{generic_net, small_hyperboloid, structure};

fn close(a: &SiteField<f64>, b: &SiteField<f64>, tol: f64) -> bool {
    a.values().iter().zip(b.values()).all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0))
}

fn check(net: &asymnet::AsymptoticNet) {
    let lambda = 7.3;
    let s1 = structure(net, 1.0);
    let s2 = structure(net, lambda);
    assert!(close(&s1.omega, &s2.omega, 1e-12));
    assert!(close(&s1.m, &s2.m, 1e-12));
    for (a, b) in [(&s1.p_u, &s2.p_u), (&s1.p_v, &s2.p_v), (&s1.h_u, &s2.h_u), (&s1.h_v, &s2.h_v)] {
        assert!(close(a, b, 1e-12));
    }
    assert!(close(&s1.mean_curv_u, &s2.mean_curv_u, 1e-12));
    assert!(close(&s1.mean_curv_v, &s2.mean_curv_v, 1e-12));

    // γ picks up λ on the seed's parity and 1/λ on the other
    for ((i, j), &g) in s1.gamma.iter() {
        let factor = if (i + j) % 2 == 0 { lambda } else { 1.0 / lambda };
        assert!((s2.gamma[(i, j)] - factor * g).abs() <= 1e-12 * factor * g, "gamma ({i}, {j})");
    }
    // ν at vertex (i, j) sits at corner 0 of quad (i, j) with exponent -1
    for ((i, j), n) in s1.nu.iter() {
        let factor = if (i + j) % 2 == 0 { 1.0 / lambda } else { lambda };
        assert!((s2.nu[(i, j)] - n * factor).norm() <= 1e-12 * factor * n.norm(), "nu ({i}, {j})");
    }

    let (c1, c2) = (classify(&s1, 1e-8), classify(&s2, 1e-8));
    assert_eq!(c1.minimal.minimal, c2.minimal.minimal);
    assert_eq!(c1.affine_sphere, c2.affine_sphere);
    assert_eq!(c1.constant_c.constant, c2.constant_c.constant);
    assert!((c1.constant_c.c - c2.constant_c.c).abs() <= 1e-12 * c1.constant_c.c.abs().max(1.0));
}

#[test]
fn hyperboloid_gauge_covariance() {
    check(&small_hyperboloid().0);
}

#[test]
fn generic_gauge_covariance() {
    check(&generic_net());
}

#[test]
fn seed_quad_does_not_matter_up_to_rescaling() {
    let net = generic_net();
    let s = structure(&net, 1.0);
    let moved = asymnet::affine_structure::analyze_structure(&net, s.gamma[(3, 4)], (3, 4), &Default::default()).unwrap();
    for ((i, j), &g) in s.gamma.iter() {
        assert!((moved.gamma[(i, j)] - g).abs() <= 1e-12 * g);
    }
    assert_eq!(moved.gamma.family(), Family::Quad);
}
