//! Minimal, affine-sphere and constant-c verdicts.

mod common;

use asymnet::generators::{hyperboloid_net, paraboloid_net, HyperboloidSpec};
use asymnet::structural::{affine_sphere_residual, classify, is_minimal};
use common::{generic_net, structure};

fn hyperboloid(du: f64, dv: f64) -> asymnet::affine_structure::AffineStructure {
    let spec = HyperboloidSpec { u0: 0.2, v0: 0.2, du, dv, nu: 8, nv: 8, ..HyperboloidSpec::default() };
    let (net, a) = hyperboloid_net(&spec).unwrap();
    structure(&net, a.gamma(0, 0))
}

#[test]
fn hyperboloid_is_an_affine_sphere() {
    let s = hyperboloid(0.1, 0.2);
    let (ra, rb) = affine_sphere_residual(&s, 1e-9);
    assert!(ra.passed() && rb.passed(), "{:e} {:e}", ra.max_abs, rb.max_abs);
    let c = classify(&s, 1e-9);
    assert!(c.affine_sphere);
    assert!(!c.minimal.minimal);
}

/// On the hyperboloid `c = (1 - γ²)/(Ωγ)` equals `1/(2c^{3/2})` on every quad
/// whatever the two steps are. The spread is limited by the cancellation in
/// `1 - γ²` with `γ` close to one.
#[test]
fn hyperboloid_has_constant_c_for_any_steps() {
    for (du, dv) in [(0.1, 0.2), (0.1, 0.1), (0.05, 0.15)] {
        let b = classify(&hyperboloid(du, dv), 1e-9).constant_c;
        assert!(b.constant, "({du}, {dv}): spread {:e}", b.spread);
        assert!((b.c - 0.5).abs() < 1e-9, "{}", b.c);
    }
}

#[test]
fn constant_c_does_not_depend_on_the_seed() {
    let spec = HyperboloidSpec { u0: 0.2, v0: 0.2, du: 0.1, dv: 0.1, nu: 8, nv: 8, ..HyperboloidSpec::default() };
    let (net, _) = hyperboloid_net(&spec).unwrap();
    let b1 = classify(&structure(&net, 1.0), 1e-9).constant_c;
    let b2 = classify(&structure(&net, 0.37), 1e-9).constant_c;
    assert!(b1.constant && b2.constant);
    assert!((b1.c - b2.c).abs() <= 1e-12 * b1.c);
}

#[test]
fn paraboloid_is_minimal() {
    let s = structure(&paraboloid_net(5, 5).unwrap(), 1.0);
    let m = is_minimal(&s, 1e-12);
    assert!(m.minimal);
    assert_eq!(m.max_abs_h, 0.0);
    assert!(classify(&s, 1e-9).affine_sphere);
}

#[test]
fn generic_net_is_neither() {
    let c = classify(&structure(&generic_net(), 1.0), 1e-9);
    assert!(!c.minimal.minimal);
    assert!(!c.affine_sphere);
    assert!(!c.constant_c.constant);
    assert!(c.minimal.witness.is_some());
}
