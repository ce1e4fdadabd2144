#![allow(dead_code)]

use asymnet::affine_structure::{analyze_structure, AffineStructure};
use asymnet::generators::{hyperboloid_net, perturbed_hyperboloid_net, AnalyticHyperboloid, HyperboloidSpec};
use asymnet::{AsymptoticNet, Tolerances};

/// A hyperboloid sample far from the corner where the surface pinches, so
/// that every closed form is reproduced near machine precision.
pub fn small_hyperboloid() -> (AsymptoticNet, AnalyticHyperboloid) {
    hyperboloid_net(&HyperboloidSpec { u0: 0.2, v0: 0.2, nu: 8, nv: 8, ..HyperboloidSpec::default() }).unwrap()
}

/// A net with non-zero cubic form and non-constant mean curvature.
pub fn generic_net() -> AsymptoticNet {
    perturbed_hyperboloid_net(&HyperboloidSpec { nu: 10, nv: 10, ..HyperboloidSpec::default() }, 0.02).unwrap()
}

pub fn structure(net: &AsymptoticNet, gamma0: f64) -> AffineStructure {
    analyze_structure(net, gamma0, (0, 0), &Tolerances::default()).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
