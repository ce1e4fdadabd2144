//! Extract, reconstruct, align.

mod common;

use asymnet::cli_io::{compat_from_json, compat_to_json};
use asymnet::reconstruction::{affine_align, extract, reconstruct, reconstruct_unchecked, AffineMap, CompatData};
use asymnet::{AsymptoticNet, Error, Tolerances, Vec3};
use common::{generic_net, small_hyperboloid};
use nalgebra::Matrix3;

fn inner(net: &AsymptoticNet) -> AsymptoticNet {
    let d = net.domain();
    net.sub_net(1, 1, d.nu() - 2, d.nv() - 2).unwrap()
}

fn round_trip(net: &AsymptoticNet, gamma0: f64) {
    let tol = Tolerances::default();
    let data = extract(net, gamma0, &tol).unwrap();
    let r = reconstruct(&data, &tol).unwrap();
    assert!(r.coherence.passed() && r.gauge_loop.passed() && r.compat.passed());
    let (map, residual) = affine_align(&r.net, &inner(net)).unwrap();
    assert!(residual <= 1e-10, "{residual:e}");
    // the frame is copied from the net, so the map is the identity
    assert!((map.linear - Matrix3::identity()).norm() < 1e-10);
}

#[test]
fn hyperboloid_round_trip() {
    let (net, a) = small_hyperboloid();
    round_trip(&net, a.gamma(0, 0));
    round_trip(&net, 2.5);
}

#[test]
fn generic_round_trip() {
    round_trip(&generic_net(), 1.0);
}

fn shear() -> AffineMap {
    let linear = Matrix3::<f64>::new(1.0, 0.7, -0.2, 0.0, 2.0, 0.3, 0.1, 0.4, 0.0);
    // rescale to unit determinant
    let linear = linear / linear.determinant().cbrt();
    AffineMap { linear, translation: Vec3::new(3.0, -1.0, 0.5) }
}

#[test]
fn transformed_frame_gives_transformed_net() {
    let tol = Tolerances::default();
    let net = generic_net();
    let mut data = extract(&net, 1.0, &tol).unwrap();
    let m = shear();
    assert!((m.det() - 1.0).abs() < 1e-14);
    data.frame = data.frame.map(|p| m.apply(&p));
    let r = reconstruct(&data, &tol).unwrap();
    let expected = inner(&net).map_points(|p| m.apply(p)).unwrap();
    let (found, residual) = affine_align(&inner(&net), &r.net).unwrap();
    assert!(residual <= 1e-10);
    assert!((found.det() - 1.0).abs() <= 1e-9, "{}", found.det());
    assert!((found.linear - m.linear).norm() <= 1e-9);
    for ((i, j), p) in r.net.points().iter() {
        assert!((p - expected.point(i, j)).norm() <= 1e-10 * expected.diameter());
    }
}

#[test]
fn transformed_net_gives_the_same_data() {
    let tol = Tolerances::default();
    let net = generic_net();
    let moved = net.map_points(|p| shear().apply(p)).unwrap();
    let (d1, d2) = (extract(&net, 1.0, &tol).unwrap(), extract(&moved, 1.0, &tol).unwrap());
    let close = |a: &[f64], b: &[f64], tol: f64| {
        let scale = a.iter().map(|x| x.abs()).fold(0.0, f64::max);
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
    };
    // far edges are short next to the translation, so differences lose digits
    assert!(close(d1.omega.values(), d2.omega.values(), 1e-9));
    // H goes through p - 1/p with p within a few percent of one
    assert!(close(d1.mean_curv_u.values(), d2.mean_curv_u.values(), 1e-7));
    assert!(close(d1.mean_curv_v.values(), d2.mean_curv_v.values(), 1e-7));
}

#[test]
fn file_round_trip_matches_memory() {
    let tol = Tolerances::default();
    let (net, a) = small_hyperboloid();
    let data = extract(&net, a.gamma(0, 0), &tol).unwrap();
    let reloaded = compat_from_json(&compat_to_json(&data).unwrap(), "test").unwrap();
    assert_eq!(reloaded, data);
    let (r1, r2) = (reconstruct(&data, &tol).unwrap(), reconstruct(&reloaded, &tol).unwrap());
    for (p, q) in r1.net.points().values().iter().zip(r2.net.points().values()) {
        assert!((p - q).norm() <= 1e-12 * r1.net.diameter());
    }
}

fn bump(data: &CompatData, what: &str) -> CompatData {
    let mut d = data.clone();
    match what {
        "a" => d.a = d.a.replaced(4, 4, d.a[(4, 4)] + 1e-3).unwrap(),
        "omega" => d.omega = d.omega.replaced(4, 4, d.omega[(4, 4)] * 1.001).unwrap(),
        "h" => d.mean_curv_v = d.mean_curv_v.replaced(4, 4, d.mean_curv_v[(4, 4)] * 1.01).unwrap(),
        _ => unreachable!(),
    }
    d
}

#[test]
fn incompatible_input_is_rejected() {
    let tol = Tolerances::default();
    let data = extract(&generic_net(), 1.0, &tol).unwrap();
    for what in ["a", "omega", "h"] {
        match reconstruct(&bump(&data, what), &tol) {
            Err(Error::Incompatible(r)) => assert!(!r.passed()),
            other => panic!("{what}: {:?}", other.map(|r| r.coherence.max_abs)),
        }
        match reconstruct_unchecked(&bump(&data, what), &tol) {
            Ok(r) => assert!(!r.compat.passed()),
            Err(e) => assert!(matches!(e, Error::NotIntegrable(_)), "{what}: {e}"),
        }
    }
}

#[test]
fn wrong_frame_is_rejected() {
    let tol = Tolerances::default();
    let mut data = extract(&generic_net(), 1.0, &tol).unwrap();
    data.frame[3] += Vec3::new(0.0, 0.0, 1e-3);
    assert!(matches!(reconstruct(&data, &tol), Err(Error::FrameDeterminant { .. })));
}

#[test]
fn too_small_for_reconstruction() {
    let net = asymnet::generators::paraboloid_net(2, 5).unwrap();
    assert!(matches!(extract(&net, 1.0, &Tolerances::default()), Err(Error::InvalidDomain { .. })));
}
