//! Property tests.

use asymnet::affine_structure::{build_structure, h_from_p};
use asymnet::cli_io::{net_from_json, net_to_json};
use asymnet::generators::minimal_net;
use asymnet::net::quad_m;
use asymnet::reconstruction::{affine_align, extract, p_from_h, reconstruct, AffineMap};
use asymnet::structural::classify;
use asymnet::{AsymptoticNet, StaggeredDomain, Tolerances, Vec3};
use nalgebra::Matrix3;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e3..1e3f64, -1.0..1.0f64, any::<f64>().prop_filter("finite", |x| x.is_finite())]
}

fn any_net() -> impl Strategy<Value = AsymptoticNet> {
    (1usize..5, 1usize..5).prop_flat_map(|(nu, nv)| {
        prop::collection::vec([finite(), finite(), finite()], (nu + 1) * (nv + 1)).prop_map(move |pts| {
            let d = StaggeredDomain::new(nu, nv).unwrap();
            AsymptoticNet::new(d, pts.into_iter().map(Vec3::from).collect()).unwrap()
        })
    })
}

/// Unit-determinant maps away from the degenerate ones.
fn equi_affine() -> impl Strategy<Value = AffineMap> {
    (prop::array::uniform9(-2.0..2.0f64), prop::array::uniform3(-10.0..10.0f64))
        .prop_filter_map("well conditioned", |(m, t)| {
            let linear = Matrix3::from_row_slice(&m);
            let det = linear.determinant();
            let linear = linear / det.abs().cbrt() * det.signum();
            let cond = linear.norm() * linear.try_inverse()?.norm();
            (cond < 50.0).then(|| AffineMap { linear, translation: Vec3::from(t) })
        })
}

/// Minimal nets near the paraboloid, built from perturbed co-normal curves.
fn minimal() -> impl Strategy<Value = AsymptoticNet> {
    (4usize..8, 4usize..8, prop::array::uniform4(-0.1..0.1f64)).prop_map(|(nu, nv, k)| {
        let f: Vec<_> = (0..=nu).map(|i| {
            let t = i as f64;
            Vec3::new(-t, k[0] * (t * 0.8).sin(), -0.5 + k[1] * t)
        }).collect();
        let g: Vec<_> = (0..=nv).map(|j| {
            let t = j as f64;
            Vec3::new(k[2] * (t * 0.6).cos(), -t, -0.5 + k[3] * t * t * 0.1)
        }).collect();
        minimal_net(&f, &g, Vec3::zeros()).unwrap()
    })
}

proptest! {
    #[test]
    fn json_round_trip_is_bit_exact(net in any_net()) {
        let back = net_from_json(&net_to_json(&net).unwrap(), "prop").unwrap();
        for (a, b) in net.points().values().iter().zip(back.points().values()) {
            for k in 0..3 {
                prop_assert_eq!(a[k].to_bits(), b[k].to_bits());
            }
        }
    }

    #[test]
    fn volume_is_equi_affine_invariant(net in any_net().prop_filter("moderate", |n| n.diameter() < 1e4), m in equi_affine()) {
        let moved = net.map_points(|p| m.apply(p)).unwrap();
        let (m0, m1) = (quad_m(&net), quad_m(&moved));
        for (i, j) in net.domain().sites(asymnet::Family::Quad) {
            // edges are differences of points, so round-off follows the coordinates
            let corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
            let r = corners.iter().map(|&(a, b)| net.point(a, b).norm().max(moved.point(a, b).norm())).fold(0.0, f64::max);
            prop_assert!((m0[(i, j)] - m1[(i, j)]).abs() <= 1e-12 * r.powi(3).max(1e-300));
        }
    }

    #[test]
    fn p_from_h_inverts_h(p in 1e-6..1e6f64) {
        let q = p_from_h(h_from_p(p));
        prop_assert!((q - p).abs() <= 1e-12 * p.max(1.0 / p) * p);
    }

    #[test]
    fn minimal_nets_stay_minimal(net in minimal(), seed in 0.1..10.0f64) {
        let tol = Tolerances::default();
        let s = build_structure(&net, seed, &tol).unwrap();
        prop_assert!(classify(&s, 1e-12).minimal.minimal);
        prop_assert!(s.p_u.values().iter().chain(s.p_v.values()).all(|p| (p - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn minimal_nets_reconstruct(net in minimal(), m in equi_affine()) {
        let tol = Tolerances::default();
        let net = net.map_points(|p| m.apply(p)).unwrap();
        let data = extract(&net, 1.0, &tol).unwrap();
        let r = reconstruct(&data, &tol).unwrap();
        let d = net.domain();
        let (_, residual) = affine_align(&r.net, &net.sub_net(1, 1, d.nu() - 2, d.nv() - 2).unwrap()).unwrap();
        prop_assert!(residual <= 1e-8, "{:e}", residual);
    }
}
