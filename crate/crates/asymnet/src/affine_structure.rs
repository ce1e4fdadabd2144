//! Affine metric, gauge, co-normals, affine normal, cubic form and mean
//! curvature of a net, each with the identity that certifies it.
//!
//! Quad `(i, j)` has corners numbered `0: (i, j)`, `1: (i+1, j)`,
//! `2: (i, j+1)`, `3: (i+1, j+1)`. At corner `k` the co-normal is
//! `ν = γ^{s_k} w_k` with `w_k` the cross product of the two quad edges
//! meeting there divided by `Ω`, and `s = (-1, +1, +1, -1)`.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::net::{assert_nondegenerate, det3, planarity_report, quad_m, AsymptoticNet, Vec3};
use crate::residual::ResidualReport;
use crate::staggered_grid::{Family, SiteField, StaggeredDomain};
use crate::tolerances::Tolerances;

pub use crate::residual::SiteResidual;

const CORNER_SIGN: [i32; 4] = [-1, 1, 1, -1];

/// Everything computed from a net and a gauge seed.
#[derive(Debug, Clone)]
pub struct AffineStructure {
    pub domain: StaggeredDomain,
    pub gamma0: f64,
    pub seed: (usize, usize),
    pub m: SiteField<f64>,
    pub omega: SiteField<f64>,
    pub gamma: SiteField<f64>,
    pub nu: SiteField<Vec3>,
    pub xi: SiteField<Vec3>,
    pub a: SiteField<f64>,
    pub b: SiteField<f64>,
    /// Magnitude scale of the determinant defining `A`; the yardstick for
    /// deciding whether a difference of `A` values is round-off.
    pub a_scale: SiteField<f64>,
    pub b_scale: SiteField<f64>,
    pub p_u: SiteField<f64>,
    pub p_v: SiteField<f64>,
    pub h_u: SiteField<f64>,
    pub h_v: SiteField<f64>,
    pub mean_curv_u: SiteField<f64>,
    pub mean_curv_v: SiteField<f64>,
    pub reports: Vec<ResidualReport>,
}

impl AffineStructure {
    pub fn report(&self, name: &str) -> Option<&ResidualReport> {
        self.reports.iter().find(|r| r.name == name)
    }

    pub fn passed(&self) -> bool {
        self.reports.iter().all(ResidualReport::passed)
    }
}

/// `Ω = √M` per quad.
pub fn compute_omega(net: &AsymptoticNet, tol: f64) -> Result<SiteField<f64>> {
    assert_nondegenerate(net, tol)?;
    Ok(quad_m(net).map(|m| m.sqrt()))
}

/// `w_k` at corner `k` of quad `(i, j)`.
#[inline]
pub fn corner_w(net: &AsymptoticNet, omega: &SiteField<f64>, i: usize, j: usize, k: usize) -> Vec3 {
    let c = match k {
        0 => net.q1(i, j).cross(&net.q2(i, j)),
        1 => net.q1(i, j).cross(&net.q2(i + 1, j)),
        2 => net.q1(i, j + 1).cross(&net.q2(i, j)),
        _ => net.q1(i, j + 1).cross(&net.q2(i + 1, j)),
    };
    c / omega[(i, j)]
}

fn sine(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm() / (a.norm() * b.norm())
}

/// Solves for the gauge breadth-first from `seed`, visiting neighbours in the
/// order right, up, left, down.
///
/// A neighbour's γ is fixed by requiring its co-normal at the shared vertex
/// to equal the one already known. The two candidates must be parallel and
/// equally oriented; otherwise the net is not asymptotic there.
pub fn propagate_gamma(
    net: &AsymptoticNet,
    omega: &SiteField<f64>,
    gamma0: f64,
    seed: (usize, usize),
    align_tol: f64,
) -> Result<SiteField<f64>> {
    if !(gamma0 > 0.0 && gamma0.is_finite()) {
        return Err(Error::InvalidParameter { name: "gamma0", reason: format!("must be positive, got {gamma0}") });
    }
    let d = net.domain();
    if !d.contains(Family::Quad, seed.0, seed.1) {
        return Err(Error::OutOfRange { family: Family::Quad, i: seed.0, j: seed.1 });
    }
    let (nu, nv) = (d.nu(), d.nv());
    let mut gamma = vec![f64::NAN; nu * nv];
    gamma[seed.1 * nu + seed.0] = gamma0;
    let mut queue = VecDeque::from([seed]);
    // (di, dj, my corner, neighbour corner)
    const STEPS: [(isize, isize, usize, usize); 4] = [(1, 0, 1, 0), (0, 1, 2, 0), (-1, 0, 0, 1), (0, -1, 0, 2)];
    while let Some((i, j)) = queue.pop_front() {
        let g = gamma[j * nu + i];
        for (di, dj, mine, theirs) in STEPS {
            let (a, b) = (i as isize + di, j as isize + dj);
            if a < 0 || b < 0 || a >= nu as isize || b >= nv as isize {
                continue;
            }
            let (a, b) = (a as usize, b as usize);
            if !gamma[b * nu + a].is_nan() {
                continue;
            }
            let nu_here = corner_w(net, omega, i, j, mine) * g.powi(CORNER_SIGN[mine]);
            let w = corner_w(net, omega, a, b, theirs);
            let (vi, vj) = (i + (mine & 1), j + (mine >> 1));
            let ratio = nu_here.dot(&w) / w.norm_squared();
            let misalignment = sine(&nu_here, &w);
            if !(ratio > 0.0) || !(misalignment <= align_tol) {
                return Err(Error::GaugeInconsistent { i: vi, j: vj, misalignment });
            }
            gamma[b * nu + a] = ratio.powi(CORNER_SIGN[theirs]);
            queue.push_back((a, b));
        }
    }
    SiteField::from_values(d, Family::Quad, gamma)
}

/// Co-normal at every vertex, taken from the first existing incident quad in
/// the order upper-right, upper-left, lower-left, lower-right.
pub fn conormals(net: &AsymptoticNet, omega: &SiteField<f64>, gamma: &SiteField<f64>) -> SiteField<Vec3> {
    let d = net.domain();
    SiteField::from_fn(d, Family::Vertex, |i, j| {
        let candidates = [(i as isize, j as isize, 0), (i as isize - 1, j as isize, 1), (i as isize - 1, j as isize - 1, 3), (i as isize, j as isize - 1, 2)];
        for (a, b, k) in candidates {
            if let Some(&g) = gamma.at(a, b) {
                let (a, b) = (a as usize, b as usize);
                return corner_w(net, omega, a, b, k) * g.powi(CORNER_SIGN[k]);
            }
        }
        unreachable!("every vertex touches a quad")
    })
}

/// `ν(i,j) × ν(i+1,j) = q1` and `ν(i,j) × ν(i,j+1) = -q2`, relative to the
/// larger of the edge and `|ν||ν'|`.
pub fn verify_lelieuvre(net: &AsymptoticNet, nu: &SiteField<Vec3>, tol: f64) -> (ResidualReport, ResidualReport) {
    let d = net.domain();
    let ru = d.sites(Family::UEdge).map(|(i, j)| {
        let e = net.q1(i, j);
        let c = nu[(i, j)].cross(&nu[(i + 1, j)]);
        (i, j, (c - e).norm() / e.norm().max(nu[(i, j)].norm() * nu[(i + 1, j)].norm()))
    });
    let ru = ResidualReport::from_sites("lelieuvre_u", Family::UEdge, tol, ru.collect::<Vec<_>>());
    let rv = d.sites(Family::VEdge).map(|(i, j)| {
        let e = net.q2(i, j);
        let c = nu[(i, j)].cross(&nu[(i, j + 1)]);
        (i, j, (c + e).norm() / e.norm().max(nu[(i, j)].norm() * nu[(i, j + 1)].norm()))
    });
    let rv = ResidualReport::from_sites("lelieuvre_v", Family::VEdge, tol, rv.collect::<Vec<_>>());
    (ru, rv)
}

/// `γ²(ν00 + ν11) = ν01 + ν10` per quad.
pub fn moutard_residual(nu: &SiteField<Vec3>, gamma: &SiteField<f64>, tol: f64) -> ResidualReport {
    let sites = gamma.iter().map(|((i, j), &g)| {
        let n = [nu[(i, j)], nu[(i + 1, j)], nu[(i, j + 1)], nu[(i + 1, j + 1)]];
        let scale = n.iter().map(|v| v.norm()).fold(0.0, f64::max) * (g * g).max(1.0);
        let r = (g * g * (n[0] + n[3]) - (n[1] + n[2])).norm();
        (i, j, r / scale)
    });
    ResidualReport::from_sites("moutard", Family::Quad, tol, sites.collect::<Vec<_>>())
}

/// `ξ = q12 / Ω` per quad.
pub fn affine_normal(net: &AsymptoticNet, omega: &SiteField<f64>) -> SiteField<Vec3> {
    let q12 = net.q12();
    SiteField::from_fn(net.domain(), Family::Quad, |i, j| q12[(i, j)] / omega[(i, j)])
}

/// `ν·ξ` at the four corners against `γ^{-1}, γ, γ, γ^{-1}`, relative.
pub fn corner_products_residual(nu: &SiteField<Vec3>, xi: &SiteField<Vec3>, gamma: &SiteField<f64>, tol: f64) -> ResidualReport {
    let sites = gamma.iter().map(|((i, j), &g)| {
        let r = (0..4)
            .map(|k| {
                let expected = g.powi(CORNER_SIGN[k]);
                (nu[(i + (k & 1), j + (k >> 1))].dot(&xi[(i, j)]) - expected).abs() / expected
            })
            .fold(0.0, f64::max);
        (i, j, r)
    });
    ResidualReport::from_sites("corner_products", Family::Quad, tol, sites.collect::<Vec<_>>())
}

/// `Ω = γ^{-1} [ν(i,j), ν(i,j+1), ν(i+1,j)]`, relative.
pub fn omega_conormal_residual(nu: &SiteField<Vec3>, gamma: &SiteField<f64>, omega: &SiteField<f64>, tol: f64) -> ResidualReport {
    let sites = omega.iter().map(|((i, j), &w)| {
        let det = det3(&nu[(i, j)], &nu[(i, j + 1)], &nu[(i + 1, j)]) / gamma[(i, j)];
        (i, j, (w - det).abs() / w)
    });
    ResidualReport::from_sites("omega_conormal", Family::Quad, tol, sites.collect::<Vec<_>>())
}

#[derive(Debug, Clone)]
pub struct CubicForms {
    pub a: SiteField<f64>,
    pub b: SiteField<f64>,
    pub a_scale: SiteField<f64>,
    pub b_scale: SiteField<f64>,
    pub fourfold: ResidualReport,
}

/// The weighted normals `γ(i,j)ξ(i,j)`, `ξ(i,j-1)/γ(i,j-1)`,
/// `ξ(i-1,j)/γ(i-1,j)` and `γ(i-1,j-1)ξ(i-1,j-1)` around vertex `(i, j)`.
fn weighted_normals(gamma: &SiteField<f64>, xi: &SiteField<Vec3>, i: usize, j: usize) -> [Vec3; 4] {
    [
        xi[(i, j)] * gamma[(i, j)],
        xi[(i, j - 1)] / gamma[(i, j - 1)],
        xi[(i - 1, j)] / gamma[(i - 1, j)],
        xi[(i - 1, j - 1)] * gamma[(i - 1, j - 1)],
    ]
}

/// `A = [q1(i-1,j), q1(i,j), γξ]` and `B = [q2(i,j-1), q2(i,j), γξ]` at
/// interior vertices, with the spread of the four equivalent forms.
pub fn cubic_forms(net: &AsymptoticNet, gamma: &SiteField<f64>, xi: &SiteField<Vec3>, tol: f64) -> CubicForms {
    let d = net.domain();
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut a_scale = Vec::new();
    let mut b_scale = Vec::new();
    let mut spread = Vec::new();
    for (i, j) in d.sites(Family::InteriorVertex) {
        let n = weighted_normals(gamma, xi, i, j);
        let (e1m, e1p) = (net.q1(i - 1, j), net.q1(i, j));
        let (e2m, e2p) = (net.q2(i, j - 1), net.q2(i, j));
        let av = n.map(|x| det3(&e1m, &e1p, &x));
        let bv = n.map(|x| det3(&e2m, &e2p, &x));
        let nmax = n.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let sa = e1m.norm() * e1p.norm() * nmax;
        let sb = e2m.norm() * e2p.norm() * nmax;
        let dev = |v: [f64; 4]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        };
        spread.push((i, j, (dev(av) / sa).max(dev(bv) / sb)));
        a.push(av[0]);
        b.push(bv[0]);
        a_scale.push(e1m.norm() * e1p.norm() * n[0].norm());
        b_scale.push(e2m.norm() * e2p.norm() * n[0].norm());
    }
    let field = |v| SiteField::from_values(d, Family::InteriorVertex, v).expect("interior vertex count");
    CubicForms {
        a: field(a),
        b: field(b),
        a_scale: field(a_scale),
        b_scale: field(b_scale),
        fourfold: ResidualReport::from_sites("cubic_fourfold", Family::InteriorVertex, tol, spread),
    }
}

#[derive(Debug, Clone)]
pub struct EdgeQuantities {
    pub p_u: SiteField<f64>,
    pub p_v: SiteField<f64>,
    pub h_u: SiteField<f64>,
    pub h_v: SiteField<f64>,
    pub mean_curv_u: SiteField<f64>,
    pub mean_curv_v: SiteField<f64>,
}

/// Gauge product across each interior edge, read off the two co-normal
/// formulas at the edge's base vertex so that no propagated γ enters.
///
/// On a v-edge `(i, j)` the quads `(i-1, j)` and `(i, j)` meet at vertex
/// `(i, j)`, where `ν = w_0(i,j)/γ(i,j) = γ(i-1,j) w_1(i-1,j)`; hence
/// `p = γ(i,j)γ(i-1,j)` is the ratio of the two `w`.
pub fn local_p(net: &AsymptoticNet, omega: &SiteField<f64>) -> (SiteField<f64>, SiteField<f64>) {
    let d = net.domain();
    let ratio = |w_new: Vec3, w_old: Vec3| w_new.dot(&w_old) / w_old.norm_squared();
    let p_u = SiteField::from_fn(d, Family::InteriorUEdge, |i, j| {
        ratio(corner_w(net, omega, i, j, 0), corner_w(net, omega, i, j - 1, 2))
    });
    let p_v = SiteField::from_fn(d, Family::InteriorVEdge, |i, j| {
        ratio(corner_w(net, omega, i, j, 0), corner_w(net, omega, i - 1, j, 1))
    });
    (p_u, p_v)
}

/// `h = p - 1/p`.
pub fn h_from_p(p: f64) -> f64 {
    p - 1.0 / p
}

/// `p`, `h` and `H = h / √(ΩΩ')` on interior edges of both families.
pub fn edge_quantities(net: &AsymptoticNet, omega: &SiteField<f64>) -> EdgeQuantities {
    let (p_u, p_v) = local_p(net, omega);
    let h_u = p_u.map(|&p| h_from_p(p));
    let h_v = p_v.map(|&p| h_from_p(p));
    let mean_curv_u = SiteField::from_fn(net.domain(), Family::InteriorUEdge, |i, j| {
        h_u[(i, j)] / (omega[(i, j - 1)] * omega[(i, j)]).sqrt()
    });
    let mean_curv_v = SiteField::from_fn(net.domain(), Family::InteriorVEdge, |i, j| {
        h_v[(i, j)] / (omega[(i - 1, j)] * omega[(i, j)]).sqrt()
    });
    EdgeQuantities { p_u, p_v, h_u, h_v, mean_curv_u, mean_curv_v }
}

/// Agreement of the local `p` with the product of propagated gauges, one
/// report per edge family.
pub fn gauge_product_residual(gamma: &SiteField<f64>, e: &EdgeQuantities, tol: f64) -> (ResidualReport, ResidualReport) {
    let u = e.p_u.iter().map(|((i, j), &p)| (i, j, (p - gamma[(i, j)] * gamma[(i, j - 1)]).abs() / p));
    let v = e.p_v.iter().map(|((i, j), &p)| (i, j, (p - gamma[(i, j)] * gamma[(i - 1, j)]).abs() / p));
    (
        ResidualReport::from_sites("gauge_product_u", Family::InteriorUEdge, tol, u.collect::<Vec<_>>()),
        ResidualReport::from_sites("gauge_product_v", Family::InteriorVEdge, tol, v.collect::<Vec<_>>()),
    )
}

/// Full pipeline with every residual attached but without failing on them.
///
/// Only the non-degeneracy gate and gauge consistency can stop it.
pub fn analyze_structure(net: &AsymptoticNet, gamma0: f64, seed: (usize, usize), tol: &Tolerances) -> Result<AffineStructure> {
    let d = net.domain();
    let m = quad_m(net);
    let omega = compute_omega(net, tol.nondegenerate)?;
    let gamma = propagate_gamma(net, &omega, gamma0, seed, tol.gauge_alignment)?;
    let nu = conormals(net, &omega, &gamma);
    let xi = affine_normal(net, &omega);
    let cubic = cubic_forms(net, &gamma, &xi, tol.identity);
    let edges = edge_quantities(net, &omega);

    let (lu, lv) = verify_lelieuvre(net, &nu, tol.identity);
    let (gu, gv) = gauge_product_residual(&gamma, &edges, tol.identity);
    let reports = vec![
        planarity_report(net, tol.planarity),
        lu,
        lv,
        moutard_residual(&nu, &gamma, tol.identity),
        corner_products_residual(&nu, &xi, &gamma, tol.identity),
        omega_conormal_residual(&nu, &gamma, &omega, tol.identity),
        cubic.fourfold.clone(),
        gu,
        gv,
    ];
    Ok(AffineStructure {
        domain: d,
        gamma0,
        seed,
        m,
        omega,
        gamma,
        nu,
        xi,
        a: cubic.a,
        b: cubic.b,
        a_scale: cubic.a_scale,
        b_scale: cubic.b_scale,
        p_u: edges.p_u,
        p_v: edges.p_v,
        h_u: edges.h_u,
        h_v: edges.h_v,
        mean_curv_u: edges.mean_curv_u,
        mean_curv_v: edges.mean_curv_v,
        reports,
    })
}

/// Gated pipeline: the net must be non-degenerate and planar, and every
/// identity must hold within tolerance. The gauge is seeded at quad `(0, 0)`.
pub fn build_structure(net: &AsymptoticNet, gamma0: f64, tol: &Tolerances) -> Result<AffineStructure> {
    assert_nondegenerate(net, tol.nondegenerate)?;
    let planarity = planarity_report(net, tol.planarity);
    if !planarity.passed() {
        let (i, j) = planarity.argmax.or(planarity.excluded.first().copied()).unwrap_or((0, 0));
        return Err(Error::NonPlanar { i, j, residual: planarity.max_abs, tol: tol.planarity });
    }
    let s = analyze_structure(net, gamma0, (0, 0), tol)?;
    if let Some(r) = s.reports.iter().find(|r| !r.passed()) {
        return Err(Error::Verification(Box::new(r.clone())));
    }
    Ok(s)
}

/// Summary row used in reports and the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub name: String,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub argmax: Option<(usize, usize)>,
    pub tol: f64,
    pub passed: bool,
}

impl From<&ResidualReport> for SuiteSummary {
    fn from(r: &ResidualReport) -> Self {
        Self { name: r.name.clone(), max_abs: r.max_abs, mean_abs: r.mean_abs, argmax: r.argmax, tol: r.tol, passed: r.passed() }
    }
}
