//! The compatibility equations between `Ω`, `γ`, `A`, `B` and `h`, and the
//! two identities they come from: the mixed `ξ` identity and the two ways of
//! expanding `q112`.
//!
//! The first equation is evaluated in closed form. The second and third are
//! evaluated by their derivation: every `ξ` difference in the mixed identity
//! is replaced by its structural expansion and the result is written in the
//! basis `{q1(i,j), q2(i,j)}`; the two coordinates are the two equations. The
//! closed forms of those two as they are usually transcribed are kept in
//! [`literal_eq23_residuals`] for comparison.

use serde::Serialize;

use crate::affine_structure::AffineStructure;
use crate::net::{det3, AsymptoticNet};
use crate::residual::ResidualReport;
use crate::staggered_grid::{Family, SiteField};
use crate::structural::DerivedFields;

/// The coefficient fields the equations are written in. They can come from
/// a net or from reconstruction input.
#[derive(Debug, Clone, Copy)]
pub struct CompatInputs<'a> {
    pub omega: &'a SiteField<f64>,
    pub gamma: &'a SiteField<f64>,
    pub a: &'a SiteField<f64>,
    pub b: &'a SiteField<f64>,
    pub p_u: &'a SiteField<f64>,
    pub p_v: &'a SiteField<f64>,
    pub h_u: &'a SiteField<f64>,
    pub h_v: &'a SiteField<f64>,
    /// Size of the terms `A` and `B` are computed from, used to tell
    /// round-off from a genuine residual. `|A|`, `|B|` when nothing better
    /// is known.
    pub a_scale: &'a SiteField<f64>,
    pub b_scale: &'a SiteField<f64>,
}

impl<'a> From<&'a AffineStructure> for CompatInputs<'a> {
    fn from(s: &'a AffineStructure) -> Self {
        Self {
            omega: &s.omega,
            gamma: &s.gamma,
            a: &s.a,
            b: &s.b,
            p_u: &s.p_u,
            p_v: &s.p_v,
            h_u: &s.h_u,
            h_v: &s.h_v,
            a_scale: &s.a_scale,
            b_scale: &s.b_scale,
        }
    }
}

impl CompatInputs<'_> {
    fn a2_plus(&self, i: usize, j: usize) -> f64 {
        let g = self.gamma[(i, j)];
        g * self.a[(i, j + 1)] - self.a[(i, j)] / g
    }

    fn b1_plus(&self, i: usize, j: usize) -> f64 {
        let g = self.gamma[(i, j)];
        g * self.b[(i + 1, j)] - self.b[(i, j)] / g
    }

    fn a2_plus_size(&self, i: usize, j: usize) -> f64 {
        let g = self.gamma[(i, j)];
        g * self.a_scale[(i, j + 1)] + self.a_scale[(i, j)] / g
    }

    fn b1_plus_size(&self, i: usize, j: usize) -> f64 {
        let g = self.gamma[(i, j)];
        g * self.b_scale[(i + 1, j)] + self.b_scale[(i, j)] / g
    }

    /// The three terms of the first equation, `l = r1 + r2`, at vertex `(i, j)`.
    pub fn eq1_terms(&self, i: usize, j: usize) -> [f64; 3] {
        let (w, g) = (self.omega, self.gamma);
        let l = w[(i - 1, j)] / (self.p_v[(i, j)] * w[(i, j)]);
        let r1 = self.p_v[(i, j - 1)] * w[(i - 1, j - 1)] / w[(i, j - 1)];
        let r2 = -self.a[(i, j)] * self.b[(i, j)] * g[(i, j - 1)] / (g[(i, j)] * w[(i, j)] * w[(i, j - 1)]);
        [l, r1, r2]
    }

    fn eq1_size(&self, i: usize, j: usize) -> f64 {
        let (w, g) = (self.omega, self.gamma);
        let [l, r1, _] = self.eq1_terms(i, j);
        let r2 = self.a_scale[(i, j)] * self.b_scale[(i, j)] * g[(i, j - 1)] / (g[(i, j)] * w[(i, j)] * w[(i, j - 1)]);
        l.abs().max(r1.abs()).max(r2)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompatResiduals {
    pub eq1: ResidualReport,
    pub eq2: ResidualReport,
    pub eq3: ResidualReport,
}

impl CompatResiduals {
    pub fn reports(&self) -> [&ResidualReport; 3] {
        [&self.eq1, &self.eq2, &self.eq3]
    }

    pub fn passed(&self) -> bool {
        self.reports().iter().all(|r| r.passed())
    }

    pub fn max_abs(&self) -> f64 {
        self.reports().iter().map(|r| r.max_abs).fold(0.0, f64::max)
    }
}

fn rel(diff: f64, terms: impl IntoIterator<Item = f64>) -> f64 {
    rel_to(diff, terms.into_iter().map(f64::abs).fold(0.0, f64::max))
}

fn rel_to(diff: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        0.0
    } else {
        diff.abs() / scale
    }
}

/// `p + 1/p`: the size of the two terms of `h = p - 1/p`.
fn h_size(p: f64) -> f64 {
    p + 1.0 / p
}

/// All three equations. `eq1` covers every interior vertex; `eq2`, `eq3`
/// need `A2+` and `B1+` on both sides and cover `2 <= i <= nu-2`,
/// `2 <= j <= nv-2`.
///
/// Residuals are relative to the largest term, where differences such as
/// `h` and `A2+` count with the size of their pieces. On minimal nets or
/// nets with `A ≡ 0` every term can vanish and only round-off is left.
pub fn compat_residuals(c: CompatInputs<'_>, tol: f64) -> CompatResiduals {
    let d = c.omega.domain();
    let (nu, nv) = (d.nu(), d.nv());
    let eq1 = d.sites(Family::InteriorVertex).map(|(i, j)| {
        let [l, r1, r2] = c.eq1_terms(i, j);
        (i, j, rel_to(l - r1 - r2, c.eq1_size(i, j)))
    });
    let eq1 = ResidualReport::from_sites("compat_eq1", Family::InteriorVertex, tol, eq1.collect::<Vec<_>>());

    let (mut eq2, mut eq3) = (Vec::new(), Vec::new());
    for j in 2..nv.saturating_sub(1) {
        for i in 2..nu.saturating_sub(1) {
            let (terms, sizes) = eq23_terms(&c, i, j);
            for (k, out) in [(0, &mut eq2), (1, &mut eq3)] {
                let sum: f64 = terms.iter().map(|t| t[k]).sum();
                out.push((i, j, rel(sum, sizes.iter().map(|t| t[k]))));
            }
        }
    }
    CompatResiduals {
        eq1,
        eq2: ResidualReport::from_sites("compat_eq2", Family::InteriorVertex, tol, eq2),
        eq3: ResidualReport::from_sites("compat_eq3", Family::InteriorVertex, tol, eq3),
    }
}

/// Values entering [`eq23_terms`] that are differences, or their sizes.
#[derive(Clone, Copy)]
struct Eq23Diffs {
    hv: f64,
    hv_d: f64,
    hu: f64,
    hu_l: f64,
    a: f64,
    b: f64,
    a2: f64,
    a2_d: f64,
    b1: f64,
    b1_l: f64,
}

/// The mixed identity `ξ1-/γ - ξ1+/γ = ξ2-/γ - ξ2+/γ` at vertex `(i, j)`
/// with every difference expanded and rewritten in `{q1(i,j), q2(i,j)}`.
/// Returns the eight terms of `left - right`, which sum to zero on a net,
/// and the size of each before cancellation.
fn eq23_terms(c: &CompatInputs<'_>, i: usize, j: usize) -> ([[f64; 2]; 8], [[f64; 2]; 8]) {
    let (w, g) = (c.omega, c.gamma);
    let (opp, opm, omp, omm) = (w[(i, j)], w[(i, j - 1)], w[(i - 1, j)], w[(i - 1, j - 1)]);
    let (gpp, gpm, gmp) = (g[(i, j)], g[(i, j - 1)], g[(i - 1, j)]);
    let (pv_d, pu_l) = (c.p_v[(i, j - 1)], c.p_u[(i - 1, j)]);
    let terms = |x: Eq23Diffs| {
        // q2(i,j-1) and q1(i-1,j) in the basis {q1(i,j), q2(i,j)}
        let down = [x.b / (gpp * opp), opm / (c.p_u[(i, j)] * opp)];
        let left = [omp / (c.p_v[(i, j)] * opp), -x.a / (gpp * opp)];
        let scale = |v: [f64; 2], s: f64| [v[0] * s, v[1] * s];
        [
            [-x.hv / opp / gmp, 0.0],
            [0.0, x.a2 / (opp * omp) / gmp],
            [pv_d * x.hv_d / opm / gpm, 0.0],
            scale(down, -pv_d * x.a2_d / (opm * omm) / gpm),
            [x.b1 / (opp * opm) / gpm, 0.0],
            [0.0, x.hu / opp / gpm],
            scale(left, -pu_l * x.b1_l / (omp * omm) / gmp),
            [0.0, -pu_l * x.hu_l / omp / gmp],
        ]
    };
    let values = Eq23Diffs {
        hv: c.h_v[(i, j)],
        hv_d: c.h_v[(i, j - 1)],
        hu: c.h_u[(i, j)],
        hu_l: c.h_u[(i - 1, j)],
        a: c.a[(i, j)],
        b: c.b[(i, j)],
        a2: c.a2_plus(i, j),
        a2_d: c.a2_plus(i, j - 1),
        b1: c.b1_plus(i, j),
        b1_l: c.b1_plus(i - 1, j),
    };
    let sizes = Eq23Diffs {
        hv: h_size(c.p_v[(i, j)]),
        hv_d: h_size(pv_d),
        hu: h_size(c.p_u[(i, j)]),
        hu_l: h_size(pu_l),
        a: c.a_scale[(i, j)],
        b: c.b_scale[(i, j)],
        a2: c.a2_plus_size(i, j),
        a2_d: c.a2_plus_size(i, j - 1),
        b1: c.b1_plus_size(i, j),
        b1_l: c.b1_plus_size(i - 1, j),
    };
    (terms(values), terms(sizes).map(|t| t.map(f64::abs)))
}

/// The second and third equations in their closed transcribed form.
///
/// They agree with the derived form when `A = B = 0` and disagree otherwise;
/// the derived equations in [`compat_residuals`] are the ones that hold.
pub fn literal_eq23_residuals(c: CompatInputs<'_>, tol: f64) -> (ResidualReport, ResidualReport) {
    let d = c.omega.domain();
    let (nu, nv) = (d.nu(), d.nv());
    let (w, g) = (c.omega, c.gamma);
    let mut eq2 = Vec::new();
    for j in 1..nv {
        for i in 2..nu.saturating_sub(1) {
            let l1 = g[(i - 1, j - 1)] / w[(i, j - 1)];
            let l2 = -1.0 / (g[(i - 1, j)] * w[(i, j)]);
            let r1 = 1.0 / (g[(i, j - 1)] * w[(i, j)] * w[(i, j - 1)]);
            let r2 = -g[(i - 1, j - 1)] / (w[(i - 1, j)] * w[(i - 1, j - 1)]);
            let (h0, h1, k0, k1) = (c.h_v[(i, j - 1)], c.h_v[(i, j)], c.b1_plus(i, j), c.b1_plus(i - 1, j));
            let sizes = [
                l1 * h_size(c.p_v[(i, j - 1)]),
                -l2 * h_size(c.p_v[(i, j)]),
                r1 * c.b1_plus_size(i, j),
                -r2 * c.b1_plus_size(i - 1, j),
            ];
            eq2.push((i, j, rel(l1 * h0 + l2 * h1 - r1 * k0 - r2 * k1, sizes)));
        }
    }
    let mut eq3 = Vec::new();
    for j in 2..nv.saturating_sub(1) {
        for i in 1..nu {
            let l1 = g[(i - 1, j - 1)] / w[(i - 1, j)];
            let l2 = -1.0 / (g[(i, j - 1)] * w[(i, j)]);
            let r1 = 1.0 / (g[(i - 1, j)] * w[(i, j)] * w[(i - 1, j)]);
            let r2 = -g[(i - 1, j - 1)] / (w[(i, j - 1)] * w[(i - 1, j - 1)]);
            let (h0, h1, k0, k1) = (c.h_u[(i - 1, j)], c.h_u[(i, j)], c.a2_plus(i, j), c.a2_plus(i, j - 1));
            let sizes = [
                l1 * h_size(c.p_u[(i - 1, j)]),
                -l2 * h_size(c.p_u[(i, j)]),
                r1 * c.a2_plus_size(i, j),
                -r2 * c.a2_plus_size(i, j - 1),
            ];
            eq3.push((i, j, rel(l1 * h0 + l2 * h1 - r1 * k0 - r2 * k1, sizes)));
        }
    }
    (
        ResidualReport::from_sites("compat_eq2_literal", Family::InteriorVertex, tol, eq2),
        ResidualReport::from_sites("compat_eq3_literal", Family::InteriorVertex, tol, eq3),
    )
}

/// `ξ1-(i,j)/γ(i-1,j) - ξ1+(i,j-1)/γ(i,j-1) = ξ2-(i,j)/γ(i,j-1) - ξ2+(i-1,j)/γ(i-1,j)`
/// at every interior vertex. Each difference is split into its two `ξ` terms
/// and the residual is relative to the largest of the eight.
pub fn mixed_xi_identity_residual(s: &AffineStructure, f: &DerivedFields, tol: f64) -> ResidualReport {
    let (g, xi) = (&s.gamma, &s.xi);
    let sites = s.domain.sites(Family::InteriorVertex).map(|(i, j)| {
        let l = f.xi1_minus[(i, j)] / g[(i - 1, j)] - f.xi1_plus[(i, j - 1)] / g[(i, j - 1)];
        let r = f.xi2_minus[(i, j)] / g[(i, j - 1)] - f.xi2_plus[(i - 1, j)] / g[(i - 1, j)];
        let terms = [
            s.p_v[(i, j)] * xi[(i, j)].norm() / g[(i - 1, j)],
            xi[(i - 1, j)].norm() / g[(i - 1, j)],
            xi[(i, j - 1)].norm() / g[(i, j - 1)],
            s.p_v[(i, j - 1)] * xi[(i - 1, j - 1)].norm() / g[(i, j - 1)],
            s.p_u[(i, j)] * xi[(i, j)].norm() / g[(i, j - 1)],
            s.p_u[(i - 1, j)] * xi[(i - 1, j - 1)].norm() / g[(i - 1, j)],
        ];
        let scale = terms.iter().fold(0.0, |m: f64, &x| m.max(x));
        (i, j, if scale == 0.0 { 0.0 } else { (l - r).norm() / scale })
    });
    ResidualReport::from_sites("mixed_xi", Family::InteriorVertex, tol, sites.collect::<Vec<_>>())
}

/// Coefficients of `q112` on the v-edge `(i, j)` in the basis
/// `{q1(i,j), q2(i,j), ξ(i,j)}`, by both routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Q112Routes {
    pub first: [f64; 3],
    pub second: [f64; 3],
    /// Largest single term contributing to each coefficient, with
    /// differences counted by the size of their pieces.
    pub scale: [f64; 3],
}

impl Q112Routes {
    /// Difference of the `q1` coefficients. It is the first compatibility
    /// equation divided through, up to sign.
    pub fn q1_difference(&self) -> f64 {
        self.first[0] - self.second[0]
    }
}

/// Both expansions of `q112 = q11(i,j+1) - q11(i,j)` on a v-edge with
/// `1 <= j <= nv-2`.
///
/// The first differences `Ω ξ` across the edge and uses the `ξ1-`
/// expansion; the second subtracts the `q11` expansions at the two ends
/// and needs `q2(i,j-1)` rewritten in the basis.
pub fn q112_routes(c: CompatInputs<'_>, i: usize, j: usize) -> Q112Routes {
    let (w, g) = (c.omega, c.gamma);
    let o1p = |i: usize, j: usize| w[(i, j)] - c.p_v[(i, j)] * w[(i - 1, j)];
    let first = [-c.h_v[(i, j)] * w[(i - 1, j)] / w[(i, j)], c.a2_plus(i, j) / w[(i, j)], o1p(i, j)];
    let cu = o1p(i, j) / w[(i, j)];
    let cd = o1p(i, j - 1) / w[(i, j - 1)];
    let down = [c.b[(i, j)] / (g[(i, j)] * w[(i, j)]), w[(i, j - 1)] / (c.p_u[(i, j)] * w[(i, j)])];
    let ga = g[(i, j - 1)] * c.a[(i, j)] / w[(i, j - 1)];
    let up = g[(i, j)] * c.a[(i, j + 1)] / w[(i, j)];
    let second = [cu - cd - ga * down[0], up - ga * down[1], cu * w[(i, j)]];
    let max = |v: &[f64]| v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let o1p_size = |i: usize, j: usize| w[(i, j)] + c.p_v[(i, j)] * w[(i - 1, j)];
    let ga_size = g[(i, j - 1)] * c.a_scale[(i, j)] / w[(i, j - 1)];
    let scale = [
        max(&[
            h_size(c.p_v[(i, j)]) * w[(i - 1, j)] / w[(i, j)],
            o1p_size(i, j) / w[(i, j)],
            o1p_size(i, j - 1) / w[(i, j - 1)],
            ga_size * c.b_scale[(i, j)] / (g[(i, j)] * w[(i, j)]),
        ]),
        max(&[c.a2_plus_size(i, j) / w[(i, j)], g[(i, j)] * c.a_scale[(i, j + 1)] / w[(i, j)], ga_size * down[1]]),
        max(&[o1p_size(i, j)]),
    ];
    Q112Routes { first, second, scale }
}

/// Largest coefficient difference between the two `q112` routes, each
/// relative to the largest term entering that coefficient. Sites whose basis is
/// nearly degenerate are excluded and reported.
pub fn q112_two_way_residual(net: &AsymptoticNet, s: &AffineStructure, tol: f64) -> ResidualReport {
    let c = CompatInputs::from(s);
    let d = s.domain;
    let mut sites = Vec::new();
    let mut excluded = Vec::new();
    for j in 1..d.nv().saturating_sub(1) {
        for i in 1..d.nu() {
            let (e1, e2, x) = (net.q1(i, j), net.q2(i, j), s.xi[(i, j)]);
            if det3(&e1, &e2, &x).abs() <= 1e-12 * e1.norm() * e2.norm() * x.norm() {
                excluded.push((i, j));
                continue;
            }
            let r = q112_routes(c, i, j);
            let v = (0..3)
                .map(|k| if r.scale[k] == 0.0 { 0.0 } else { (r.first[k] - r.second[k]).abs() / r.scale[k] })
                .fold(0.0, f64::max);
            sites.push((i, j, v));
        }
    }
    ResidualReport::from_sites("q112_two_way", Family::InteriorVEdge, tol, sites).with_excluded(excluded, false)
}
