//! Rebuilding a net from `Ω`, `A`, `B` and `H`.
//!
//! The gauge comes from `H` edge by edge (`p` from `h`, then `γ` by
//! `γ' = p/γ`). Starting from a frame of four points around quad `(1, 1)`,
//! the bottom row and left column are extended with the `q11` and `q22`
//! expansions that only reference known sites. Each remaining corner is
//! then `q(i+1,j+1) = q(i+1,j) + q(i,j+1) - q(i,j) + Ω ξ`, with `ξ` carried
//! across the shared edge by the `ξ` difference formulas.
//!
//! `A` and `B` live on interior vertices only, so the recursion reaches the
//! vertices `1..=nu-1` x `1..=nv-1` of the nominal domain. The output net is
//! that block, re-indexed from zero: `nu-2` by `nv-2` quads.

use nalgebra::Matrix3;
use serde::Serialize;

use crate::affine_structure::build_structure;
use crate::compatibility::{compat_residuals, CompatInputs, CompatResiduals};
use crate::error::{Error, Result};
use crate::net::{det3, AsymptoticNet, Vec3};
use crate::residual::ResidualReport;
use crate::staggered_grid::{Family, SiteField, StaggeredDomain};
use crate::tolerances::Tolerances;

/// Input of the reconstruction, on the nominal domain.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatData {
    pub domain: StaggeredDomain,
    pub omega: SiteField<f64>,
    pub a: SiteField<f64>,
    pub b: SiteField<f64>,
    /// `H` on interior u-edges.
    pub mean_curv_u: SiteField<f64>,
    /// `H` on interior v-edges.
    pub mean_curv_v: SiteField<f64>,
    /// `γ` on quad `(0, 0)`.
    pub gamma_seed: f64,
    /// `q(1,1)`, `q(2,1)`, `q(1,2)`, `q(2,2)`.
    pub frame: [Vec3; 4],
}

impl CompatData {
    /// Checks families, positivity of `Ω` and the seed.
    pub fn validate(&self) -> Result<()> {
        let d = self.domain;
        if d.nu() < 3 || d.nv() < 3 {
            return Err(Error::InvalidDomain { nu: d.nu(), nv: d.nv(), reason: "reconstruction needs at least 3x3 quads" });
        }
        for (f, fam) in [
            (&self.omega, Family::Quad),
            (&self.a, Family::InteriorVertex),
            (&self.b, Family::InteriorVertex),
            (&self.mean_curv_u, Family::InteriorUEdge),
            (&self.mean_curv_v, Family::InteriorVEdge),
        ] {
            f.check_family(fam)?;
            if f.domain() != d {
                return Err(Error::InvalidParameter { name: "domain", reason: format!("{fam:?} field has a different domain") });
            }
            if let Some(((i, j), _)) = f.iter().find(|(_, v)| !v.is_finite()) {
                return Err(Error::NonFinite { i, j });
            }
        }
        if let Some(((i, j), &w)) = self.omega.iter().find(|(_, &w)| !(w > 0.0)) {
            return Err(Error::Degenerate { i, j, m: w, tol: 0.0 });
        }
        if !(self.gamma_seed > 0.0 && self.gamma_seed.is_finite()) {
            return Err(Error::InvalidParameter { name: "gamma_seed", reason: format!("must be positive, got {}", self.gamma_seed) });
        }
        Ok(())
    }

    /// `[q(2,1)-q(1,1), q(1,2)-q(1,1), q(2,2)-q(1,1)]`, which must equal `Ω(1,1)²`.
    pub fn frame_determinant(&self) -> f64 {
        let [o, a, b, c] = self.frame;
        det3(&(a - o), &(b - o), &(c - o))
    }
}

/// `x ↦ Lx + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub linear: Matrix3<f64>,
    pub translation: Vec3,
}

impl AffineMap {
    pub fn identity() -> Self {
        Self { linear: Matrix3::identity(), translation: Vec3::zeros() }
    }

    pub fn apply(&self, x: &Vec3) -> Vec3 {
        self.linear * x + self.translation
    }

    pub fn det(&self) -> f64 {
        self.linear.determinant()
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        let l = &self.linear;
        [[l[(0, 0)], l[(0, 1)], l[(0, 2)]], [l[(1, 0)], l[(1, 1)], l[(1, 2)]], [l[(2, 0)], l[(2, 1)], l[(2, 2)]]]
    }
}

impl Serialize for AffineMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            linear: [[f64; 3]; 3],
            translation: [f64; 3],
            det: f64,
        }
        let t = self.translation;
        Repr { linear: self.rows(), translation: [t.x, t.y, t.z], det: self.det() }.serialize(s)
    }
}

/// The positive root of `p - 1/p = h`, without cancellation for `h < 0`.
pub fn p_from_h(h: f64) -> f64 {
    let r = (h * h + 4.0).sqrt();
    if h >= 0.0 {
        0.5 * (h + r)
    } else {
        2.0 / (r - h)
    }
}

/// Gauge products and `h` recovered from `Ω` and `H`.
#[derive(Debug, Clone)]
pub struct RecoveredEdges {
    pub p_u: SiteField<f64>,
    pub p_v: SiteField<f64>,
    pub h_u: SiteField<f64>,
    pub h_v: SiteField<f64>,
}

/// `h = H √(ΩΩ')`, then `p` from `h`.
pub fn p_from_mean_curvature(omega: &SiteField<f64>, mean_u: &SiteField<f64>, mean_v: &SiteField<f64>) -> RecoveredEdges {
    let h_u = SiteField::from_fn(omega.domain(), Family::InteriorUEdge, |i, j| {
        mean_u[(i, j)] * (omega[(i, j - 1)] * omega[(i, j)]).sqrt()
    });
    let h_v = SiteField::from_fn(omega.domain(), Family::InteriorVEdge, |i, j| {
        mean_v[(i, j)] * (omega[(i - 1, j)] * omega[(i, j)]).sqrt()
    });
    RecoveredEdges { p_u: h_u.map(|&h| p_from_h(h)), p_v: h_v.map(|&h| p_from_h(h)), h_u, h_v }
}

/// Solves `p = γγ'` for the gauge, seeded at quad `(0, 0)`.
///
/// The primary sweep runs along the bottom row and then up every column.
/// A second sweep up the left column and then along every row gives each
/// quad a value by another path; their relative disagreement is the loop
/// residual, zero exactly when the `p` fields come from a gauge.
pub fn gamma_from_p(p_u: &SiteField<f64>, p_v: &SiteField<f64>, seed: f64, tol: f64) -> (SiteField<f64>, ResidualReport) {
    let d = p_u.domain();
    let (nu, nv) = (d.nu(), d.nv());
    let mut rows = vec![0.0; nu * nv];
    let mut cols = vec![0.0; nu * nv];
    rows[0] = seed;
    cols[0] = seed;
    for i in 1..nu {
        rows[i] = p_v[(i, 0)] / rows[i - 1];
    }
    for j in 1..nv {
        cols[j * nu] = p_u[(0, j)] / cols[(j - 1) * nu];
    }
    for j in 1..nv {
        for i in 0..nu {
            rows[j * nu + i] = p_u[(i, j)] / rows[(j - 1) * nu + i];
        }
    }
    for j in 0..nv {
        for i in 1..nu {
            cols[j * nu + i] = p_v[(i, j)] / cols[j * nu + i - 1];
        }
    }
    let gamma = SiteField::from_values(d, Family::Quad, rows).expect("sized to the domain");
    let loops = gamma.iter().map(|((i, j), &g)| (i, j, (g - cols[j * nu + i]).abs() / g));
    let report = ResidualReport::from_sites("gauge_loop", Family::Quad, tol, loops.collect::<Vec<_>>());
    (gamma, report)
}

/// Which `ξ` transport fills the interior corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sweep {
    /// Across v-edges, from the quad on the left.
    Rows,
    /// Across u-edges, from the quad below.
    Columns,
}

struct March<'a> {
    nu: usize,
    omega: &'a SiteField<f64>,
    gamma: &'a SiteField<f64>,
    a: &'a SiteField<f64>,
    b: &'a SiteField<f64>,
    e: &'a RecoveredEdges,
    q: Vec<Vec3>,
}

impl March<'_> {
    fn q(&self, i: usize, j: usize) -> Vec3 {
        self.q[j * (self.nu + 1) + i]
    }

    fn set(&mut self, i: usize, j: usize, x: Vec3) {
        self.q[j * (self.nu + 1) + i] = x;
    }

    fn xi(&self, i: usize, j: usize) -> Vec3 {
        (self.q(i + 1, j + 1) + self.q(i, j) - self.q(i + 1, j) - self.q(i, j + 1)) / self.omega[(i, j)]
    }

    fn close_quad(&mut self, i: usize, j: usize, xi: Vec3) {
        let c = self.q(i + 1, j) + self.q(i, j + 1) - self.q(i, j) + xi * self.omega[(i, j)];
        self.set(i + 1, j + 1, c);
    }

    /// Quad `(i-1, j)` known: `q(i+1, j)` by the third `q11` expansion at
    /// vertex `(i, j)`, then the quad by [`fill_from_left`](Self::fill_from_left).
    fn step_right(&mut self, i: usize, j: usize) {
        let (w, wl) = (self.omega[(i, j)], self.omega[(i - 1, j)]);
        let q1l = self.q(i, j) - self.q(i - 1, j);
        let q2 = self.q(i, j + 1) - self.q(i, j);
        let o1m = self.e.p_v[(i, j)] * w - wl;
        let q11 = q1l * (o1m / wl) + q2 * (self.gamma[(i - 1, j)] * self.a[(i, j)] / wl);
        self.set(i + 1, j, self.q(i, j) + q1l + q11);
        self.fill_from_left(i, j);
    }

    /// Quad `(i, j-1)` known: `q(i, j+1)` by the second `q22` expansion.
    fn step_up(&mut self, i: usize, j: usize) {
        let (w, wd) = (self.omega[(i, j)], self.omega[(i, j - 1)]);
        let q1 = self.q(i + 1, j) - self.q(i, j);
        let q2d = self.q(i, j) - self.q(i, j - 1);
        let o2m = self.e.p_u[(i, j)] * w - wd;
        let q22 = q2d * (o2m / wd) - q1 * (self.gamma[(i, j - 1)] * self.b[(i, j)] / wd);
        self.set(i, j + 1, self.q(i, j) + q2d + q22);
        self.fill_from_below(i, j);
    }

    /// `ξ(i,j) = (ξ(i-1,j) + p rhs)/p` with `rhs` the second `ξ1-` expansion.
    fn fill_from_left(&mut self, i: usize, j: usize) {
        let (w, wl) = (self.omega[(i, j)], self.omega[(i - 1, j)]);
        let g = self.gamma[(i - 1, j)];
        let (p, h) = (self.e.p_v[(i, j)], self.e.h_v[(i, j)]);
        let a2m = self.a[(i, j + 1)] / g - g * self.a[(i, j)];
        let rhs = (self.q(i, j) - self.q(i - 1, j)) * (-h / wl) + (self.q(i, j + 1) - self.q(i, j)) * (a2m / (w * wl));
        let xi = (self.xi(i - 1, j) + rhs * p) / p;
        self.close_quad(i, j, xi);
    }

    /// The same across a u-edge with the second `ξ2-` expansion.
    fn fill_from_below(&mut self, i: usize, j: usize) {
        let (w, wd) = (self.omega[(i, j)], self.omega[(i, j - 1)]);
        let g = self.gamma[(i, j - 1)];
        let (p, h) = (self.e.p_u[(i, j)], self.e.h_u[(i, j)]);
        let b1m = self.b[(i + 1, j)] / g - g * self.b[(i, j)];
        let rhs = (self.q(i + 1, j) - self.q(i, j)) * (-b1m / (w * wd)) + (self.q(i, j) - self.q(i, j - 1)) * (-h / wd);
        let xi = (self.xi(i, j - 1) + rhs * p) / p;
        self.close_quad(i, j, xi);
    }

    fn run(mut self, frame: &[Vec3; 4], sweep: Sweep) -> Vec<Vec3> {
        let nv = self.omega.domain().nv();
        let nu = self.nu;
        self.set(1, 1, frame[0]);
        self.set(2, 1, frame[1]);
        self.set(1, 2, frame[2]);
        self.set(2, 2, frame[3]);
        for i in 2..nu - 1 {
            self.step_right(i, 1);
        }
        for j in 2..nv - 1 {
            self.step_up(1, j);
        }
        for j in 2..nv - 1 {
            for i in 2..nu - 1 {
                match sweep {
                    Sweep::Rows => self.fill_from_left(i, j),
                    Sweep::Columns => self.fill_from_below(i, j),
                }
            }
        }
        let q = &self.q;
        (1..nv).flat_map(|j| (1..nu).map(move |i| q[j * (nu + 1) + i])).collect()
    }
}

/// Everything a reconstruction produces besides the net.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub net: AsymptoticNet,
    pub gamma: SiteField<f64>,
    /// Row sweep against column sweep, per output vertex, over the diameter.
    pub coherence: ResidualReport,
    pub gauge_loop: ResidualReport,
    pub compat: CompatResiduals,
}

struct Prepared {
    edges: RecoveredEdges,
    gamma: SiteField<f64>,
    gauge_loop: ResidualReport,
    compat: CompatResiduals,
}

fn prepare(data: &CompatData, tol: &Tolerances) -> Result<Prepared> {
    data.validate()?;
    let d = data.domain;
    let expected = data.omega[(1, 1)].powi(2);
    let found = data.frame_determinant();
    if !((found - expected).abs() <= tol.frame * expected) {
        return Err(Error::FrameDeterminant { expected, found });
    }
    let edges = p_from_mean_curvature(&data.omega, &data.mean_curv_u, &data.mean_curv_v);
    let steps = (d.nu() + d.nv()) as f64;
    let (gamma, gauge_loop) = gamma_from_p(&edges.p_u, &edges.p_v, data.gamma_seed, tol.coherence * steps);
    let (a_scale, b_scale) = (data.a.map(|x| x.abs()), data.b.map(|x| x.abs()));
    let inputs = CompatInputs {
        a_scale: &a_scale,
        b_scale: &b_scale,
        omega: &data.omega,
        gamma: &gamma,
        a: &data.a,
        b: &data.b,
        p_u: &edges.p_u,
        p_v: &edges.p_v,
        h_u: &edges.h_u,
        h_v: &edges.h_v,
    };
    let compat = compat_residuals(inputs, tol.compat_input);
    Ok(Prepared { edges, gamma, gauge_loop, compat })
}

fn integrate(data: &CompatData, prep: Prepared, tol: &Tolerances) -> Result<Reconstruction> {
    let d = data.domain;
    let march = |sweep| {
        March {
            nu: d.nu(),
            omega: &data.omega,
            gamma: &prep.gamma,
            a: &data.a,
            b: &data.b,
            e: &prep.edges,
            q: vec![Vec3::repeat(f64::NAN); (d.nu() + 1) * (d.nv() + 1)],
        }
        .run(&data.frame, sweep)
    };
    let rows = march(Sweep::Rows);
    let cols = march(Sweep::Columns);
    let net = AsymptoticNet::new(StaggeredDomain::new(d.nu() - 2, d.nv() - 2)?, rows)?;
    let diam = net.diameter();
    let coherence = net.points().iter().zip(&cols).map(|(((i, j), a), b)| (i, j, (a - b).norm() / diam));
    let steps = (d.nu() + d.nv()) as f64;
    let coherence = ResidualReport::from_sites("coherence", Family::Vertex, tol.coherence * steps, coherence.collect::<Vec<_>>());
    if !coherence.passed() {
        return Err(Error::NotIntegrable(Box::new(coherence)));
    }
    Ok(Reconstruction { net, gamma: prep.gamma, coherence, gauge_loop: prep.gauge_loop, compat: prep.compat })
}

/// Reconstruction with every precondition enforced, in order: the frame
/// determinant, the compatibility equations on the input, closure of the
/// gauge around every loop, and finally agreement of the row and column
/// sweeps.
pub fn reconstruct(data: &CompatData, tol: &Tolerances) -> Result<Reconstruction> {
    let prep = prepare(data, tol)?;
    if let Some(bad) = prep.compat.reports().into_iter().find(|c| !c.passed()) {
        return Err(Error::Incompatible(Box::new(bad.clone())));
    }
    if !prep.gauge_loop.passed() {
        return Err(Error::NotIntegrable(Box::new(prep.gauge_loop.clone())));
    }
    integrate(data, prep, tol)
}

/// Like [`reconstruct`] but the compatibility and gauge-loop residuals are
/// only reported, not enforced. Useful for data whose compatibility
/// residuals are limited by floating point conditioning rather than by
/// the data.
pub fn reconstruct_unchecked(data: &CompatData, tol: &Tolerances) -> Result<Reconstruction> {
    let prep = prepare(data, tol)?;
    integrate(data, prep, tol)
}

/// The reconstruction input describing `net`, with its own points around
/// quad `(1, 1)` as frame.
pub fn extract(net: &AsymptoticNet, gamma_seed: f64, tol: &Tolerances) -> Result<CompatData> {
    let d = net.domain();
    if d.nu() < 3 || d.nv() < 3 {
        return Err(Error::InvalidDomain { nu: d.nu(), nv: d.nv(), reason: "reconstruction needs at least 3x3 quads" });
    }
    let s = build_structure(net, gamma_seed, tol)?;
    Ok(CompatData {
        domain: d,
        omega: s.omega,
        a: s.a,
        b: s.b,
        mean_curv_u: s.mean_curv_u,
        mean_curv_v: s.mean_curv_v,
        gamma_seed,
        frame: [net.point(1, 1), net.point(2, 1), net.point(1, 2), net.point(2, 2)],
    })
}

/// The affine map taking the first quad of `a` onto the first quad of `b`,
/// and how far the rest of `a` lands from `b`, relative to the diameter of
/// `b`.
pub fn affine_align(a: &AsymptoticNet, b: &AsymptoticNet) -> Result<(AffineMap, f64)> {
    if a.domain() != b.domain() {
        return Err(Error::InvalidParameter {
            name: "domain",
            reason: format!("{}x{} vs {}x{}", a.domain().nu(), a.domain().nv(), b.domain().nu(), b.domain().nv()),
        });
    }
    let frame = |n: &AsymptoticNet| {
        let o = n.point(0, 0);
        Matrix3::from_columns(&[n.point(1, 0) - o, n.point(0, 1) - o, n.point(1, 1) - o])
    };
    let (fa, fb) = (frame(a), frame(b));
    let det = fa.determinant();
    let scale = fa.column_iter().map(|c| c.norm()).product::<f64>();
    if !(det.abs() > 1e-14 * scale) {
        return Err(Error::DegenerateFrame { det });
    }
    let inv = fa.try_inverse().ok_or(Error::DegenerateFrame { det })?;
    let linear = fb * inv;
    let map = AffineMap { linear, translation: b.point(0, 0) - linear * a.point(0, 0) };
    let diam = b.diameter();
    let worst = a
        .points()
        .iter()
        .map(|((i, j), p)| (map.apply(p) - b.point(i, j)).norm())
        .fold(0.0, f64::max);
    Ok((map, if diam > 0.0 { worst / diam } else { worst }))
}
