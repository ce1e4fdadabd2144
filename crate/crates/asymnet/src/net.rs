//! The net itself: vertex positions, quad volumes and the planarity check.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::residual::ResidualReport;
use crate::staggered_grid::{mixed12, Family, SiteField, StaggeredDomain};

pub type Vec3 = Vector3<f64>;

/// The determinant `[a, b, c] = (a × b) · c`.
#[inline]
pub fn det3(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    a.cross(b).dot(c)
}

/// Vertex positions of a quad net.
///
/// `q1(i, j)` is the u-edge vector `q(i+1, j) - q(i, j)` and `q2(i, j)` the
/// v-edge vector `q(i, j+1) - q(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticNet {
    q: SiteField<Vec3>,
}

impl AsymptoticNet {
    /// Builds a net from positions in row-major order (rows of constant v).
    pub fn new(domain: StaggeredDomain, points: Vec<Vec3>) -> Result<Self> {
        Self::from_field(SiteField::from_values(domain, Family::Vertex, points)?)
    }

    pub fn from_field(q: SiteField<Vec3>) -> Result<Self> {
        q.check_family(Family::Vertex)?;
        for ((i, j), p) in q.iter() {
            if !p.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFinite { i, j });
            }
        }
        Ok(Self { q })
    }

    pub fn from_fn(domain: StaggeredDomain, f: impl FnMut(usize, usize) -> Vec3) -> Result<Self> {
        Self::from_field(SiteField::from_fn(domain, Family::Vertex, f))
    }

    pub fn domain(&self) -> StaggeredDomain {
        self.q.domain()
    }

    pub fn points(&self) -> &SiteField<Vec3> {
        &self.q
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Vec3 {
        self.q[(i, j)]
    }

    #[inline]
    pub fn q1(&self, i: usize, j: usize) -> Vec3 {
        self.q[(i + 1, j)] - self.q[(i, j)]
    }

    #[inline]
    pub fn q2(&self, i: usize, j: usize) -> Vec3 {
        self.q[(i, j + 1)] - self.q[(i, j)]
    }

    /// Mixed difference at quad `(i, j)`.
    pub fn q12(&self) -> SiteField<Vec3> {
        mixed12(&self.q).expect("vertex field")
    }

    /// Diagonal of the axis-aligned bounding box.
    pub fn diameter(&self) -> f64 {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for p in self.q.values() {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (hi - lo).norm()
    }

    pub fn map_points(&self, mut f: impl FnMut(&Vec3) -> Vec3) -> Result<Self> {
        Self::from_field(self.q.map(|p| f(p)))
    }

    pub fn with_point(&self, i: usize, j: usize, p: Vec3) -> Result<Self> {
        Self::from_field(self.q.replaced(i, j, p)?)
    }

    /// The block of `nu x nv` quads whose lower-left vertex is `(i0, j0)`.
    pub fn sub_net(&self, i0: usize, j0: usize, nu: usize, nv: usize) -> Result<Self> {
        let d = self.domain();
        if i0 + nu > d.nu() || j0 + nv > d.nv() {
            return Err(Error::OutOfRange { family: Family::Quad, i: i0 + nu, j: j0 + nv });
        }
        Self::from_fn(StaggeredDomain::new(nu, nv)?, |i, j| self.q[(i0 + i, j0 + j)])
    }
}

/// `M = [q1(i,j), q2(i,j), q2(i+1,j)]` per quad.
pub fn quad_m(net: &AsymptoticNet) -> SiteField<f64> {
    SiteField::from_fn(net.domain(), Family::Quad, |i, j| det3(&net.q1(i, j), &net.q2(i, j), &net.q2(i + 1, j)))
}

/// Fails on the first quad (in storage order) with `M <= tol`.
pub fn assert_nondegenerate(net: &AsymptoticNet, tol: f64) -> Result<()> {
    let m = quad_m(net);
    for ((i, j), &v) in m.iter() {
        if !(v > tol) {
            return Err(Error::Degenerate { i, j, m: v, tol });
        }
    }
    Ok(())
}

/// Coplanarity of the four edges meeting at each interior vertex.
///
/// The residual is `max(|[e1+, e1-, e2+]|, |[e1+, e1-, e2-]|) / s³` with `s`
/// the longest of the four edges. When the two u-edges are parallel the pair
/// `{e1+, e2+}` spans the plane instead. Vertices without any independent
/// pair are listed as excluded and fail the report.
pub fn planarity_report(net: &AsymptoticNet, tol: f64) -> ResidualReport {
    let d = net.domain();
    let mut excluded = Vec::new();
    let mut sites = Vec::new();
    for (i, j) in d.sites(Family::InteriorVertex) {
        let e1p = net.q1(i, j);
        let e1m = net.q1(i - 1, j);
        let e2p = net.q2(i, j);
        let e2m = net.q2(i, j - 1);
        let s = e1p.norm().max(e1m.norm()).max(e2p.norm()).max(e2m.norm());
        if s == 0.0 {
            excluded.push((i, j));
            continue;
        }
        let independent = |a: &Vec3, b: &Vec3| a.cross(b).norm() > 1e-14 * a.norm() * b.norm();
        let r = if independent(&e1p, &e1m) {
            det3(&e1p, &e1m, &e2p).abs().max(det3(&e1p, &e1m, &e2m).abs())
        } else if independent(&e1p, &e2p) {
            det3(&e1p, &e2p, &e1m).abs().max(det3(&e1p, &e2p, &e2m).abs())
        } else {
            excluded.push((i, j));
            continue;
        };
        sites.push((i, j, r / (s * s * s)));
    }
    ResidualReport::from_sites("planarity", Family::InteriorVertex, tol, sites).with_excluded(excluded, true)
}
