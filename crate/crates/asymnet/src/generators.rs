//! Example nets with known structure.
//!
//! * The one-sheet hyperboloid `y² + z² - x² = c²` sampled along its
//!   rulings, with closed forms for every discrete quantity.
//! * Minimal nets integrated from separable co-normals `ν = f(u) + g(v)`.
//! * Nets integrated from any co-normal field by the Lelieuvre equations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{assert_nondegenerate, AsymptoticNet, Vec3};
use crate::residual::ResidualReport;
use crate::staggered_grid::{Family, SiteField, StaggeredDomain};

/// Where the sampled hyperboloid sits in space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// `q - (0, 0, c)`. The far corner of the usual sample domain shrinks
    /// towards this point, so shifting it to the origin keeps the vertex
    /// coordinates at full relative precision. Equi-affine to `Exact`.
    #[default]
    Shifted,
    /// The closed-form parametrization as written.
    Exact,
}

/// Sampling of the hyperboloid: vertex `(i, j)` sits at parameters
/// `(u0 + i du, v0 + j dv)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperboloidSpec {
    pub c: f64,
    pub u0: f64,
    pub v0: f64,
    pub du: f64,
    pub dv: f64,
    pub nu: usize,
    pub nv: usize,
    #[serde(default)]
    pub placement: Placement,
}

impl Default for HyperboloidSpec {
    fn default() -> Self {
        Self { c: 1.0, u0: 1.0, v0: 1.0, du: 0.1, dv: 0.2, nu: 20, nv: 20, placement: Placement::Shifted }
    }
}

impl HyperboloidSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        if !(self.c > 0.0) {
            return bad("c", "must be positive");
        }
        if !(self.du > 0.0) || !(self.dv > 0.0) {
            return bad("du/dv", "steps must be positive");
        }
        if !(self.u0 + self.v0 > 0.0) {
            return bad("u0+v0", "the parametrization is singular at u+v = 0");
        }
        if ![self.c, self.u0, self.v0, self.du, self.dv].iter().all(|x| x.is_finite()) {
            return bad("spec", "parameters must be finite");
        }
        StaggeredDomain::new(self.nu, self.nv)?;
        Ok(())
    }
}

/// Closed forms for the sampled hyperboloid, indexed by lattice site.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticHyperboloid {
    pub spec: HyperboloidSpec,
}

fn s(x: f64) -> f64 {
    x.sinh()
}

impl AnalyticHyperboloid {
    /// Parameters of vertex `(i, j)`. Every half-step site uses the
    /// parameters of its lower-left vertex.
    pub fn uv(&self, i: usize, j: usize) -> (f64, f64) {
        (self.spec.u0 + i as f64 * self.spec.du, self.spec.v0 + j as f64 * self.spec.dv)
    }

    fn w(&self, i: usize, j: usize) -> f64 {
        let (u, v) = self.uv(i, j);
        u + v
    }

    /// Smooth parametrization at arbitrary parameters, honouring the placement.
    pub fn q_at(&self, u: f64, v: f64) -> Vec3 {
        let c = self.spec.c;
        let w = u + v;
        let k = c / w.sinh();
        let x = -k * (u - v).cosh();
        let y = -k * (u - v).sinh();
        match self.spec.placement {
            Placement::Exact => Vec3::new(x, y, k * w.cosh()),
            // c coth w - c = 2c / (e^{2w} - 1)
            Placement::Shifted => Vec3::new(x, y, 2.0 * c / (2.0 * w).exp_m1()),
        }
    }

    pub fn q(&self, i: usize, j: usize) -> Vec3 {
        let (u, v) = self.uv(i, j);
        self.q_at(u, v)
    }

    /// Smooth co-normal, which is also the discrete one for the analytic gauge.
    pub fn nu(&self, i: usize, j: usize) -> Vec3 {
        let (u, v) = self.uv(i, j);
        let w = u + v;
        Vec3::new((u - v).cosh(), (v - u).sinh(), w.cosh()) * (self.spec.c.sqrt() / w.sinh())
    }

    /// u-edge `(i, j)`.
    pub fn q1(&self, i: usize, j: usize) -> Vec3 {
        let (_, v) = self.uv(i, j);
        let (w, du) = (self.w(i, j), self.spec.du);
        Vec3::new((2.0 * v).cosh(), -(2.0 * v).sinh(), -1.0) * (self.spec.c * du.sinh() / (s(w) * s(w + du)))
    }

    /// v-edge `(i, j)`.
    pub fn q2(&self, i: usize, j: usize) -> Vec3 {
        let (u, _) = self.uv(i, j);
        let (w, dv) = (self.w(i, j), self.spec.dv);
        Vec3::new((2.0 * u).cosh(), (2.0 * u).sinh(), -1.0) * (self.spec.c * dv.sinh() / (s(w) * s(w + dv)))
    }

    /// Quad `(i, j)`.
    pub fn omega(&self, i: usize, j: usize) -> f64 {
        let (w, du, dv) = (self.w(i, j), self.spec.du, self.spec.dv);
        2.0 * self.spec.c.powf(1.5) * du.sinh() * dv.sinh() / (s(w + du + dv) * s(w + du) * s(w + dv) * s(w)).sqrt()
    }

    /// Quad `(i, j)`.
    pub fn gamma(&self, i: usize, j: usize) -> f64 {
        let (w, du, dv) = (self.w(i, j), self.spec.du, self.spec.dv);
        (s(w + du + dv) * s(w) / (s(w + du) * s(w + dv))).sqrt()
    }

    /// Quad `(i, j)`.
    pub fn xi(&self, i: usize, j: usize) -> Vec3 {
        let (u, v) = self.uv(i, j);
        let (w, du, dv) = (u + v, self.spec.du, self.spec.dv);
        let den = 2.0 * self.spec.c.sqrt() * (s(w + dv) * s(w + du + dv) * s(w) * s(w + du)).sqrt();
        Vec3::new(
            -du.cosh() * (2.0 * v + dv).sinh() - dv.cosh() * (2.0 * u + du).sinh(),
            du.cosh() * (2.0 * v + dv).cosh() - dv.cosh() * (2.0 * u + du).cosh(),
            (2.0 * w + du + dv).sinh(),
        ) / den
    }

    /// Interior v-edge `(i, j)`.
    pub fn p_v(&self, i: usize, j: usize) -> f64 {
        let (w, du, dv) = (self.w(i, j), self.spec.du, self.spec.dv);
        (s(w - du) * s(w + du + dv) / (s(w - du + dv) * s(w + du))).sqrt()
    }

    /// Interior u-edge `(i, j)`; the v-edge formula with the steps exchanged.
    pub fn p_u(&self, i: usize, j: usize) -> f64 {
        let (w, du, dv) = (self.w(i, j), self.spec.du, self.spec.dv);
        (s(w - dv) * s(w + du + dv) / (s(w - dv + du) * s(w + dv))).sqrt()
    }

    pub fn h_v(&self, i: usize, j: usize) -> f64 {
        let (w, du, dv) = (self.w(i, j), self.spec.du, self.spec.dv);
        -2.0 * dv.sinh() * du.sinh() * du.cosh() / (s(w - du) * s(w + du) * s(w - du + dv) * s(w + du + dv)).sqrt()
    }

    pub fn h_u(&self, i: usize, j: usize) -> f64 {
        let (w, du, dv) = (self.w(i, j), self.spec.du, self.spec.dv);
        -2.0 * du.sinh() * dv.sinh() * dv.cosh() / (s(w - dv) * s(w + dv) * s(w - dv + du) * s(w + du + dv)).sqrt()
    }

    /// Mean curvature on v-edge `(i, j)` in the closed form with a positive sign.
    /// The discrete `h/√(ΩΩ')` is its negative; see [`Self::mean_curv_v`].
    pub fn mean_curv_v_positive(&self, i: usize, j: usize) -> f64 {
        let (w, du, dv) = (self.w(i, j), self.spec.du, self.spec.dv);
        self.spec.c.powf(-1.5) * du.cosh() * (s(w + dv) * s(w)).sqrt()
            / (s(w - du) * s(w + du) * s(w - du + dv) * s(w + du + dv)).powf(0.25)
    }

    pub fn mean_curv_u_positive(&self, i: usize, j: usize) -> f64 {
        let (w, du, dv) = (self.w(i, j), self.spec.du, self.spec.dv);
        self.spec.c.powf(-1.5) * dv.cosh() * (s(w + du) * s(w)).sqrt()
            / (s(w - dv) * s(w + dv) * s(w - dv + du) * s(w + du + dv)).powf(0.25)
    }

    /// `h/√(ΩΩ')` on v-edge `(i, j)`.
    pub fn mean_curv_v(&self, i: usize, j: usize) -> f64 {
        -self.mean_curv_v_positive(i, j)
    }

    pub fn mean_curv_u(&self, i: usize, j: usize) -> f64 {
        -self.mean_curv_u_positive(i, j)
    }

    /// Limit of the discrete mean curvature as the steps shrink. With the
    /// co-normal orientation used here (`ξ_u = -H q_u` on the smooth surface)
    /// this is `-c^{-3/2}`; its magnitude is the familiar `c^{-3/2}`.
    pub fn smooth_mean_curvature(&self) -> f64 {
        -self.spec.c.powf(-1.5)
    }

    /// Smooth affine metric `Ω(u, v)` of the parametrization.
    pub fn smooth_omega(&self, u: f64, v: f64) -> f64 {
        2.0 * self.spec.c.powf(1.5) / (u + v).sinh().powi(2)
    }
}

/// Samples the hyperboloid on the lattice described by `spec`.
pub fn hyperboloid_net(spec: &HyperboloidSpec) -> Result<(AsymptoticNet, AnalyticHyperboloid)> {
    spec.validate()?;
    let a = AnalyticHyperboloid { spec: *spec };
    let d = StaggeredDomain::new(spec.nu, spec.nv)?;
    let net = AsymptoticNet::from_fn(d, |i, j| a.q(i, j))?;
    Ok((net, a))
}

/// Integration order for [`integrate_lelieuvre_ordered`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// Bottom row first, then every column upwards.
    RowFirst,
    /// Left column first, then every row to the right.
    ColumnFirst,
}

/// Integrates `q1 = ν × ν(i+1)` and `q2 = -ν × ν(j+1)` from `base` at vertex
/// `(0, 0)`, row first. The report holds, per quad, the gap between the two
/// ways round the quad relative to its longest edge. The gap is
/// `(ν00 + ν11) × (ν10 + ν01)`, so it vanishes exactly when the co-normals
/// form a Moutard net for some gauge, and no gauge needs to be supplied.
pub fn integrate_lelieuvre(nu: &SiteField<Vec3>, base: Vec3) -> Result<(AsymptoticNet, ResidualReport)> {
    integrate_lelieuvre_ordered(nu, base, Order::RowFirst)
}

pub fn integrate_lelieuvre_ordered(nu: &SiteField<Vec3>, base: Vec3, order: Order) -> Result<(AsymptoticNet, ResidualReport)> {
    nu.check_family(Family::Vertex)?;
    let d = nu.domain();
    let (ni, nj) = (d.nu() + 1, d.nv() + 1);
    let e1 = |i: usize, j: usize| nu[(i, j)].cross(&nu[(i + 1, j)]);
    let e2 = |i: usize, j: usize| -nu[(i, j)].cross(&nu[(i, j + 1)]);
    let mut q = vec![Vec3::zeros(); ni * nj];
    q[0] = base;
    match order {
        Order::RowFirst => {
            for i in 1..ni {
                q[i] = q[i - 1] + e1(i - 1, 0);
            }
            for j in 1..nj {
                for i in 0..ni {
                    q[j * ni + i] = q[(j - 1) * ni + i] + e2(i, j - 1);
                }
            }
        }
        Order::ColumnFirst => {
            for j in 1..nj {
                q[j * ni] = q[(j - 1) * ni] + e2(0, j - 1);
            }
            for j in 0..nj {
                for i in 1..ni {
                    q[j * ni + i] = q[j * ni + i - 1] + e1(i - 1, j);
                }
            }
        }
    }
    let net = AsymptoticNet::new(d, q)?;
    let sites = d.sites(Family::Quad).map(|(i, j)| {
        let edges = [e1(i, j), e2(i + 1, j), e1(i, j + 1), e2(i, j)];
        let gap = (edges[0] + edges[1]) - (edges[3] + edges[2]);
        let scale = edges.iter().map(|e| e.norm()).fold(0.0, f64::max);
        (i, j, if scale > 0.0 { gap.norm() / scale } else { 0.0 })
    });
    let report = ResidualReport::from_sites("lelieuvre_closure", Family::Quad, 1e-12, sites.collect::<Vec<_>>());
    Ok((net, report))
}

/// Minimal net from co-normals `ν(i, j) = f[i] + g[j]`.
///
/// `f` has `nu + 1` samples and `g` has `nv + 1`. Such co-normals satisfy the
/// Moutard equation with `γ ≡ 1`, so the integration closes exactly up to
/// rounding and the mean curvature vanishes.
pub fn minimal_net(f: &[Vec3], g: &[Vec3], base: Vec3) -> Result<AsymptoticNet> {
    if f.len() < 2 || g.len() < 2 {
        return Err(Error::InvalidParameter { name: "samples", reason: "need at least two samples per curve".into() });
    }
    let d = StaggeredDomain::new(f.len() - 1, g.len() - 1)?;
    let nu = SiteField::from_fn(d, Family::Vertex, |i, j| f[i] + g[j]);
    let (net, _) = integrate_lelieuvre(&nu, base)?;
    assert_nondegenerate(&net, 0.0)?;
    Ok(net)
}

/// The paraboloid `q(u, v) = (v, u, -uv)` on integer samples, from
/// `f(u) = (-u, 0, -½)` and `g(v) = (0, -v, -½)`.
pub fn paraboloid_net(nu: usize, nv: usize) -> Result<AsymptoticNet> {
    let f: Vec<_> = (0..=nu).map(|i| Vec3::new(-(i as f64), 0.0, -0.5)).collect();
    let g: Vec<_> = (0..=nv).map(|j| Vec3::new(0.0, -(j as f64), -0.5)).collect();
    minimal_net(&f, &g, Vec3::zeros())
}

/// Solves the Moutard equation `γ²(ν00 + ν11) = ν01 + ν10` for the co-normals
/// given the bottom row, the left column and the gauge on every quad.
pub fn moutard_conormals(row: &[Vec3], column: &[Vec3], gamma: &SiteField<f64>) -> Result<SiteField<Vec3>> {
    gamma.check_family(Family::Quad)?;
    let d = gamma.domain();
    let (ni, nj) = (d.nu() + 1, d.nv() + 1);
    if row.len() != ni || column.len() != nj {
        return Err(Error::LengthMismatch { what: "boundary co-normals".into(), expected: ni + nj, found: row.len() + column.len() });
    }
    let mut n = vec![Vec3::zeros(); ni * nj];
    n[..ni].copy_from_slice(row);
    for j in 0..nj {
        n[j * ni] = column[j];
    }
    for j in 0..nj - 1 {
        for i in 0..ni - 1 {
            let g2 = gamma[(i, j)].powi(2);
            n[(j + 1) * ni + i + 1] = (n[(j + 1) * ni + i] + n[j * ni + i + 1]) / g2 - n[j * ni + i];
        }
    }
    SiteField::from_values(d, Family::Vertex, n)
}

/// A generic asymptotic net near the hyperboloid: its boundary co-normals
/// and gauge are smooth perturbations of size `eps`, so the cubic form and
/// every structural coefficient are non-trivial.
pub fn perturbed_hyperboloid_net(spec: &HyperboloidSpec, eps: f64) -> Result<AsymptoticNet> {
    spec.validate()?;
    let a = AnalyticHyperboloid { spec: *spec };
    let d = StaggeredDomain::new(spec.nu, spec.nv)?;
    let row: Vec<_> = (0..=spec.nu).map(|i| a.nu(i, 0) * (1.0 + eps * (0.5 * i as f64).sin())).collect();
    let mut column: Vec<_> = (0..=spec.nv).map(|j| a.nu(0, j) * (1.0 + eps * (0.4 * j as f64).cos())).collect();
    column[0] = row[0];
    let gamma = SiteField::from_fn(d, Family::Quad, |i, j| {
        a.gamma(i, j) * (1.0 + eps * spec.du * spec.dv * (0.3 * i as f64 + 0.5 * j as f64).sin())
    });
    let nu = moutard_conormals(&row, &column, &gamma)?;
    let (net, _) = integrate_lelieuvre(&nu, a.q(0, 0))?;
    assert_nondegenerate(&net, 0.0)?;
    Ok(net)
}
