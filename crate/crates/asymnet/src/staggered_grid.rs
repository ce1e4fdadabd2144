//! Lattice sites of a rectangular quad net and dense fields over them.
//!
//! A domain with `nu x nv` quads has `(nu+1) x (nv+1)` vertices. Every site is
//! addressed by its lower-left generating vertex: the quad `(u+½, v+½)` is
//! stored at `(u, v)`, the u-edge `(u+½, v)` at `(u, v)` and the v-edge
//! `(u, v+½)` at `(u, v)`. The interior families keep the same addressing and
//! only shrink the index range to sites that have neighbours on both sides of
//! the stencil.
//!
//! Storage is row-major with rows of constant `v`.

use std::ops::{Index, Range, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Vertex,
    UEdge,
    VEdge,
    Quad,
    /// Vertices with all four incident quads.
    InteriorVertex,
    /// u-edges with a quad above and below.
    InteriorUEdge,
    /// v-edges with a quad left and right.
    InteriorVEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StaggeredDomain {
    nu: usize,
    nv: usize,
}

impl StaggeredDomain {
    pub fn new(nu: usize, nv: usize) -> Result<Self> {
        if nu == 0 || nv == 0 {
            return Err(Error::InvalidDomain { nu, nv, reason: "need at least one quad in each direction" });
        }
        Ok(Self { nu, nv })
    }

    /// Number of quads along u.
    pub fn nu(&self) -> usize {
        self.nu
    }

    /// Number of quads along v.
    pub fn nv(&self) -> usize {
        self.nv
    }

    /// Index ranges `(i, j)` covered by a family.
    pub fn ranges(&self, family: Family) -> (Range<usize>, Range<usize>) {
        let (nu, nv) = (self.nu, self.nv);
        match family {
            Family::Vertex => (0..nu + 1, 0..nv + 1),
            Family::UEdge => (0..nu, 0..nv + 1),
            Family::VEdge => (0..nu + 1, 0..nv),
            Family::Quad => (0..nu, 0..nv),
            Family::InteriorVertex => (1..nu, 1..nv),
            Family::InteriorUEdge => (0..nu, 1..nv),
            Family::InteriorVEdge => (1..nu, 0..nv),
        }
    }

    pub fn contains(&self, family: Family, i: usize, j: usize) -> bool {
        let (ri, rj) = self.ranges(family);
        ri.contains(&i) && rj.contains(&j)
    }

    pub fn count(&self, family: Family) -> usize {
        let (ri, rj) = self.ranges(family);
        ri.len() * rj.len()
    }

    /// Sites of a family in storage order (`j` outer, `i` inner).
    pub fn sites(&self, family: Family) -> impl Iterator<Item = (usize, usize)> {
        let (ri, rj) = self.ranges(family);
        rj.flat_map(move |j| ri.clone().map(move |i| (i, j)))
    }

    fn offset(&self, family: Family, i: usize, j: usize) -> Option<usize> {
        let (ri, rj) = self.ranges(family);
        if ri.contains(&i) && rj.contains(&j) {
            Some((j - rj.start) * ri.len() + (i - ri.start))
        } else {
            None
        }
    }
}

/// A dense field over one site family.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteField<T> {
    domain: StaggeredDomain,
    family: Family,
    values: Vec<T>,
}

impl<T> SiteField<T> {
    pub fn from_fn(domain: StaggeredDomain, family: Family, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let values = domain.sites(family).map(|(i, j)| f(i, j)).collect();
        Self { domain, family, values }
    }

    pub fn try_from_fn<E>(
        domain: StaggeredDomain,
        family: Family,
        mut f: impl FnMut(usize, usize) -> std::result::Result<T, E>,
    ) -> std::result::Result<Self, E> {
        let values = domain.sites(family).map(|(i, j)| f(i, j)).collect::<std::result::Result<_, _>>()?;
        Ok(Self { domain, family, values })
    }

    /// Wraps values given in storage order.
    pub fn from_values(domain: StaggeredDomain, family: Family, values: Vec<T>) -> Result<Self> {
        let expected = domain.count(family);
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                what: format!("{family:?} field"),
                expected,
                found: values.len(),
            });
        }
        Ok(Self { domain, family, values })
    }

    pub fn domain(&self) -> StaggeredDomain {
        self.domain
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&T> {
        self.domain.offset(self.family, i, j).map(|k| &self.values[k])
    }

    /// Like [`get`](Self::get) for signed indices, so stencils can probe
    /// past the lower boundary.
    pub fn at(&self, i: isize, j: isize) -> Option<&T> {
        if i < 0 || j < 0 {
            return None;
        }
        self.get(i as usize, j as usize)
    }

    pub fn try_get(&self, i: usize, j: usize) -> Result<&T> {
        self.get(i, j).ok_or(Error::OutOfRange { family: self.family, i, j })
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.domain.contains(self.family, i, j)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &T)> {
        self.domain.sites(self.family).zip(self.values.iter())
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> SiteField<U> {
        SiteField { domain: self.domain, family: self.family, values: self.values.iter().map(f).collect() }
    }

    /// Copy of the field with one site replaced.
    pub fn replaced(&self, i: usize, j: usize, value: T) -> Result<Self>
    where
        T: Clone,
    {
        let k = self.domain.offset(self.family, i, j).ok_or(Error::OutOfRange { family: self.family, i, j })?;
        let mut out = self.clone();
        out.values[k] = value;
        Ok(out)
    }

    pub fn check_family(&self, expected: Family) -> Result<()> {
        if self.family == expected {
            Ok(())
        } else {
            Err(Error::FamilyMismatch { expected, found: self.family })
        }
    }
}

impl<T> Index<(usize, usize)> for SiteField<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        match self.get(i, j) {
            Some(v) => v,
            None => panic!("site ({i}, {j}) outside {:?} field of a {}x{} domain", self.family, self.domain.nu, self.domain.nv),
        }
    }
}

/// Forward difference along u: vertex field to u-edges, v-edge field to quads.
pub fn diff1<T>(f: &SiteField<T>) -> Result<SiteField<T>>
where
    T: Copy + Sub<Output = T>,
{
    let target = match f.family {
        Family::Vertex => Family::UEdge,
        Family::VEdge => Family::Quad,
        found => return Err(Error::FamilyMismatch { expected: Family::Vertex, found }),
    };
    Ok(SiteField::from_fn(f.domain, target, |i, j| f[(i + 1, j)] - f[(i, j)]))
}

/// Forward difference along v: vertex field to v-edges, u-edge field to quads.
pub fn diff2<T>(f: &SiteField<T>) -> Result<SiteField<T>>
where
    T: Copy + Sub<Output = T>,
{
    let target = match f.family {
        Family::Vertex => Family::VEdge,
        Family::UEdge => Family::Quad,
        found => return Err(Error::FamilyMismatch { expected: Family::Vertex, found }),
    };
    Ok(SiteField::from_fn(f.domain, target, |i, j| f[(i, j + 1)] - f[(i, j)]))
}

/// Mixed difference of a vertex field, evaluated as `diff2(diff1(f))` so the
/// two agree bit for bit.
pub fn mixed12<T>(f: &SiteField<T>) -> Result<SiteField<T>>
where
    T: Copy + Sub<Output = T>,
{
    f.check_family(Family::Vertex)?;
    Ok(SiteField::from_fn(f.domain, Family::Quad, |i, j| {
        (f[(i + 1, j + 1)] - f[(i, j + 1)]) - (f[(i + 1, j)] - f[(i, j)])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_ranges() {
        let d = StaggeredDomain::new(3, 2).unwrap();
        assert_eq!(d.count(Family::Vertex), 12);
        assert_eq!(d.count(Family::UEdge), 9);
        assert_eq!(d.count(Family::VEdge), 8);
        assert_eq!(d.count(Family::Quad), 6);
        assert_eq!(d.count(Family::InteriorVertex), 2);
        assert_eq!(d.count(Family::InteriorUEdge), 3);
        assert_eq!(d.count(Family::InteriorVEdge), 4);
        assert!(StaggeredDomain::new(0, 3).is_err());
    }

    #[test]
    fn storage_is_row_major() {
        let d = StaggeredDomain::new(2, 2).unwrap();
        let f = SiteField::from_fn(d, Family::Vertex, |i, j| 10 * j + i);
        assert_eq!(f.values()[..4], [0, 1, 2, 10]);
        assert_eq!(f[(2, 1)], 12);
        let g = SiteField::from_fn(d, Family::InteriorVertex, |i, j| (i, j));
        assert_eq!(g.values(), &[(1, 1)]);
    }

    #[test]
    fn out_of_range_lookup() {
        let d = StaggeredDomain::new(2, 2).unwrap();
        let f = SiteField::from_fn(d, Family::Quad, |_, _| 0.0);
        assert!(f.get(2, 0).is_none());
        assert!(f.at(-1, 0).is_none());
        assert!(matches!(f.try_get(0, 5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn bilinear_field_has_constant_mixed_difference() {
        let d = StaggeredDomain::new(4, 3).unwrap();
        let f = SiteField::from_fn(d, Family::Vertex, |i, j| (i * j) as f64);
        let m = mixed12(&f).unwrap();
        assert!(m.values().iter().all(|&x| x == 1.0));
        assert_eq!(diff1(&f).unwrap()[(0, 2)], 2.0);
    }

    #[test]
    fn wrong_family_is_rejected() {
        let d = StaggeredDomain::new(2, 2).unwrap();
        let f = SiteField::from_fn(d, Family::Quad, |_, _| 1.0);
        assert!(matches!(diff1(&f), Err(Error::FamilyMismatch { .. })));
        assert!(SiteField::from_values(d, Family::Quad, vec![1.0; 3]).is_err());
    }
}
