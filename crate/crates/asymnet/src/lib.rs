//! Discrete asymptotic nets in equi-affine geometry.
//!
//! A net is a map from a rectangular block of the integer lattice into R³
//! whose vertex stars are planar. From such a net this crate computes the
//! affine metric, the co-normal field and its gauge, the affine normal and the
//! cubic form; it checks the structural identities relating them, evaluates
//! the compatibility equations, and integrates compatible data back into a net
//! that is unique up to an equi-affine map.
//!
//! Fields live on a staggered lattice (vertices, edges, quads) described in
//! [`staggered_grid`]. Every verification produces a [`ResidualReport`] with a
//! per-site dimensionless residual and the tolerance it was judged against.
//!
//! ```
//! use asymnet::generators::{hyperboloid_net, HyperboloidSpec};
//! use asymnet::affine_structure::build_structure;
//! use asymnet::Tolerances;
//!
//! let spec = HyperboloidSpec { nu: 6, nv: 6, ..HyperboloidSpec::default() };
//! let (net, _) = hyperboloid_net(&spec).unwrap();
//! let s = build_structure(&net, 1.0, &Tolerances::default()).unwrap();
//! assert!(s.omega.values().iter().all(|&w| w > 0.0));
//! ```

pub mod affine_structure;
pub mod cli_io;
pub mod compatibility;
pub mod error;
pub mod generators;
pub mod net;
pub mod reconstruction;
pub mod residual;
pub mod staggered_grid;
pub mod structural;
pub mod suites;
pub mod tolerances;

pub use error::{Error, Result};
pub use net::{AsymptoticNet, Vec3};
pub use residual::ResidualReport;
pub use staggered_grid::{Family, SiteField, StaggeredDomain};
pub use tolerances::Tolerances;
