//! Default tolerances, kept in one place.
//!
//! Every residual is dimensionless, so the same thresholds apply to nets of
//! any size and scale. Reports record the value they were judged against.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Quads with `M` at or below this are rejected as degenerate.
    pub nondegenerate: f64,
    /// Vertex-star coplanarity, normalized by the cube of the edge scale.
    pub planarity: f64,
    /// Largest sine allowed between co-normal candidates at a shared vertex.
    pub gauge_alignment: f64,
    /// Every identity suite (Lelieuvre, Moutard, structural, compatibility).
    pub identity: f64,
    /// Minimal, affine-sphere and constant-c classification.
    pub classification: f64,
    /// Compatibility residuals accepted on reconstruction input.
    pub compat_input: f64,
    /// Relative error allowed in the reconstruction frame determinant.
    pub frame: f64,
    /// Per lattice step; coherence is checked against `coherence * (nu + nv)`.
    pub coherence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            nondegenerate: 0.0,
            planarity: 1e-9,
            gauge_alignment: 1e-8,
            identity: 1e-9,
            classification: 1e-8,
            compat_input: 1e-8,
            frame: 1e-10,
            coherence: 1e-10,
        }
    }
}

impl Tolerances {
    /// Sets every residual threshold to `tol`, leaving the structural gates alone.
    pub fn with_identity(mut self, tol: f64) -> Self {
        self.identity = tol;
        self.planarity = tol;
        self
    }
}
