//! Per-site residual fields and their summaries.

use serde::{Deserialize, Serialize};

use crate::staggered_grid::Family;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteResidual {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Result of one verification suite.
///
/// `values` holds one dimensionless residual per evaluated site. Sites that
/// could not be evaluated are listed in `excluded`; when `exclusions_fail` is
/// set they count as failures (a degenerate vertex star is not planar).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub name: String,
    pub family: Family,
    pub tol: f64,
    pub values: Vec<SiteResidual>,
    pub excluded: Vec<(usize, usize)>,
    pub exclusions_fail: bool,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub argmax: Option<(usize, usize)>,
}

impl ResidualReport {
    pub fn new(name: impl Into<String>, family: Family, tol: f64, values: Vec<SiteResidual>) -> Self {
        let mut max_abs = 0.0_f64;
        let mut argmax = None;
        let mut sum = 0.0;
        for v in &values {
            let a = v.value.abs();
            sum += a;
            // NaN must not hide behind a comparison that is always false
            if a > max_abs || (a.is_nan() && !max_abs.is_nan()) {
                max_abs = a;
                argmax = Some((v.i, v.j));
            }
        }
        let mean_abs = if values.is_empty() { 0.0 } else { sum / values.len() as f64 };
        Self {
            name: name.into(),
            family,
            tol,
            values,
            excluded: Vec::new(),
            exclusions_fail: false,
            max_abs,
            mean_abs,
            argmax,
        }
    }

    /// Builds a report from `(i, j, value)` triples.
    pub fn from_sites(
        name: impl Into<String>,
        family: Family,
        tol: f64,
        sites: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        let values = sites
            .into_iter()
            .map(|(i, j, value)| SiteResidual { i, j, value })
            .collect();
        Self::new(name, family, tol, values)
    }

    pub fn with_excluded(mut self, excluded: Vec<(usize, usize)>, fail: bool) -> Self {
        self.excluded = excluded;
        self.exclusions_fail = fail;
        self
    }

    pub fn passed(&self) -> bool {
        !self.max_abs.is_nan()
            && self.max_abs <= self.tol
            && !(self.exclusions_fail && !self.excluded.is_empty())
    }

    /// Sites whose residual exceeds the tolerance (or is NaN).
    pub fn failing_sites(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self
            .values
            .iter()
            .filter(|v| !(v.value.abs() <= self.tol))
            .map(|v| (v.i, v.j))
            .collect();
        if self.exclusions_fail {
            out.extend(self.excluded.iter().copied());
        }
        out
    }

    pub fn value_at(&self, i: usize, j: usize) -> Option<f64> {
        self.values.iter().find(|v| v.i == i && v.j == j).map(|v| v.value)
    }

    /// Combines same-family reports site by site, keeping the largest value.
    pub fn merge_max(name: impl Into<String>, tol: f64, parts: &[ResidualReport]) -> Self {
        let family = parts.first().map(|p| p.family).unwrap_or(Family::Vertex);
        let mut acc: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
        let mut excluded = Vec::new();
        let mut exclusions_fail = false;
        for p in parts {
            for v in &p.values {
                let e = acc.entry((v.j, v.i)).or_insert(0.0);
                if v.value.abs() > *e || v.value.is_nan() {
                    *e = v.value.abs();
                }
            }
            excluded.extend(p.excluded.iter().copied());
            exclusions_fail |= p.exclusions_fail;
        }
        excluded.sort_unstable();
        excluded.dedup();
        Self::from_sites(name, family, tol, acc.into_iter().map(|((j, i), v)| (i, j, v)))
            .with_excluded(excluded, exclusions_fail)
    }

    /// CSV with one row per site: `i,j,residual,pass`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("suite,family,i,j,residual,tol,pass\n");
        for v in &self.values {
            s.push_str(&format!(
                "{},{:?},{},{},{:.16e},{:e},{}\n",
                self.name,
                self.family,
                v.i,
                v.j,
                v.value,
                self.tol,
                v.value.abs() <= self.tol
            ));
        }
        s
    }
}
