//! Every verification suite run against one net, in dependency order.

use serde::Serialize;

use crate::affine_structure::{analyze_structure, AffineStructure, SuiteSummary};
use crate::compatibility::{compat_residuals, mixed_xi_identity_residual, q112_two_way_residual, CompatInputs};
use crate::error::Error;
use crate::net::{assert_nondegenerate, planarity_report, AsymptoticNet};
use crate::residual::ResidualReport;
use crate::structural::{derived_fields, q_second_derivative_residuals, xi_derivative_residuals};
use crate::tolerances::Tolerances;

/// A gate that stopped the run before the later suites.
#[derive(Debug, Clone, Serialize)]
pub struct Halt {
    pub suite: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verification {
    pub tolerances: Tolerances,
    pub gamma0: f64,
    #[serde(serialize_with = "summaries")]
    pub reports: Vec<ResidualReport>,
    pub halted: Option<Halt>,
}

fn summaries<S: serde::Serializer>(r: &[ResidualReport], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(r.iter().map(SuiteSummary::from))
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.halted.is_none() && self.reports.iter().all(ResidualReport::passed)
    }

    pub fn failed_suites(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.reports.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
        if let Some(h) = &self.halted {
            out.push(&h.suite);
        }
        out
    }

    pub fn report(&self, name: &str) -> Option<&ResidualReport> {
        self.reports.iter().find(|r| r.name == name)
    }

    /// One CSV table with a row per site of every suite.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,family,i,j,residual,tol,pass\n");
        for r in &self.reports {
            out.extend(r.to_csv().lines().skip(1).map(|l| format!("{l}\n")));
        }
        out
    }
}

/// Suites that need the full structure: the structure's own identities,
/// `ξ` orthogonality, the sixteen structural expansions, the three
/// compatibility equations and the two identities behind them.
pub fn structure_suites(net: &AsymptoticNet, s: &AffineStructure, tol: f64) -> Vec<ResidualReport> {
    let f = derived_fields(s, tol);
    let mut out: Vec<ResidualReport> = s.reports.clone();
    out.extend(f.orthogonality.iter().cloned());
    out.extend(q_second_derivative_residuals(net, s, &f, tol));
    out.extend(xi_derivative_residuals(net, s, &f, tol));
    let c = compat_residuals(CompatInputs::from(s), tol);
    out.extend([c.eq1, c.eq2, c.eq3]);
    out.push(mixed_xi_identity_residual(s, &f, tol));
    out.push(q112_two_way_residual(net, s, tol));
    out
}

/// Runs every suite. Non-degeneracy, planarity and gauge consistency are
/// gates: when one fails the run stops there, because the later suites are
/// undefined on such a net.
pub fn verify_net(net: &AsymptoticNet, gamma0: f64, tol: &Tolerances) -> Verification {
    let mut v = Verification { tolerances: *tol, gamma0, reports: Vec::new(), halted: None };
    let halt = |suite: &str, e: Error| Some(Halt { suite: suite.into(), message: e.to_string() });
    if let Err(e) = assert_nondegenerate(net, tol.nondegenerate) {
        v.halted = halt("nondegenerate", e);
        return v;
    }
    let planarity = planarity_report(net, tol.planarity);
    if !planarity.passed() {
        v.reports.push(planarity);
        return v;
    }
    match analyze_structure(net, gamma0, (0, 0), tol) {
        Ok(s) => v.reports = structure_suites(net, &s, tol.identity),
        Err(e) => {
            v.reports.push(planarity);
            v.halted = halt("gauge", e);
        }
    }
    v
}
