//! Three-valued verdicts on geometric properties, backed by numeric evidence.

pub mod properties;
pub mod reflection;

use serde::{Deserialize, Serialize};

use crate::base::membership::Membership;

pub use properties::{
    check_austere, check_inverse_closed, check_minimality, classify_fiber_tg, classify_totally_geodesic,
};
pub use reflection::{build_reflection, random_gauge, verify_reflection, ReflectionCandidate, ReflectionKind, ReflectionSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
    pub outcome: Outcome,
}

impl Evidence {
    /// Pass at `value <= tol`, fail beyond `10 tol`, inconclusive in between.
    pub fn at_most(check: impl Into<String>, value: f64, tol: f64) -> Self {
        let outcome = if value <= tol {
            Outcome::Pass
        } else if value > 10.0 * tol {
            Outcome::Fail
        } else {
            Outcome::Inconclusive
        };
        Self { check: check.into(), value, tolerance: tol, outcome }
    }

    pub fn membership(check: impl Into<String>, m: &Membership, tol: f64) -> Self {
        let outcome = match m {
            Membership::Member { .. } => Outcome::Pass,
            Membership::NonMember { .. } => Outcome::Fail,
            Membership::Inconclusive { .. } => Outcome::Inconclusive,
        };
        Self { check: check.into(), value: m.distance(), tolerance: tol, outcome }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub property: String,
    pub verdict: Verdict,
    pub evidence: Vec<Evidence>,
    pub provenance: String,
}

impl VerdictReport {
    /// Inconclusive if any check is; otherwise fails if any check fails.
    pub fn from_evidence(property: &str, mut evidence: Vec<Evidence>, provenance: &str) -> Self {
        evidence.sort_by(|a, b| a.check.cmp(&b.check));
        let verdict = if evidence.iter().any(|e| e.outcome == Outcome::Inconclusive) {
            Verdict::Inconclusive
        } else if evidence.iter().any(|e| e.outcome == Outcome::Fail) {
            Verdict::Fails
        } else {
            Verdict::Holds
        };
        Self { property: property.to_string(), verdict, evidence, provenance: provenance.to_string() }
    }

    pub fn evidence_for(&self, check: &str) -> Option<&Evidence> {
        self.evidence.iter().find(|e| e.check == check)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_valued_thresholds() {
        assert_eq!(Evidence::at_most("a", 1e-9, 1e-8).outcome, Outcome::Pass);
        assert_eq!(Evidence::at_most("a", 5e-8, 1e-8).outcome, Outcome::Inconclusive);
        assert_eq!(Evidence::at_most("a", 2e-7, 1e-8).outcome, Outcome::Fail);
        let r = VerdictReport::from_evidence(
            "p",
            vec![Evidence::at_most("z", 1.0, 1e-8), Evidence::at_most("a", 5e-8, 1e-8)],
            "",
        );
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.evidence[0].check, "a");
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["verdict"], "inconclusive");
        assert!(json["evidence"][0]["tolerance"].is_number());
    }
}
