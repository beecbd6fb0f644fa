//! Certification harness: coefficient calculators, premise checks,
//! Monte-Carlo verification of the one-step inequalities, Lyapunov tracking
//! and trajectory convergence diagnostics.

pub mod coefficients;
pub mod diagnostics;
pub mod lyapunov;
pub mod mc;
pub mod premises;

use serde::Serialize;

/// Verdict of one certification entry. Sampling and finite horizons cannot
/// prove universally quantified statements, so `Inconclusive` is a first
/// class outcome, distinct from both pass and fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Numeric evidence attached to a verdict; every pass carries at least one
/// populated field.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Evidence {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation_k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inf: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// One certified condition.
#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    /// Short machine-readable name, e.g. `summable_growth`.
    pub check: String,
    /// The mathematical condition in plain text.
    pub condition: String,
    pub verdict: Verdict,
    pub evidence: Evidence,
}

impl CheckEntry {
    pub fn new(check: impl Into<String>, condition: impl Into<String>, verdict: Verdict) -> Self {
        CheckEntry {
            check: check.into(),
            condition: condition.into(),
            verdict,
            evidence: Evidence::default(),
        }
    }

    pub fn with_evidence(mut self, evidence: Evidence) -> Self {
        self.evidence = evidence;
        self
    }
}

/// A batch of certification entries with tallies.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub checks: Vec<CheckEntry>,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
}

impl CertificateReport {
    pub fn from_checks(checks: Vec<CheckEntry>) -> Self {
        let passed = checks.iter().filter(|c| c.verdict == Verdict::Pass).count();
        let failed = checks.iter().filter(|c| c.verdict == Verdict::Fail).count();
        let inconclusive = checks
            .iter()
            .filter(|c| c.verdict == Verdict::Inconclusive)
            .count();
        CertificateReport {
            checks,
            passed,
            failed,
            inconclusive,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}
