//! Named verification checks collected into serializable reports.

use serde::{Deserialize, Serialize};

/// Where a check's reference value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Quantitative statement taken from the underlying theory.
    Theory,
    /// Elementary/exact value (definitions, symmetry, closed arithmetic).
    Exact,
    /// Value produced by an independent numerical oracle.
    Oracle,
}

/// A single named check: computed value against a reference with a tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    /// When true the tolerance is relative to |reference|.
    pub relative: bool,
    pub pass: bool,
    pub provenance: Provenance,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        value: f64,
        reference: f64,
        tolerance: f64,
        relative: bool,
        provenance: Provenance,
    ) -> Self {
        let bound = if relative {
            tolerance * reference.abs()
        } else {
            tolerance
        };
        let pass = (value - reference).abs() <= bound && value.is_finite();
        Check {
            name: name.into(),
            value,
            reference,
            tolerance,
            relative,
            pass,
            provenance,
        }
    }

    /// Check that asserts `value <= bound` by storing the excess over the bound.
    pub fn upper_bound(
        name: impl Into<String>,
        value: f64,
        bound: f64,
        provenance: Provenance,
    ) -> Self {
        let pass = value <= bound && value.is_finite();
        Check {
            name: name.into(),
            value,
            reference: bound,
            tolerance: bound,
            relative: false,
            pass,
            provenance,
        }
    }
}

/// Collection of named checks with an overall pass flag.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absolute_and_relative_pass_rules() {
        let c = Check::new("abs", 1.0 + 5e-10, 1.0, 1e-9, false, Provenance::Exact);
        assert!(c.pass);
        let c = Check::new("rel", 100.0 + 5e-8, 100.0, 1e-9, true, Provenance::Exact);
        assert!(c.pass);
        let c = Check::new("rel-fail", 100.0 + 5e-7, 100.0, 1e-9, true, Provenance::Exact);
        assert!(!c.pass);
    }

    #[test]
    fn nan_never_passes() {
        let c = Check::new("nan", f64::NAN, 0.0, 1.0, false, Provenance::Oracle);
        assert!(!c.pass);
    }
}
