//! Structured outcomes for lemma and identity checks.

use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The claim holds with nothing to witness (for instance both sides of a
    /// divisibility are zero).
    Vacuous,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Vacuous => "vacuous",
        })
    }
}

/// Outcome of one verification: what was checked, on what, how it went, and
/// for failures enough serialized input to re-run the check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub subject: String,
    pub claim: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reproducer: Option<String>,
}

impl VerificationReport {
    pub fn pass(subject: impl Into<String>, claim: impl Into<String>) -> Self {
        VerificationReport {
            subject: subject.into(),
            claim: claim.into(),
            status: Status::Pass,
            witness: None,
            reproducer: None,
        }
    }

    pub fn pass_with(
        subject: impl Into<String>,
        claim: impl Into<String>,
        witness: impl Into<String>,
    ) -> Self {
        VerificationReport {
            witness: Some(witness.into()),
            ..Self::pass(subject, claim)
        }
    }

    pub fn vacuous(subject: impl Into<String>, claim: impl Into<String>) -> Self {
        VerificationReport {
            status: Status::Vacuous,
            ..Self::pass(subject, claim)
        }
    }

    /// Failures must carry a reproducer: serialized inputs that re-trigger
    /// the violation when fed back in.
    pub fn fail(
        subject: impl Into<String>,
        claim: impl Into<String>,
        witness: impl Into<String>,
        reproducer: impl Into<String>,
    ) -> Self {
        VerificationReport {
            subject: subject.into(),
            claim: claim.into(),
            status: Status::Fail,
            witness: Some(witness.into()),
            reproducer: Some(reproducer.into()),
        }
    }

    pub fn passed(&self) -> bool {
        matches!(self.status, Status::Pass | Status::Vacuous)
    }

    /// One tab-separated line: subject, claim, status, witness. Tabs and
    /// newlines inside fields become spaces so the row stays one row.
    pub fn tsv_line(&self) -> String {
        let clean = |s: &str| s.replace(['\t', '\n', '\r'], " ");
        format!(
            "{}\t{}\t{}\t{}",
            clean(&self.subject),
            clean(&self.claim),
            self.status,
            clean(self.witness.as_deref().unwrap_or("-")),
        )
    }

    pub fn json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fail_reports_carry_reproducers() {
        let r = VerificationReport::fail("g1", "faces positive", "face f2 product +1", "pbg v1\n");
        assert!(!r.passed());
        assert!(r.reproducer.is_some());
    }

    #[test]
    fn tsv_is_one_line() {
        let r = VerificationReport::pass_with("g1", "claim", "a\tb\nc");
        let line = r.tsv_line();
        assert!(!line.contains('\n'));
        assert_eq!(line.matches('\t').count(), 3);
    }

    #[test]
    fn json_round_trips_status() {
        let r = VerificationReport::vacuous("s", "c");
        let line = r.json_line();
        assert!(line.contains("\"vacuous\""));
        assert!(!line.contains("witness"));
    }
}
