//! Structured verification reports.
//!
//! A report is a flat list of check records; the global status is the worst
//! member. Records are emitted in a deterministic order and failing checks
//! carry point witnesses.

use crate::chart::Chart;
use crate::expr::{ZeroVerdict, ZeroWitness};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Unknown,
    Invalid,
}

impl CheckStatus {
    /// Severity order used to aggregate a report: invalid > fail > unknown > pass.
    fn severity(self) -> u8 {
        match self {
            CheckStatus::Pass => 0,
            CheckStatus::Unknown => 1,
            CheckStatus::Fail => 2,
            CheckStatus::Invalid => 3,
        }
    }

    pub fn worst(self, other: CheckStatus) -> CheckStatus {
        if self.severity() >= other.severity() {
            self
        } else {
            other
        }
    }

    pub fn is_pass(self) -> bool {
        self == CheckStatus::Pass
    }
}

impl std::fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Unknown => "unknown",
            CheckStatus::Invalid => "invalid",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Coordinate values of the point, in chart order.
    pub point: Vec<(String, String)>,
    /// Offending values at that point (pairings, ranks, residuals).
    pub values: Vec<String>,
}

impl Witness {
    pub fn from_zero_witness(w: &ZeroWitness) -> Witness {
        Witness {
            point: w
                .point
                .iter()
                .map(|(n, v)| (n.clone(), v.to_string()))
                .collect(),
            values: vec![w.value.to_string()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub label: String,
    pub status: CheckStatus,
    pub witnesses: Vec<Witness>,
}

const MAX_WITNESSES: usize = 4;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new() -> Self {
        VerificationReport::default()
    }

    pub fn status(&self) -> CheckStatus {
        self.checks
            .iter()
            .fold(CheckStatus::Pass, |acc, c| acc.worst(c.status))
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.checks.push(record);
    }

    pub fn record(
        &mut self,
        id: impl Into<String>,
        label: impl Into<String>,
        status: CheckStatus,
        witnesses: Vec<Witness>,
    ) {
        let mut witnesses = witnesses;
        witnesses.truncate(MAX_WITNESSES);
        self.checks.push(CheckRecord {
            id: id.into(),
            label: label.into(),
            status,
            witnesses,
        });
    }

    /// Record a zero-classification verdict for the named condition.
    pub fn record_zero(&mut self, id: impl Into<String>, label: impl Into<String>, v: &ZeroVerdict) {
        let (status, witnesses, sampled) = match v {
            ZeroVerdict::Zero => (CheckStatus::Pass, vec![], false),
            ZeroVerdict::SampledZero => (CheckStatus::Pass, vec![], true),
            ZeroVerdict::NonZero(w) => {
                (CheckStatus::Fail, vec![Witness::from_zero_witness(w)], false)
            }
            ZeroVerdict::Unknown => (CheckStatus::Unknown, vec![], false),
        };
        let mut label = label.into();
        if sampled {
            label.push_str(" [sampled]");
        }
        self.record(id, label, status, witnesses);
    }

    pub fn record_pass_fail(
        &mut self,
        id: impl Into<String>,
        label: impl Into<String>,
        pass: bool,
        witnesses: Vec<Witness>,
    ) {
        let status = if pass { CheckStatus::Pass } else { CheckStatus::Fail };
        self.record(id, label, status, if pass { vec![] } else { witnesses });
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.status().is_pass()
    }

    pub fn find(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }
}

/// Render a point as witness coordinates.
pub fn point_witness(chart: &Chart, p: &crate::chart::Point, values: Vec<String>) -> Witness {
    Witness {
        point: p.render(chart),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_status_aggregation() {
        let mut r = VerificationReport::new();
        r.record("a", "first", CheckStatus::Pass, vec![]);
        assert_eq!(r.status(), CheckStatus::Pass);
        r.record("b", "second", CheckStatus::Unknown, vec![]);
        assert_eq!(r.status(), CheckStatus::Unknown);
        r.record("c", "third", CheckStatus::Fail, vec![]);
        assert_eq!(r.status(), CheckStatus::Fail);
        r.record("d", "fourth", CheckStatus::Invalid, vec![]);
        assert_eq!(r.status(), CheckStatus::Invalid);
    }
}
