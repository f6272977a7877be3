//! Structured pass/fail records for identity checks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::field::Point;
use crate::tensor::TensorCheck;

pub const REPORT_SCHEMA: &str = "v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        })
    }
}

/// Where an identity was worst: tensor index, sample point, and trial
/// number for randomized suites.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial: Option<usize>,
    pub index: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<String>>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(t) = self.trial {
            write!(f, "trial {t}, ")?;
        }
        write!(f, "index {:?}", self.index)?;
        if let Some(p) = &self.point {
            write!(f, " at ({})", p.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub worst_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl CheckRecord {
    pub fn new(
        name: impl Into<String>,
        passed: bool,
        worst_residual: f64,
        witness: Option<Witness>,
    ) -> Self {
        CheckRecord {
            name: name.into(),
            status: Status::from_bool(passed),
            worst_residual,
            witness,
        }
    }

    pub fn from_tensor_check(
        name: impl Into<String>,
        check: &TensorCheck,
        trial: Option<usize>,
    ) -> Self {
        let witness = check.index.as_ref().map(|index| Witness {
            trial,
            index: index.clone(),
            point: check.point.as_ref().map(Point::labels),
        });
        CheckRecord::new(name, check.zero, check.worst_residual, witness)
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub subject: String,
    pub checks: Vec<CheckRecord>,
    pub overall: Status,
}

impl VerificationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        VerificationReport {
            schema: REPORT_SCHEMA.to_string(),
            subject: subject.into(),
            checks: Vec::new(),
            overall: Status::Pass,
        }
    }

    pub fn push(&mut self, check: CheckRecord) {
        if !check.passed() {
            self.overall = Status::Fail;
        }
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        for c in other.checks {
            self.push(c);
        }
    }

    pub fn passed(&self) -> bool {
        self.overall == Status::Pass
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} [schema {}]", self.subject, self.schema)?;
        for c in &self.checks {
            write!(
                f,
                "  {:<4}  {:<44} worst residual {:.3e}",
                c.status, c.name, c.worst_residual
            )?;
            if let Some(w) = &c.witness {
                if !c.passed() {
                    write!(f, "  witness: {w}")?;
                }
            }
            writeln!(f)?;
        }
        write!(f, "overall: {}", self.overall)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_fails_when_any_check_fails() {
        let mut r = VerificationReport::new("demo");
        r.push(CheckRecord::new("a", true, 0.0, None));
        assert!(r.passed());
        r.push(CheckRecord::new(
            "b",
            false,
            1.0,
            Some(Witness {
                trial: Some(0),
                index: vec![0, 1],
                point: Some(vec!["1".into(), "2".into()]),
            }),
        ));
        assert!(!r.passed());
        let text = r.to_string();
        assert!(text.contains("witness: trial 0, index [0, 1] at (1, 2)"));
        assert!(text.ends_with("overall: FAIL"));
    }

    #[test]
    fn json_shape() {
        let mut r = VerificationReport::new("demo");
        r.push(CheckRecord::new("a", true, 0.0, None));
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"schema\":\"v1\""));
        assert!(json.contains("\"status\":\"pass\""));
        assert!(!json.contains("witness"));
        let back: VerificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
