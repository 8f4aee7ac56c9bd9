//! Report types shared by the axiom, nonexpansiveness, trace-inequality and
//! rate checks. Failures are data: every violated check keeps the first
//! witness that broke it.

use alloc::string::String;
use alloc::vec::Vec;

use crate::Nat;

/// Evidence for a failed check: the offending quantity `lhs` exceeded
/// `rhs` (plus tolerance), or an equality missed.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Witness {
    /// Iteration index, when the check runs along a trace.
    pub n: Option<u64>,
    pub lhs: f64,
    pub rhs: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NamedCheck {
    pub name: String,
    pub checked: u64,
    pub failures: u64,
    pub witness: Option<Witness>,
}

impl NamedCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Outcome of a family of sampled or trace-wide checks.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckReport {
    pub subject: String,
    pub seed: Option<u64>,
    pub samples: u64,
    pub tol: f64,
    pub checks: Vec<NamedCheck>,
}

pub type AxiomReport = CheckReport;
pub type InequalityReport = CheckReport;

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(NamedCheck::passed)
    }

    pub fn check(&self, name: &str) -> Option<&NamedCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &NamedCheck> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

/// Accumulates named checks, keeping the first witness per name.
pub(crate) struct Recorder {
    report: CheckReport,
}

impl Recorder {
    pub fn new(subject: String, seed: Option<u64>, tol: f64, names: &[&str]) -> Self {
        let checks = names
            .iter()
            .map(|n| NamedCheck {
                name: (*n).into(),
                checked: 0,
                failures: 0,
                witness: None,
            })
            .collect();
        Recorder {
            report: CheckReport {
                subject,
                seed,
                samples: 0,
                tol,
                checks,
            },
        }
    }

    fn slot(&mut self, name: &str) -> &mut NamedCheck {
        let idx = match self.report.checks.iter().position(|c| c.name == name) {
            Some(i) => i,
            None => {
                self.report.checks.push(NamedCheck {
                    name: name.into(),
                    checked: 0,
                    failures: 0,
                    witness: None,
                });
                self.report.checks.len() - 1
            }
        };
        &mut self.report.checks[idx]
    }

    pub fn record(&mut self, name: &str, ok: bool, witness: impl FnOnce() -> Witness) {
        let slot = self.slot(name);
        slot.checked += 1;
        if !ok {
            slot.failures += 1;
            if slot.witness.is_none() {
                slot.witness = Some(witness());
            }
        }
    }

    /// `lhs ≤ rhs + tol`; NaN never passes.
    pub fn le(
        &mut self,
        name: &str,
        n: Option<u64>,
        lhs: f64,
        rhs: f64,
        detail: impl FnOnce() -> String,
    ) {
        let tol = self.report.tol;
        self.record(name, lhs <= rhs + tol, || Witness {
            n,
            lhs,
            rhs,
            detail: detail(),
        });
    }

    /// `|lhs - rhs| ≤ tol`.
    pub fn eq(
        &mut self,
        name: &str,
        n: Option<u64>,
        lhs: f64,
        rhs: f64,
        detail: impl FnOnce() -> String,
    ) {
        let tol = self.report.tol;
        self.record(name, libm::fabs(lhs - rhs) <= tol, || Witness {
            n,
            lhs,
            rhs,
            detail: detail(),
        });
    }

    pub fn fail(&mut self, name: &str, n: Option<u64>, detail: String) {
        self.record(name, false, || Witness {
            n,
            lhs: f64::NAN,
            rhs: f64::NAN,
            detail,
        });
    }

    pub fn set_samples(&mut self, samples: u64) {
        self.report.samples = samples;
    }

    pub fn finish(self) -> CheckReport {
        self.report
    }
}

/// Per-`k` outcome of a rate certification.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "status", rename_all = "snake_case")
)]
pub enum Status {
    Verified,
    /// `value` exceeded `bound` at index `n` (or, for exact identities,
    /// the two sides disagreed).
    Violated {
        n: Option<u64>,
        value: f64,
        bound: f64,
        note: Option<String>,
    },
    /// The rate points past the available trace or budget.
    SkippedBudget,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateEntry {
    pub k: u64,
    /// `None` when the rate itself could not be represented.
    pub rate: Option<Nat>,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub status: Status,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Summary {
    pub verified: u64,
    pub violated: u64,
    pub skipped_budget: u64,
    pub precondition_failures: u64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerifyReport {
    pub claim: String,
    pub k_max: u64,
    pub budget: u64,
    pub tol: f64,
    pub seed: Option<u64>,
    /// Hypotheses of the certified statement that failed their own
    /// brute-force validation. Distinct from rate violations.
    pub preconditions: Vec<String>,
    pub entries: Vec<RateEntry>,
    pub summary: Summary,
}

impl VerifyReport {
    pub fn new(claim: impl Into<String>, k_max: u64, budget: u64, tol: f64) -> Self {
        VerifyReport {
            claim: claim.into(),
            k_max,
            budget,
            tol,
            seed: None,
            preconditions: Vec::new(),
            entries: Vec::new(),
            summary: Summary::default(),
        }
    }

    pub fn push(&mut self, k: u64, rate: Option<Nat>, status: Status) {
        match status {
            Status::Verified => self.summary.verified += 1,
            Status::Violated { .. } => self.summary.violated += 1,
            Status::SkippedBudget => self.summary.skipped_budget += 1,
        }
        self.entries.push(RateEntry { k, rate, status });
    }

    pub fn precondition_failed(&mut self, what: String) {
        self.summary.precondition_failures += 1;
        self.preconditions.push(what);
    }

    /// No violations and every hypothesis held.
    pub fn passed(&self) -> bool {
        self.summary.violated == 0 && self.summary.precondition_failures == 0
    }

    pub fn first_violation(&self) -> Option<&RateEntry> {
        self.entries
            .iter()
            .find(|e| matches!(e.status, Status::Violated { .. }))
    }

    pub fn status_at(&self, k: u64) -> Option<&Status> {
        self.entries.iter().find(|e| e.k == k).map(|e| &e.status)
    }
}
