//! Campaign verdicts and their text/CSV renderings.
//!
//! Everything here is deterministic: no timings, fixed float formatting,
//! and reports kept in the order the trials were generated.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The check's hypothesis does not apply to this trial.
    Skip,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Skip => "skip",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

/// Checks run on one trial (a scenario or a generated map) of one suite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub suite: String,
    pub trial: String,
    pub checks: Vec<CheckResult>,
    pub caveats: Vec<String>,
}

impl CampaignReport {
    pub fn new(suite: &str, trial: impl Into<String>) -> Self {
        CampaignReport {
            suite: suite.to_string(),
            trial: trial.into(),
            checks: Vec::new(),
            caveats: Vec::new(),
        }
    }

    pub fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) -> bool {
        self.push(name, if ok { Status::Pass } else { Status::Fail }, detail);
        ok
    }

    pub fn skip(&mut self, name: &str, reason: impl Into<String>) {
        self.push(name, Status::Skip, reason);
    }

    pub fn fail(&mut self, name: &str, detail: impl Into<String>) {
        self.push(name, Status::Fail, detail);
    }

    pub fn caveat(&mut self, text: &str) {
        if !self.caveats.iter().any(|c| c == text) {
            self.caveats.push(text.to_string());
        }
    }

    fn push(&mut self, name: &str, status: Status, detail: impl Into<String>) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            status,
            detail: detail.into(),
        });
    }

    pub fn count(&self, status: Status) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    /// Conjunctive: a single failed sub-check fails the trial.
    pub fn passed(&self) -> bool {
        self.count(Status::Fail) == 0
    }
}

/// Fixed-width scientific notation used in every report.
pub fn num(x: f64) -> String {
    format!("{x:.6e}")
}

pub fn all_passed(reports: &[CampaignReport]) -> bool {
    reports.iter().all(CampaignReport::passed)
}

/// One row per check: `suite, trial, check, status, detail`.
pub fn write_trials_csv<W: Write>(reports: &[CampaignReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["suite", "trial", "check", "status", "detail"])?;
    for r in reports {
        for c in &r.checks {
            w.write_record([&r.suite, &r.trial, &c.name, c.status.as_str(), &c.detail])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Human-readable summary table, one line per trial, then totals, caveats
/// and the details of every failed check.
pub fn summary_table(reports: &[CampaignReport]) -> String {
    let mut s = String::new();
    let trial_w = reports.iter().map(|r| r.trial.len()).max().unwrap_or(5).max(5);
    let _ = writeln!(
        s,
        "{:<7}  {:<trial_w$}  {:>6}  {:>4}  {:>4}  {:>4}  verdict",
        "suite", "trial", "checks", "pass", "fail", "skip"
    );
    let _ = writeln!(s, "{}", "-".repeat(trial_w + 45));
    for r in reports {
        let _ = writeln!(
            s,
            "{:<7}  {:<trial_w$}  {:>6}  {:>4}  {:>4}  {:>4}  {}",
            r.suite,
            r.trial,
            r.checks.len(),
            r.count(Status::Pass),
            r.count(Status::Fail),
            r.count(Status::Skip),
            if r.passed() { "PASS" } else { "FAIL" }
        );
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    let _ = writeln!(s, "{}", "-".repeat(trial_w + 45));
    let _ = writeln!(
        s,
        "trials: {}  passed: {}  failed: {}  overall: {}",
        reports.len(),
        reports.len() - failed,
        failed,
        if failed == 0 { "PASS" } else { "FAIL" }
    );
    let mut caveats: Vec<(&str, &str)> = Vec::new();
    for r in reports {
        for c in &r.caveats {
            if !caveats.iter().any(|(su, t)| *su == r.suite && t == c) {
                caveats.push((&r.suite, c));
            }
        }
    }
    if !caveats.is_empty() {
        let _ = writeln!(s, "\ncaveats:");
        for (suite, c) in caveats {
            let _ = writeln!(s, "  [{suite}] {c}");
        }
    }
    if failed > 0 {
        let _ = writeln!(s, "\nfailures:");
        for r in reports.iter().filter(|r| !r.passed()) {
            for c in r.checks.iter().filter(|c| c.status == Status::Fail) {
                let _ = writeln!(s, "  [{}] {} / {}: {}", r.suite, r.trial, c.name, c.detail);
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregation_is_conjunctive() {
        let mut r = CampaignReport::new("t32", "demo");
        r.check("a", true, "");
        r.skip("b", "n/a");
        assert!(r.passed());
        r.check("c", false, "lhs 2 > rhs 1");
        assert!(!r.passed());
        let table = summary_table(&[r]);
        assert!(table.contains("overall: FAIL"));
        assert!(table.contains("demo / c: lhs 2 > rhs 1"));
    }

    #[test]
    fn csv_has_one_row_per_check() {
        let mut r = CampaignReport::new("t34", "x");
        r.check("a", true, "d, with comma");
        r.skip("b", "");
        let mut buf = Vec::new();
        write_trials_csv(&[r], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }
}
