//! The machine-readable verification report.

use serde::{Deserialize, Serialize};

/// One check. For residual checks `pass` is `value <= tol`; lower-bound
/// checks (singular-value gaps, convergence orders) pass when `value >= tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    /// The statement the check verifies.
    pub paper_ref: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Record {
    pub fn residual(name: impl Into<String>, statement: &str, value: f64, tol: f64) -> Self {
        Self { name: name.into(), paper_ref: statement.into(), value, tol, pass: value <= tol }
    }

    pub fn at_least(name: impl Into<String>, statement: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), paper_ref: statement.into(), value, tol: bound, pass: value >= bound }
    }

    /// Integer equality recorded as `|observed - expected| <= 0`.
    pub fn equal(name: impl Into<String>, statement: &str, observed: usize, expected: usize) -> Self {
        Self::residual(name, statement, observed.abs_diff(expected) as f64, 0.0)
    }

    /// A computation that failed outright: recorded as an infinite residual.
    pub fn failed(name: impl Into<String>, statement: &str, error: &dyn std::fmt::Display) -> Self {
        Self { name: format!("{} ({error})", name.into()), paper_ref: statement.into(), value: f64::INFINITY, tol: 0.0, pass: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Report {
    pub records: Vec<Record>,
    pub summary: Summary,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, r: Record) {
        self.summary.total += 1;
        if r.pass {
            self.summary.passed += 1;
        } else {
            self.summary.failed += 1;
        }
        self.records.push(r);
    }

    pub fn extend(&mut self, rs: impl IntoIterator<Item = Record>) {
        for r in rs {
            self.push(r);
        }
    }

    pub fn merge(&mut self, other: Report) {
        self.extend(other.records);
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    /// Largest value among the records whose name starts with `prefix`.
    pub fn worst(&self, prefix: &str) -> Option<f64> {
        self.records.iter().filter(|r| r.name.starts_with(prefix)).map(|r| r.value).reduce(f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }
}

impl FromIterator<Record> for Report {
    fn from_iter<I: IntoIterator<Item = Record>>(iter: I) -> Self {
        let mut r = Report::new();
        r.extend(iter);
        r
    }
}
