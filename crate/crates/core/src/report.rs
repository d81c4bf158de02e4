//! Per-point residual records and suite summaries.

use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        })
    }
}

/// One comparison at one grid point.
///
/// `rel_residual = abs_residual / max(|lhs|, |rhs|, scale)`. The floor
/// `scale` is 0 for ordinary identities, 1 where both sides vanish, and the
/// largest summand for sums prone to cancellation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub suite: String,
    pub check: String,
    pub point: BTreeMap<String, f64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub abs_residual: Option<f64>,
    pub rel_residual: Option<f64>,
    pub scale: f64,
    pub tolerance: f64,
    pub status: Status,
    pub note: Option<String>,
}

pub type Point = BTreeMap<String, f64>;

pub fn point(pairs: &[(&str, f64)]) -> Point {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

impl CheckRecord {
    pub fn compare(
        suite: &str,
        check: &str,
        point: Point,
        lhs: f64,
        rhs: f64,
        scale: f64,
        tol: f64,
    ) -> Self {
        let abs = (lhs - rhs).abs();
        let denom = lhs.abs().max(rhs.abs()).max(scale);
        let rel = if abs == 0.0 { 0.0 } else { abs / denom };
        let ok = rel.is_finite() && rel < tol;
        CheckRecord {
            suite: suite.into(),
            check: check.into(),
            point,
            lhs: Some(lhs),
            rhs: Some(rhs),
            abs_residual: Some(abs),
            rel_residual: Some(rel),
            scale,
            tolerance: tol,
            status: if ok { Status::Pass } else { Status::Fail },
            note: None,
        }
    }

    /// A yes/no property such as monotone shrinkage, recorded as residual 0 or 1.
    pub fn flag(
        suite: &str,
        check: &str,
        point: Point,
        holds: bool,
        tol: f64,
        note: Option<String>,
    ) -> Self {
        let mut r = Self::compare(
            suite,
            check,
            point,
            1.0,
            if holds { 1.0 } else { 0.0 },
            1.0,
            tol,
        );
        r.note = note;
        r
    }

    fn without_values(
        suite: &str,
        check: &str,
        point: Point,
        tol: f64,
        status: Status,
        note: String,
    ) -> Self {
        CheckRecord {
            suite: suite.into(),
            check: check.into(),
            point,
            lhs: None,
            rhs: None,
            abs_residual: None,
            rel_residual: None,
            scale: 0.0,
            tolerance: tol,
            status,
            note: Some(note),
        }
    }

    pub fn skipped(
        suite: &str,
        check: &str,
        point: Point,
        tol: f64,
        why: impl Into<String>,
    ) -> Self {
        Self::without_values(suite, check, point, tol, Status::Skipped, why.into())
    }

    pub fn failed(
        suite: &str,
        check: &str,
        point: Point,
        tol: f64,
        why: impl Into<String>,
    ) -> Self {
        Self::without_values(suite, check, point, tol, Status::Fail, why.into())
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub max_rel_residual: f64,
}

impl Summary {
    pub fn of(records: &[CheckRecord]) -> Self {
        let mut s = Summary {
            total: records.len(),
            ..Default::default()
        };
        for r in records {
            match r.status {
                Status::Pass => s.passed += 1,
                Status::Fail => s.failed += 1,
                Status::Skipped => s.skipped += 1,
            }
            if let Some(rel) = r.rel_residual {
                if r.status != Status::Skipped {
                    s.max_rel_residual = s.max_rel_residual.max(rel);
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub suite: String,
    pub summary: Summary,
    pub records: Vec<CheckRecord>,
}

impl IdentityReport {
    pub fn new(suite: &str, records: Vec<CheckRecord>) -> Self {
        IdentityReport {
            suite: suite.into(),
            summary: Summary::of(&records),
            records,
        }
    }

    /// True iff no non-skipped record failed.
    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn count(&self, status: Status) -> usize {
        self.records.iter().filter(|r| r.status == status).count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| r.status == Status::Fail)
    }
}

/// Several suites run together.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub suite: String,
    pub summary: Summary,
    pub suites: Vec<IdentityReport>,
}

impl AggregateReport {
    pub fn new(suites: Vec<IdentityReport>) -> Self {
        let mut summary = Summary::default();
        for r in &suites {
            summary.total += r.summary.total;
            summary.passed += r.summary.passed;
            summary.failed += r.summary.failed;
            summary.skipped += r.summary.skipped;
            summary.max_rel_residual = summary.max_rel_residual.max(r.summary.max_rel_residual);
        }
        AggregateReport {
            suite: "all".into(),
            summary,
            suites,
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn records(&self) -> impl Iterator<Item = &CheckRecord> {
        self.suites.iter().flat_map(|s| s.records.iter())
    }
}
