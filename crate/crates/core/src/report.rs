//! Pass/fail records produced by every check.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub point: [usize; 2],
    pub check: String,
    pub pass: bool,
    pub details: BTreeMap<String, Value>,
}

impl CheckRecord {
    pub fn new(point: (usize, usize), check: &str, pass: bool) -> CheckRecord {
        CheckRecord {
            point: [point.0, point.1],
            check: check.to_string(),
            pass,
            details: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> CheckRecord {
        self.details.insert(key.to_string(), value.into());
        self
    }
}

/// An ordered list of records. Merging concatenates, so merged reports
/// keep the order in which their parts were produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.records.push(record);
    }

    pub fn merge(&mut self, other: Report) {
        self.records.extend(other.records);
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.records.iter().filter(|r| !r.pass).collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of records and failures per check name.
    pub fn summary(&self) -> BTreeMap<String, (usize, usize)> {
        let mut out: BTreeMap<String, (usize, usize)> = BTreeMap::new();
        for r in &self.records {
            let e = out.entry(r.check.clone()).or_default();
            e.0 += 1;
            if !r.pass {
                e.1 += 1;
            }
        }
        out
    }
}

impl FromIterator<CheckRecord> for Report {
    fn from_iter<I: IntoIterator<Item = CheckRecord>>(iter: I) -> Report {
        Report { records: iter.into_iter().collect() }
    }
}

impl FromIterator<Report> for Report {
    fn from_iter<I: IntoIterator<Item = Report>>(iter: I) -> Report {
        let mut out = Report::new();
        for r in iter {
            out.merge(r);
        }
        out
    }
}
