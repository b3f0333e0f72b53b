//! Report sets and their canonical serialisation.
//!
//! Canonical JSON has sorted object keys, two-space indentation and every
//! real rendered with 12 significant digits (`1.46265174591e0`). Integers
//! stay integers. Non-finite reals become `null`. Nothing time- or
//! host-dependent is written, so equal inputs give equal bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::SweepConfig;
use crate::classcheck::Violation;
use crate::error::{Error, Result};
use crate::theorems::{Status, TheoremReport};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Number of chain columns in the CSV; the longest chain has six members.
pub const CSV_CHAIN_COLUMNS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// One entry per status, zero included.
    pub counts: BTreeMap<Status, usize>,
    pub total: usize,
    /// Over graded (pass or fail) reports only.
    pub min_slack: Option<f64>,
}

impl Summary {
    pub fn of(reports: &[TheoremReport]) -> Self {
        let mut counts: BTreeMap<Status, usize> = Status::ALL.iter().map(|s| (*s, 0)).collect();
        for r in reports {
            *counts.entry(r.status).or_default() += 1;
        }
        let min_slack = reports
            .iter()
            .filter(|r| matches!(r.status, Status::Pass | Status::Fail))
            .filter_map(|r| r.min_slack)
            .reduce(f64::min);
        Summary { counts, total: reports.len(), min_slack }
    }

    pub fn count(&self, status: Status) -> usize {
        self.counts.get(&status).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSet {
    pub version: String,
    pub config: Option<SweepConfig>,
    pub reports: Vec<TheoremReport>,
    pub violations: Vec<Violation>,
    pub summary: Summary,
}

impl ReportSet {
    pub fn new(config: Option<SweepConfig>, reports: Vec<TheoremReport>) -> Self {
        let violations = reports
            .iter()
            .flat_map(|r| r.gate.violations().into_iter().cloned())
            .collect();
        let summary = Summary::of(&reports);
        ReportSet { version: VERSION.to_string(), config, reports, violations, summary }
    }

    pub fn to_json(&self) -> Result<String> {
        to_canonical_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Io(format!("report JSON: {e}")))
    }

    pub fn to_csv(&self) -> Result<String> {
        reports_csv(&self.reports)
    }
}

/// Real rendering shared by JSON and CSV.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        // one spelling for both zeros
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Io(format!("serialise: {e}")))?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_u64() {
                let _ = write!(out, "{i}");
            } else if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else {
                out.push_str(&fmt_real(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, item, indent + 2);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            // serde_json's default map is a BTreeMap, so keys arrive sorted
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, indent + 2);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = ["theorem", "function", "function2", "a", "b", "s", "p", "q", "alpha"]
        .map(String::from)
        .to_vec();
    h.extend((1..=CSV_CHAIN_COLUMNS).map(|i| format!("chain_{i}")));
    h.extend(["min_slack".to_string(), "status".to_string()]);
    h
}

pub fn csv_row(r: &TheoremReport) -> Vec<String> {
    let opt = |x: Option<f64>| x.map(fmt_real).unwrap_or_default();
    let mut row = vec![
        r.theorem.to_string(),
        r.functions.first().map(|f| f.to_string()).unwrap_or_default(),
        r.functions.get(1).map(|f| f.to_string()).unwrap_or_default(),
        fmt_real(r.params.a()),
        fmt_real(r.params.b()),
        fmt_real(r.params.s),
        opt(r.params.p),
        opt(r.params.q),
        opt(r.params.alpha),
    ];
    row.extend((0..CSV_CHAIN_COLUMNS).map(|i| r.chain.get(i).map(|c| fmt_real(c.value)).unwrap_or_default()));
    row.push(opt(r.min_slack));
    row.push(r.status.to_string());
    row
}

pub fn reports_csv(reports: &[TheoremReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(format!("csv: {e}"));
    w.write_record(csv_header()).map_err(csv_err)?;
    for r in reports {
        w.write_record(csv_row(r)).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(format!("csv: {e}")))
}
