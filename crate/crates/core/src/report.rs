//! Check rows and their CSV/JSON serialization.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// An inequality or identity that must hold up to `threshold`; `value`
    /// is the largest violation.
    Exact,
    /// A measured constant compared against a cap.
    Ratio,
    /// A fitted exponent compared against its ceiling.
    Fit,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Exact => "exact",
            CheckKind::Ratio => "ratio",
            CheckKind::Fit => "fit",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub scenario: String,
    pub check: String,
    pub kind: CheckKind,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Probe set, witness or other provenance of the value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRow {
    /// `value <= threshold`.
    pub fn at_most(scenario: &str, check: &str, kind: CheckKind, value: f64, threshold: f64) -> Self {
        CheckRow {
            scenario: scenario.to_string(),
            check: check.to_string(),
            kind,
            value,
            threshold,
            pass: value <= threshold,
            note: None,
        }
    }

    /// `value >= threshold`.
    pub fn at_least(scenario: &str, check: &str, kind: CheckKind, value: f64, threshold: f64) -> Self {
        CheckRow {
            pass: value >= threshold,
            ..CheckRow::at_most(scenario, check, kind, value, threshold)
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Relative excess of `lhs` over `rhs`: zero when `lhs <= rhs`.
pub fn excess(lhs: f64, rhs: f64) -> f64 {
    if lhs <= rhs {
        0.0
    } else if rhs.abs() > 0.0 {
        (lhs - rhs) / rhs.abs()
    } else {
        f64::INFINITY
    }
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero for `a = b`.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<CheckRow>,
    /// Per-scenario measurements and witnesses, keyed by scenario id.
    #[serde(default)]
    pub scenarios: Vec<ScenarioRecord>,
    /// Wall-clock seconds; excluded from reproducibility comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub id: String,
    pub details: serde_json::Value,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn extend(&mut self, other: Report) {
        self.rows.extend(other.rows);
        self.scenarios.extend(other.scenarios);
        self.runtime_seconds = match (self.runtime_seconds, other.runtime_seconds) {
            (Some(a), Some(b)) => Some(a + b),
            (a, b) => a.or(b),
        };
    }

    /// Stable order: by scenario, then row order within a scenario.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| a.scenario.cmp(&b.scenario));
        self.scenarios.sort_by(|a, b| a.id.cmp(&b.id));
    }

    /// Writes `scenario,check,kind,value,threshold,pass`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scenario", "check", "kind", "value", "threshold", "pass"])?;
        for r in &self.rows {
            w.write_record([
                r.scenario.as_str(),
                r.check.as_str(),
                r.kind.name(),
                &format_value(r.value),
                &format_value(r.threshold),
                if r.pass { "true" } else { "false" },
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_csv(std::fs::File::create(dir.join("report.csv"))?)?;
        std::fs::write(dir.join("report.json"), self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_columns() {
        let mut r = Report::default();
        r.rows.push(CheckRow::at_most("s1", "c", CheckKind::Exact, 0.0, 1e-12));
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "scenario,check,kind,value,threshold,pass\ns1,c,exact,0e0,1e-12,true\n");
    }

    #[test]
    fn excess_and_diff() {
        assert_eq!(excess(1.0, 2.0), 0.0);
        assert_eq!(excess(3.0, 2.0), 0.5);
        assert_eq!(excess(1.0, 0.0), f64::INFINITY);
        assert_eq!(rel_diff(2.0, 2.0), 0.0);
        assert_eq!(rel_diff(1.0, 2.0), 0.5);
    }
}
