use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Stress,
    Speed,
    Converge,
    Price,
    Calibrate,
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Experiment::Stress => "stress",
            Experiment::Speed => "speed",
            Experiment::Converge => "converge",
            Experiment::Price => "price",
            Experiment::Calibrate => "calibrate",
        };
        f.write_str(name)
    }
}

/// A table of results plus the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub metadata: Map<String, Value>,
}

/// Keys whose values are wall-clock measurements.
const TIMING_KEYS: [&str; 4] = [
    "wall_time",
    "mean_time",
    "time_per_evaluation",
    "calibration_time",
];

impl ExperimentReport {
    pub fn new(experiment: Experiment, columns: &[&str]) -> Self {
        Self {
            experiment,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: Map::new(),
        }
    }

    /// Appends a row; panics if its width differs from the header.
    pub fn push_row(&mut self, row: Vec<Value>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the columns"
        );
        self.rows.push(row);
    }

    pub fn set_meta(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).expect("metadata serialises");
        self.metadata.insert(key.to_string(), value);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric cell by row and column name.
    pub fn number(&self, row: usize, column: &str) -> Option<f64> {
        self.rows.get(row)?.get(self.column(column)?)?.as_f64()
    }

    /// Copy with every timing column and metadata entry replaced by null,
    /// for run-to-run comparisons.
    pub fn without_timings(&self) -> Self {
        let mut out = self.clone();
        let timed: Vec<usize> = out
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| TIMING_KEYS.iter().any(|k| c.contains(k)))
            .map(|(i, _)| i)
            .collect();
        for row in &mut out.rows {
            for &i in &timed {
                row[i] = Value::Null;
            }
        }
        strip_timings(&mut out.metadata);
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Fixed-width text table followed by the metadata as `key: value`.
    pub fn to_table(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(render).collect())
            .collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|i| {
                cells
                    .iter()
                    .map(|r| r[i].len())
                    .chain([self.columns[i].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.experiment);
        let line = |out: &mut String, items: &[String]| {
            let padded: Vec<String> = items
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:>w$}"))
                .collect();
            let _ = writeln!(out, "{}", padded.join("  ").trim_end());
        };
        line(&mut out, &self.columns);
        for row in &cells {
            line(&mut out, row);
        }
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "{k}: {}", render(v));
        }
        out
    }

    /// JSON for `.json` paths, the text table otherwise.
    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        let body = if path.extension().is_some_and(|e| e == "json") {
            self.to_json()
        } else {
            self.to_table()
        };
        std::fs::write(path, body)
            .map_err(|e| HarnessError::Input(format!("cannot write {}: {e}", path.display())))
    }
}

fn strip_timings(map: &mut Map<String, Value>) {
    for (k, v) in map.iter_mut() {
        if TIMING_KEYS.iter().any(|t| k.contains(t)) {
            *v = Value::Null;
        } else {
            strip_value(v);
        }
    }
}

fn strip_value(v: &mut Value) {
    match v {
        Value::Object(m) => strip_timings(m),
        Value::Array(items) => items.iter_mut().for_each(strip_value),
        _ => {}
    }
}

fn render(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format_number(x),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

fn format_number(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if (1e-3..1e6).contains(&x.abs()) {
        format!("{x:.9}")
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    } else {
        format!("{x:.6e}")
    }
}
