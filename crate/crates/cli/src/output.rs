//! CSV tables and the JSON summary.

use std::fs;
use std::path::Path;

use floquet_coe::{Histogram, ReferenceDensity};
use serde_json::{Map, Value};

use crate::error::CliError;

/// Floats are written with 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// File name without the `.csv` extension.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Appends one row per bin: `prefix.., bin_lo, bin_hi, count, density`
/// followed by each reference's mean density over the bin.
pub fn push_histogram(table: &mut Table, prefix: &[String], hist: &Histogram, refs: &[&ReferenceDensity]) {
    let density = hist.density();
    for (k, w) in hist.edges().windows(2).enumerate() {
        let mut row = prefix.to_vec();
        row.extend([real(w[0]), real(w[1]), hist.counts()[k].to_string(), real(density[k])]);
        for r in refs {
            row.push(real(r.mass(w[0], w[1]) / (w[1] - w[0])));
        }
        table.push(row);
    }
}

/// Rebuilds every object with its keys in ascending order.
pub fn sort_keys(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, sort_keys(v));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifacts {
    pub tables: Vec<Table>,
    pub summary: Value,
}

impl Artifacts {
    pub fn summary_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&sort_keys(self.summary.clone()))
            .expect("summary is plain JSON");
        text.push('\n');
        text
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Writes `summary.json` and one CSV per table into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let io = |path: &Path, source| CliError::Io {
            path: path.to_path_buf(),
            source,
        };
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        for t in &self.tables {
            let path = dir.join(t.file_name());
            fs::write(&path, t.to_csv()).map_err(|e| io(&path, e))?;
        }
        let path = dir.join("summary.json");
        fs::write(&path, self.summary_json()).map_err(|e| io(&path, e))
    }
}
