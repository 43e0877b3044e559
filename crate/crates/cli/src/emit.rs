use std::fs;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use ecodyn_core::Trajectory;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` selects JSON, anything else CSV.
    pub fn infer(path: Option<&Path>) -> Format {
        match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// Numeric columns sharing an index column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub index: String,
    pub index_values: Vec<f64>,
    pub labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn from_trajectory(traj: &Trajectory) -> Table {
        Table {
            index: "t".into(),
            index_values: traj.times(),
            labels: traj.labels().to_vec(),
            rows: traj.rows().to_vec(),
        }
    }

    pub fn from_columns(index: &str, index_values: Vec<f64>, columns: Vec<(String, Vec<f64>)>) -> Table {
        let labels = columns.iter().map(|(l, _)| l.clone()).collect();
        let rows = (0..index_values.len()).map(|k| columns.iter().map(|(_, c)| c[k]).collect()).collect();
        Table { index: index.into(), index_values, labels, rows }
    }

    fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

/// Everything a command produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub command: String,
    pub params: Value,
    pub table: Option<Table>,
    pub report: Map<String, Value>,
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && v.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn render_scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.as_f64().map(format_number).unwrap_or_else(|| n.to_string()),
        other => other.to_string(),
    }
}

impl Output {
    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(format!("csv: {e}"));
        match &self.table {
            Some(t) => {
                let mut header = vec![t.index.clone()];
                header.extend(t.labels.iter().cloned());
                w.write_record(&header).map_err(io)?;
                for (x, row) in t.index_values.iter().zip(&t.rows) {
                    let mut rec = vec![format_number(*x)];
                    rec.extend(row.iter().map(|v| format_number(*v)));
                    w.write_record(&rec).map_err(io)?;
                }
            }
            None => {
                w.write_record(["key", "value"]).map_err(io)?;
                for (k, v) in &self.report {
                    w.write_record([k.as_str(), &render_scalar(v)]).map_err(io)?;
                }
            }
        }
        w.into_inner().map_err(|e| CliError::Io(format!("csv: {e}")))
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut data = Map::new();
        if let Some(t) = &self.table {
            data.insert(t.index.clone(), json!(t.index_values));
            for (j, label) in t.labels.iter().enumerate() {
                data.insert(label.clone(), json!(t.column(j)));
            }
        }
        let doc = json!({
            "meta": {
                "command": self.command,
                "params": self.params,
                "version": env!("CARGO_PKG_VERSION"),
            },
            "data": data,
            "report": self.report,
        });
        let mut bytes = serde_json::to_vec_pretty(&doc).expect("JSON values always serialize");
        bytes.push(b'\n');
        bytes
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(self.to_json()),
        }
    }

    /// One `key: value` line per scalar report entry.
    pub fn summary(&self) -> String {
        let mut s = format!("{}\n", self.command);
        for (k, v) in &self.report {
            if !matches!(v, Value::Array(_) | Value::Object(_)) {
                s.push_str(&format!("  {k}: {}\n", render_scalar(v)));
            }
        }
        s
    }
}

/// Writes to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let ctx = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    if !dir.is_dir() {
        return Err(CliError::Io(format!("{}: directory {} does not exist", path.display(), dir.display())));
    }
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(ctx)?;
    tmp.write_all(bytes).map_err(ctx)?;
    tmp.as_file().sync_all().map_err(ctx)?;
    tmp.persist(path).map_err(|e| ctx(e.error))?;
    Ok(())
}

/// Reads a whole UTF-8 file with the path in any error.
pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}
