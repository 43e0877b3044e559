//! Matrices, vectors and per-node demand tables.

use std::path::Path;

use ecodyn_core::leontief::TechMatrix;

use crate::emit::read_text;
use crate::CliError;

pub fn parse_number(key: &str, text: &str) -> Result<f64, CliError> {
    let v: f64 = text.trim().parse().map_err(|_| CliError::Usage(format!("{key}: `{}` is not a number", text.trim())))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{key}: value must be finite")))
    }
}

/// Comma-separated numbers.
pub fn parse_list(key: &str, text: &str) -> Result<Vec<f64>, CliError> {
    if text.trim().is_empty() {
        return Err(CliError::Usage(format!("{key}: empty list")));
    }
    text.split(',').map(|s| parse_number(key, s)).collect()
}

fn records(key: &str, text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let body: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty())
        .map(|l| format!("{l}\n"))
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Usage(format!("{key}: {e}")))?;
        rows.push(rec.iter().map(|f| parse_number(key, f)).collect::<Result<Vec<_>, _>>()?);
    }
    Ok(rows)
}

/// First record holds `n`, followed by `n` rows of `n` coefficients.
pub fn read_matrix(path: &Path) -> Result<TechMatrix, CliError> {
    let key = "matrix";
    let rows = records(key, &read_text(path)?)?;
    let (head, body) = rows.split_first().ok_or_else(|| CliError::Usage(format!("{key}: {} is empty", path.display())))?;
    let n = match head.as_slice() {
        [n] if *n >= 1.0 && n.fract() == 0.0 => *n as usize,
        _ => return Err(CliError::Usage(format!("{key}: first line must hold the dimension n"))),
    };
    if body.len() != n || body.iter().any(|r| r.len() != n) {
        return Err(CliError::Usage(format!("{key}: expected {n} rows of {n} coefficients")));
    }
    TechMatrix::from_rows(body).map_err(|e| CliError::Usage(format!("{key}: {e}")))
}

/// One row of `n` values per grid node.
pub fn read_demand_table(path: &Path, n: usize, nodes: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let key = "demand-file";
    let rows = records(key, &read_text(path)?)?;
    if rows.len() != nodes || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Usage(format!(
            "{key}: expected {nodes} rows (one per grid node) of {n} values, found {} rows",
            rows.len()
        )));
    }
    Ok(rows)
}
