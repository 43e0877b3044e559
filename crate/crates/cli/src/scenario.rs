//! `key = value` scenario files.

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub command: String,
    /// Keys normalised to kebab case, in file order.
    pub entries: Vec<(String, String)>,
}

fn normalise(key: &str) -> String {
    key.trim().replace('_', "-")
}

fn unquote(v: &str) -> &str {
    let v = v.trim();
    if v.len() >= 2 && ((v.starts_with('"') && v.ends_with('"')) || (v.starts_with('\'') && v.ends_with('\''))) {
        &v[1..v.len() - 1]
    } else {
        v
    }
}

/// Parses a scenario. `#` starts a comment outside quotes; blank lines are
/// ignored; `command` is mandatory and each key may appear once.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let mut command = None;
    let mut entries: Vec<(String, String)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("scenario line {}: expected `key = value`", no + 1)))?;
        let key = normalise(key);
        let value = unquote(value).to_string();
        if key.is_empty() {
            return Err(CliError::Usage(format!("scenario line {}: empty key", no + 1)));
        }
        if key == "command" {
            if command.replace(value).is_some() {
                return Err(CliError::Usage(format!("scenario line {}: duplicate key command", no + 1)));
            }
            continue;
        }
        if entries.iter().any(|(k, _)| *k == key) {
            return Err(CliError::Usage(format!("scenario line {}: duplicate key {key}", no + 1)));
        }
        entries.push((key, value));
    }
    let command = command.ok_or_else(|| CliError::Usage("scenario has no `command` key".into()))?;
    Ok(Scenario { command, entries })
}

fn strip_comment(line: &str) -> &str {
    let mut quote = None;
    for (i, c) in line.char_indices() {
        match (c, quote) {
            ('"' | '\'', None) => quote = Some(c),
            (c, Some(q)) if c == q => quote = None,
            ('#', None) => return &line[..i],
            _ => {}
        }
    }
    line
}

impl Scenario {
    /// Argument vector equivalent to the scenario, with `overrides` (flag
    /// form) replacing file entries of the same key.
    pub fn to_args(&self, program: &str, overrides: &[String]) -> Vec<String> {
        let overridden: Vec<String> = overrides
            .iter()
            .filter_map(|a| a.strip_prefix("--"))
            .map(|a| normalise(a.split('=').next().unwrap_or(a)))
            .collect();
        let mut args = vec![program.to_string(), self.command.clone()];
        for (k, v) in &self.entries {
            if !overridden.contains(k) {
                args.push(format!("--{k}={v}"));
            }
        }
        args.extend(overrides.iter().cloned());
        args
    }
}
