//! Two-column CSV inputs: reference accuracy and custom path weights.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::CliError;

/// Top-1 accuracies shipped with the tool.
pub const SHIPPED_ACCURACY: &str = include_str!("../data/reference_accuracy.csv");

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRow {
    pub architecture: String,
    /// Value as written in the file.
    pub text: String,
    pub top1: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReferenceAccuracyTable {
    pub rows: Vec<AccuracyRow>,
}

impl ReferenceAccuracyTable {
    pub fn get(&self, architecture: &str) -> Option<&AccuracyRow> {
        self.rows.iter().find(|r| r.architecture == architecture)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Reads `header` rows of exactly two fields, yielding (line, a, b).
fn two_columns(
    text: &str,
    header: [&str; 2],
    what: &str,
) -> Result<Vec<(u64, String, String)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    let mut saw_header = false;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::input(format!("{what}: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if !saw_header {
            if record.len() != 2 || record[0] != *header[0] || record[1] != *header[1] {
                return Err(CliError::input(format!(
                    "{what}: line {line}: expected header '{},{}'",
                    header[0], header[1]
                )));
            }
            saw_header = true;
            continue;
        }
        if record.len() != 2 {
            return Err(CliError::input(format!(
                "{what}: line {line}: malformed row, expected 2 fields, got {}",
                record.len()
            )));
        }
        out.push((line, record[0].to_string(), record[1].to_string()));
    }
    Ok(out)
}

/// Parses `architecture,top1` CSV. An empty document is an empty table.
pub fn parse_reference_accuracy(text: &str) -> Result<ReferenceAccuracyTable, CliError> {
    const WHAT: &str = "accuracy table";
    let mut table = ReferenceAccuracyTable::default();
    for (line, name, value) in two_columns(text, ["architecture", "top1"], WHAT)? {
        if name.is_empty() {
            return Err(CliError::input(format!(
                "{WHAT}: line {line}: malformed row, empty architecture"
            )));
        }
        let top1: f64 = value.parse().map_err(|_| {
            CliError::input(format!(
                "{WHAT}: line {line}: malformed row, top1 '{value}' is not a number"
            ))
        })?;
        if !(0.0..=100.0).contains(&top1) {
            return Err(CliError::input(format!(
                "{WHAT}: line {line}: top1 {value} out of range [0, 100]"
            )));
        }
        if table.get(&name).is_some() {
            return Err(CliError::input(format!(
                "{WHAT}: line {line}: duplicate architecture {name}"
            )));
        }
        table.rows.push(AccuracyRow {
            architecture: name,
            text: value,
            top1,
        });
    }
    Ok(table)
}

pub fn load_reference_accuracy(path: &Path) -> Result<ReferenceAccuracyTable, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    parse_reference_accuracy(&text)
}

/// Parses `length,weight` CSV into per-length path weights.
pub fn parse_weights(text: &str) -> Result<BTreeMap<u64, f64>, CliError> {
    const WHAT: &str = "weights";
    let mut weights = BTreeMap::new();
    for (line, len, value) in two_columns(text, ["length", "weight"], WHAT)? {
        let len: u64 = len.parse().map_err(|_| {
            CliError::input(format!(
                "{WHAT}: line {line}: length '{len}' is not a non-negative integer"
            ))
        })?;
        let w: f64 = value.parse().map_err(|_| {
            CliError::input(format!(
                "{WHAT}: line {line}: weight '{value}' is not a number"
            ))
        })?;
        if !(w.is_finite() && w >= 0.0) {
            return Err(CliError::input(format!(
                "{WHAT}: line {line}: weight {value} must be finite and >= 0"
            )));
        }
        if weights.insert(len, w).is_some() {
            return Err(CliError::input(format!(
                "{WHAT}: line {line}: duplicate length {len}"
            )));
        }
    }
    Ok(weights)
}

pub fn load_weights(path: &Path) -> Result<BTreeMap<u64, f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    parse_weights(&text)
}
