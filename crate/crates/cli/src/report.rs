//! JSON run summary.

use crate::CliError;
use serde::Serialize;
use serde_json::Value;
use std::path::Path;

/// One numeric assertion: `value` compared against `threshold`.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value < threshold`.
    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value < threshold }
    }

    /// Passes when `value > threshold`.
    pub fn above(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value > threshold }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value >= threshold }
    }

    /// Passes when `|value − target| < tol`; `threshold` records `tol`.
    pub fn near(name: &str, value: f64, target: f64, tol: f64) -> Self {
        Self { name: name.into(), value, threshold: tol, pass: (value - target).abs() < tol }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Self { name: name.into(), value: f64::from(u8::from(ok)), threshold: 1.0, pass: ok }
    }
}

/// Checks grouped under one acceptance criterion id.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl CriterionResult {
    pub fn new(id: u32, title: &str, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self { id, title: title.into(), pass, checks }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub seed: Option<u64>,
    pub pass: bool,
    pub criteria: Vec<CriterionResult>,
    pub files: Vec<String>,
    pub results: Value,
}

impl Summary {
    pub fn new(experiment: &str, seed: Option<u64>, criteria: Vec<CriterionResult>, files: Vec<String>, results: Value) -> Self {
        let pass = criteria.iter().all(|c| c.pass);
        Self { experiment: experiment.into(), seed, pass, criteria, files, results }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_json(path, self)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}
