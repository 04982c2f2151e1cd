//! The acceptance dashboard.

use std::fmt::Write as _;
use std::path::Path;

use crate::acceptance::AcceptanceReport;
use crate::error::{HarnessError, Result};
use crate::manifest::{RunManifest, MANIFEST_FILE};

pub const ACCEPTANCE_FILE: &str = "acceptance.json";

/// Loads the acceptance results of a `check` run from `dir`.
pub fn load(dir: &Path) -> Result<AcceptanceReport> {
    let entries: Vec<_> = match std::fs::read_dir(dir) {
        Ok(rd) => rd.filter_map(|e| e.ok()).collect(),
        Err(_) => Vec::new(),
    };
    if entries.is_empty() {
        return Err(HarnessError::NoResults(dir.display().to_string()));
    }
    let mut missing = Vec::new();
    let manifest_path = dir.join(MANIFEST_FILE);
    if manifest_path.exists() {
        for f in RunManifest::read(&manifest_path)?.outputs {
            if !dir.join(&f.name).exists() {
                missing.push(f.name);
            }
        }
    }
    let path = dir.join(ACCEPTANCE_FILE);
    if !path.exists() {
        missing.push(ACCEPTANCE_FILE.to_string());
    }
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(HarnessError::MissingInputs { dir: dir.display().to_string(), files: missing });
    }
    let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

pub fn render(r: &AcceptanceReport) -> String {
    let mut s = String::new();
    for c in &r.criteria {
        let _ = writeln!(s, "{}", c.line());
    }
    let passed = r.criteria.iter().filter(|c| c.passed).count();
    let _ = writeln!(s, "{passed}/{} criteria passed", r.criteria.len());
    s
}
