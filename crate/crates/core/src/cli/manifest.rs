//! Output bookkeeping and the run manifest.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Must hold for every input; a failure is a numerical error.
    Invariant,
    /// Expected behavior of a trivial (or topological) model; reported only.
    Claim,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub kind: CheckKind,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Default, Clone)]
pub struct Checks {
    records: Vec<CheckRecord>,
}

impl Checks {
    pub fn invariant(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.push(name, CheckKind::Invariant, passed, detail.into());
    }

    pub fn claim(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.push(name, CheckKind::Claim, passed, detail.into());
    }

    fn push(&mut self, name: &str, kind: CheckKind, passed: bool, detail: String) {
        if !passed {
            log::warn!("check {name} failed: {detail}");
        }
        self.records.push(CheckRecord {
            name: name.to_string(),
            kind,
            passed,
            detail,
        });
    }

    pub fn records(&self) -> &[CheckRecord] {
        &self.records
    }

    /// Names of failed invariants.
    pub fn failures(&self) -> Vec<String> {
        self.records
            .iter()
            .filter(|r| r.kind == CheckKind::Invariant && !r.passed)
            .map(|r| r.name.clone())
            .collect()
    }
}

/// Files written by one command, in order.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Path for a new artifact, recorded for the manifest.
    pub fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(PathBuf::from(name));
        p
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| LabError::io(&path, e))
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub path: PathBuf,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub started_at: f64,
    pub finished_at: f64,
    pub outputs: Vec<OutputEntry>,
    pub checks: Vec<CheckRecord>,
    pub failures: Vec<String>,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl RunManifest {
    /// Collects output sizes; a missing or empty artifact is an error.
    pub fn finish(
        command: &str,
        config_hash: String,
        started_at: f64,
        outputs: &Outputs,
        checks: &Checks,
    ) -> Result<Self> {
        let mut entries = Vec::new();
        for rel in outputs.files() {
            let full = outputs.dir().join(rel);
            let bytes = std::fs::metadata(&full).map_err(|e| LabError::io(&full, e))?.len();
            if bytes == 0 {
                return Err(LabError::Format(format!("artifact {} is empty", full.display())));
            }
            entries.push(OutputEntry {
                path: rel.clone(),
                bytes,
            });
        }
        Ok(RunManifest {
            command: command.to_string(),
            config_hash,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at,
            finished_at: unix_now(),
            outputs: entries,
            checks: checks.records().to_vec(),
            failures: checks.failures(),
        })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| LabError::io(&path, e))
    }
}
