//! Run manifests: a config echo plus one record per check, with measured
//! values, so a run can be audited without rerunning it. Files are written
//! atomically (temp + rename) into the run directory.

use crate::config::ExperimentConfig;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    /// How `measured` relates to `threshold`: "<=", ">=", "==", "in" (with
    /// the companion bound in `detail`), or "recorded" for informational
    /// values.
    pub comparison: String,
    pub detail: String,
}

impl CheckRecord {
    pub fn le(name: &str, measured: f64, threshold: f64) -> Self {
        CheckRecord {
            name: name.into(),
            passed: measured <= threshold,
            measured,
            threshold,
            comparison: "<=".into(),
            detail: String::new(),
        }
    }

    pub fn ge(name: &str, measured: f64, threshold: f64) -> Self {
        CheckRecord {
            name: name.into(),
            passed: measured >= threshold,
            measured,
            threshold,
            comparison: ">=".into(),
            detail: String::new(),
        }
    }

    pub fn lt(name: &str, measured: f64, threshold: f64) -> Self {
        CheckRecord {
            name: name.into(),
            passed: measured < threshold,
            measured,
            threshold,
            comparison: "<".into(),
            detail: String::new(),
        }
    }

    pub fn within(name: &str, measured: f64, lo: f64, hi: f64) -> Self {
        CheckRecord {
            name: name.into(),
            passed: (lo..=hi).contains(&measured),
            measured,
            threshold: lo,
            comparison: "in".into(),
            detail: format!("[{lo}, {hi}]"),
        }
    }

    pub fn count(name: &str, measured: usize, expected: usize) -> Self {
        CheckRecord {
            name: name.into(),
            passed: measured == expected,
            measured: measured as f64,
            threshold: expected as f64,
            comparison: "==".into(),
            detail: String::new(),
        }
    }

    pub fn recorded(name: &str, value: f64) -> Self {
        CheckRecord {
            name: name.into(),
            passed: true,
            measured: value,
            threshold: f64::NAN,
            comparison: "recorded".into(),
            detail: String::new(),
        }
    }

    pub fn failed(name: &str, measured: f64, detail: &str) -> Self {
        CheckRecord {
            name: name.into(),
            passed: false,
            measured,
            threshold: f64::NAN,
            comparison: "unmet".into(),
            detail: detail.into(),
        }
    }

    pub fn with_detail(mut self, detail: &str) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub config: ExperimentConfig,
    pub wall_time_seconds: f64,
    pub checks: Vec<CheckRecord>,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig) -> Self {
        RunManifest {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            wall_time_seconds: 0.0,
            checks: Vec::new(),
            outputs: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Copy with the wall time zeroed, for determinism comparisons.
    pub fn without_wall_time(&self) -> Self {
        let mut m = self.clone();
        m.wall_time_seconds = 0.0;
        m
    }
}

/// Atomic file write: temp file in the target directory, then rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".tmp-{name}"));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    let dest = dir.join(name);
    std::fs::rename(&tmp, &dest)?;
    Ok(dest)
}
