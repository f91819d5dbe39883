//! Artifact plumbing: atomic file writes and the run manifest. Files land
//! complete or not at all — each write goes to a dot-tmp sibling first and
//! is renamed into place. Manifests carry no timestamps, so re-running a
//! plan byte-reproduces every artifact.

use anyhow::{Context, Result};
use serde::Serialize;
use std::fs;
use std::path::PathBuf;

use crate::config::RunConfig;

pub struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: PathBuf) -> Result<Self> {
        fs::create_dir_all(&dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Artifacts { dir, written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let tmp = self.dir.join(format!(".{name}.tmp"));
        let dst = self.dir.join(name);
        fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
        fs::rename(&tmp, &dst).with_context(|| format!("renaming into {}", dst.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn dir(&self) -> &PathBuf {
        &self.dir
    }
}

/// One declared check. `tolerance` is absent for structural (yes/no)
/// assertions; `measured` is absent when there was nothing to measure.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn tolerance(name: impl Into<String>, tolerance: f64, measured: f64) -> Self {
        Check {
            name: name.into(),
            tolerance: Some(tolerance),
            measured: Some(measured),
            pass: measured <= tolerance,
        }
    }

    pub fn structural(name: impl Into<String>, pass: bool) -> Self {
        Check { name: name.into(), tolerance: None, measured: None, pass }
    }
}

/// What a command hands back to the runner: its checks plus any extra
/// key/values worth recording in the manifest.
pub struct Outcome {
    pub checks: Vec<Check>,
    pub extras: serde_json::Value,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Written last, after every other artifact: the effective plan, its hash,
/// crate versions, every declared tolerance, and the per-check verdicts.
pub fn write_manifest(
    artifacts: &mut Artifacts,
    command: &str,
    config: &RunConfig,
    outcome: &Outcome,
) -> Result<bool> {
    let mut tolerances = serde_json::Map::new();
    for check in &outcome.checks {
        if let Some(t) = check.tolerance {
            tolerances.insert(check.name.clone(), serde_json::json!(t));
        }
    }
    let pass = outcome.pass();
    let manifest = serde_json::json!({
        "command": command,
        "config": config,
        "config_hash": config.hash(),
        "versions": {
            "jspec-cli": env!("CARGO_PKG_VERSION"),
            "jspec-core": jspec_core::VERSION,
        },
        "tolerances": tolerances,
        "checks": outcome.checks,
        "results": outcome.extras,
        "pass": pass,
        "artifacts": &artifacts.written,
    });
    let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    artifacts.write("manifest.json", body.as_bytes())?;
    Ok(pass)
}
