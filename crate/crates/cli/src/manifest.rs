//! `manifest.json` of an output directory and small file helpers.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const RUN_MANIFEST: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub git_revision: Option<String>,
    pub started_unix: u64,
    pub finished_unix: Option<u64>,
}

pub fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn git_revision() -> Option<String> {
    let out = Command::new("git").args(["rev-parse", "HEAD"]).output().ok()?;
    out.status
        .success()
        .then(|| String::from_utf8_lossy(&out.stdout).trim().to_string())
        .filter(|s| !s.is_empty())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file so a crash never leaves half a file.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_string_pretty(value)?)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// An output directory claimed by one configuration.
pub struct RunDir {
    manifest: RunManifest,
    path: std::path::PathBuf,
}

impl RunDir {
    /// Creates `out` or reopens it. A directory written under a different
    /// configuration is refused so results never mix.
    pub fn open(out: &Path, command: &str, cfg: &ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(out)?;
        let hash = cfg.hash();
        let path = out.join(RUN_MANIFEST);
        if path.exists() {
            let old: RunManifest = read_json(&path)?;
            if old.config_hash != hash || old.command != command {
                return Err(CliError::config(format!(
                    "{} already holds '{}' results for config {}; this run is '{command}' with config {hash}",
                    out.display(),
                    old.command,
                    old.config_hash
                )));
            }
        }
        write_json(&out.join(CONFIG_FILE), cfg)?;
        let manifest = RunManifest {
            command: command.to_string(),
            config_hash: hash,
            git_revision: git_revision(),
            started_unix: now_unix(),
            finished_unix: None,
        };
        write_json(&path, &manifest)?;
        Ok(Self { manifest, path })
    }

    pub fn finish(mut self) -> Result<()> {
        self.manifest.finished_unix = Some(now_unix());
        write_json(&self.path, &self.manifest)
    }
}
