use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{DateTime, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use lcoupler_core::DeviceConfig;

/// Record of one invocation, written as `manifest.json` next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub subcommand: String,
    pub config_path: Option<PathBuf>,
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
    pub started: DateTime<Utc>,
    pub finished: Option<DateTime<Utc>>,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
    pub results: serde_json::Map<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config_path: Option<PathBuf>, cfg: &DeviceConfig, seed: u64) -> Self {
        Self {
            command: std::env::args().collect(),
            subcommand: subcommand.into(),
            config_path,
            config_sha256: config_hash(cfg),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            started: Utc::now(),
            finished: None,
            outputs: Vec::new(),
            results: Default::default(),
        }
    }

    pub fn record(&mut self, key: &str, value: impl Serialize) {
        self.results
            .insert(key.into(), serde_json::to_value(value).expect("result serialises"));
    }

    /// Writes `contents` to `dir/name` and lists it.
    pub fn write(&mut self, dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        self.outputs.push(name.into());
        Ok(())
    }

    pub fn finish(mut self, dir: &Path) -> Result<()> {
        self.finished = Some(Utc::now());
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}

/// SHA-256 of the canonical JSON form of the config.
pub fn config_hash(cfg: &DeviceConfig) -> String {
    Sha256::digest(cfg.to_json_string().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
