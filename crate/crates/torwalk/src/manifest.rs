//! Output directory bookkeeping: every file goes through [`OutputDir::write`],
//! which hashes it, and the inventory is saved as `manifest.json`.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, RunError};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamRecord {
    #[serde(rename = "L")]
    pub l: usize,
    pub replica: u32,
    pub seed: u64,
    pub stream_id: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub code_version: String,
    pub command: String,
    /// The effective configuration as TOML.
    pub config: String,
    pub started_unix: f64,
    pub finished_unix: Option<f64>,
    /// `ok`, `running`, or `aborted: <reason>`.
    pub status: String,
    pub streams: Vec<StreamRecord>,
    pub outputs: Vec<OutputRecord>,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct OutputDir {
    root: PathBuf,
    manifest: RunManifest,
}

impl OutputDir {
    pub fn create(root: &Path, command: &str, config_toml: String) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| RunError::io(root, e))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            manifest: RunManifest {
                code_version: env!("CARGO_PKG_VERSION").to_string(),
                command: command.to_string(),
                config: config_toml,
                started_unix: now(),
                finished_unix: None,
                status: "running".into(),
                streams: Vec::new(),
                outputs: Vec::new(),
            },
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }

    pub fn add_stream(&mut self, l: usize, replica: u32, seed: u64, stream_id: u64) {
        self.manifest.streams.push(StreamRecord { l, replica, seed, stream_id });
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|e| RunError::io(&path, e))?;
        self.manifest.outputs.retain(|o| o.path != name);
        self.manifest.outputs.push(OutputRecord {
            path: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
            bytes: contents.len() as u64,
        });
        Ok(path)
    }

    fn save(&mut self, status: String) -> Result<PathBuf> {
        self.manifest.status = status;
        self.manifest.finished_unix = Some(now());
        let path = self.root.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes") + "\n";
        std::fs::write(&path, text).map_err(|e| RunError::io(&path, e))?;
        Ok(path)
    }

    pub fn finish(mut self) -> Result<RunManifest> {
        self.save("ok".into())?;
        Ok(self.manifest)
    }

    /// Record what was written before `err` and keep the original error.
    pub fn abort(mut self, err: RunError) -> RunError {
        match self.save(format!("aborted: {err}")) {
            Ok(_) => err,
            Err(save_err) => RunError::Verification(format!("{err}; the partial manifest could not be saved: {save_err}")),
        }
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let path = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
    let text = std::fs::read_to_string(&path).map_err(|e| RunError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| RunError::Parse { path, msg: e.to_string() })
}

/// Re-hash every listed output; returns the paths that are missing or differ.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>> {
    let m = read_manifest(dir)?;
    let root = if dir.is_dir() { dir.to_path_buf() } else { dir.parent().map(Path::to_path_buf).unwrap_or_default() };
    let mut bad = Vec::new();
    for o in &m.outputs {
        match std::fs::read(root.join(&o.path)) {
            Ok(bytes) if bytes.len() as u64 == o.bytes && sha256_hex(&bytes) == o.sha256 => {}
            _ => bad.push(o.path.clone()),
        }
    }
    Ok(bad)
}
