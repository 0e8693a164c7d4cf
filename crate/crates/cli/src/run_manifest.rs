use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use knotforge::digest::sha256_hex;
use serde::Serialize;

use crate::error::CliError;

pub const DETERMINISTIC_ENV: &str = "KNOTFORGE_DETERMINISTIC";

pub fn deterministic() -> bool {
    std::env::var(DETERMINISTIC_ENV).is_ok_and(|v| v == "1")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// What one invocation read and wrote, with digests.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub census_sha256: Option<String>,
    /// SHA-256 of each configuration's canonical JSON.
    pub config_sha256: BTreeMap<String, String>,
    /// Derived digests: PD-level manifest digest, template digest, ...
    pub digests: BTreeMap<String, String>,
    pub artifacts: Vec<Artifact>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
    #[serde(skip)]
    root: PathBuf,
    #[serde(skip)]
    started: Instant,
}

pub const FILE_NAME: &str = "run_manifest.json";

impl RunManifest {
    pub fn new(command: &str, root: &Path) -> Self {
        RunManifest {
            tool: "knotforge",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            census_sha256: None,
            config_sha256: BTreeMap::new(),
            digests: BTreeMap::new(),
            artifacts: Vec::new(),
            created_unix: None,
            elapsed_ms: None,
            root: root.to_path_buf(),
            started: Instant::now(),
        }
    }

    pub fn config<T: Serialize>(&mut self, name: &str, cfg: &T) {
        let json = serde_json::to_vec(cfg).expect("config serializes");
        self.config_sha256.insert(name.to_string(), sha256_hex(&json));
    }

    /// Writes `rel` under the output root and records it.
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.record_bytes(rel, bytes);
        Ok(())
    }

    /// Records a file something else wrote.
    pub fn record(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        let rel = path.strip_prefix(&self.root).unwrap_or(path);
        let rel = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        self.record_bytes(&rel, &bytes);
        Ok(())
    }

    fn record_bytes(&mut self, rel: &str, bytes: &[u8]) {
        self.artifacts.push(Artifact { path: rel.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
    }

    /// Sorts the artifact list and writes `run_manifest.json`.
    pub fn finish(mut self) -> Result<(), CliError> {
        self.artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        if let Some(w) = self.artifacts.windows(2).find(|w| w[0].path == w[1].path) {
            return Err(CliError::Internal(format!("{} written twice", w[0].path)));
        }
        if !deterministic() {
            self.created_unix = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
            self.elapsed_ms = Some(self.started.elapsed().as_millis() as u64);
        }
        let mut json = serde_json::to_string_pretty(&self).expect("manifest serializes");
        json.push('\n');
        let path = self.root.join(FILE_NAME);
        fs::write(&path, json).map_err(|e| CliError::io(&path, e))
    }
}
