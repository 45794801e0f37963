//! Run manifests: everything needed to reproduce a run byte-for-byte.
//!
//! A manifest records the command line, seed, settings, and content hashes
//! of every input and output. Re-executing the recorded command line against
//! inputs with matching hashes reproduces outputs with matching hashes; the
//! timestamp is informational and not part of the reproducibility contract.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, RunError};

pub const TIE_RULE: &str = "ties-resolve-to-agree";
pub const PERCENTILE_METHOD: &str = "linear-interpolation";
pub const BOOTSTRAP_CI: &str = "percentile";
pub const PAIRWISE_WIN_RULE: &str = "strict-exceedance";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command_line: Vec<String>,
    pub timestamp_unix: u64,
    pub seed: u64,
    pub rng: String,
    pub tie_rule: String,
    pub percentile_method: String,
    pub bootstrap_ci: String,
    pub pairwise_win_rule: String,
    pub settings: BTreeMap<String, serde_json::Value>,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    pub notes: Vec<String>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hasher
        .finalize()
        .iter()
        .fold(String::with_capacity(64), |mut acc, b| {
            use std::fmt::Write as _;
            let _ = write!(acc, "{b:02x}");
            acc
        }))
}

/// Tracks a run in progress: inputs hashed as they load, outputs staged so a
/// failed run can remove them.
pub struct RunContext {
    pub out_dir: PathBuf,
    pub seed: u64,
    manifest_path: PathBuf,
    command_line: Vec<String>,
    settings: BTreeMap<String, serde_json::Value>,
    inputs: Vec<FileHash>,
    outputs: Vec<PathBuf>,
    notes: Vec<String>,
}

impl RunContext {
    pub fn new(
        out_dir: &Path,
        seed: u64,
        manifest_override: Option<&Path>,
        command_line: Vec<String>,
    ) -> Result<Self> {
        fs::create_dir_all(out_dir)?;
        Ok(RunContext {
            out_dir: out_dir.to_path_buf(),
            seed,
            manifest_path: manifest_override
                .map(|p| p.to_path_buf())
                .unwrap_or_else(|| out_dir.join("manifest.json")),
            command_line,
            settings: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            notes: Vec::new(),
        })
    }

    /// Hashes an input file into the manifest.
    pub fn record_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(FileHash {
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn setting(&mut self, key: &str, value: impl Serialize) {
        self.settings.insert(
            key.to_string(),
            serde_json::to_value(value).expect("setting serializes"),
        );
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Registers an output path (created by the caller) for staging.
    pub fn output(&mut self, name: &str) -> PathBuf {
        let path = self.out_dir.join(name);
        self.outputs.push(path.clone());
        path
    }

    /// Deletes every staged output; used when a run fails partway.
    pub fn discard(self) {
        for path in &self.outputs {
            let _ = fs::remove_file(path);
        }
    }

    /// Hashes outputs and writes the manifest next to them.
    pub fn finish(self) -> Result<RunManifest> {
        let mut outputs = Vec::new();
        for path in &self.outputs {
            if path.exists() {
                outputs.push(FileHash {
                    path: path.display().to_string(),
                    sha256: sha256_file(path)?,
                });
            }
        }
        let manifest = RunManifest {
            tool: "sensus".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command_line: self.command_line,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            seed: self.seed,
            rng: sensus_core::rng::RNG_CONTRACT.to_string(),
            tie_rule: TIE_RULE.to_string(),
            percentile_method: PERCENTILE_METHOD.to_string(),
            bootstrap_ci: BOOTSTRAP_CI.to_string(),
            pairwise_win_rule: PAIRWISE_WIN_RULE.to_string(),
            settings: self.settings,
            inputs: self.inputs,
            outputs,
            notes: self.notes,
        };
        let json =
            serde_json::to_string_pretty(&manifest).map_err(|e| RunError::runtime(e.to_string()))?;
        fs::write(&self.manifest_path, json + "\n")?;
        Ok(manifest)
    }
}

pub fn load_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::validation(format!("cannot open {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| RunError::validation(format!("{}: bad manifest: {e}", path.display())))
}
