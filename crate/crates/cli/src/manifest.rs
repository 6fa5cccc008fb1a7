//! Run manifests: the resolved command, its configuration and the hashes of everything written.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliResult;
use crate::Command;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    /// Arguments with paths made absolute; the output directory is not recorded.
    pub command: Command,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    /// Input path to sha256.
    pub inputs: BTreeMap<String, String>,
    /// Artifact file name to sha256.
    pub artifacts: BTreeMap<String, String>,
}

pub struct Artifact {
    pub name: &'static str,
    pub bytes: Vec<u8>,
}

pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> CliResult<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

pub fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(value)?;
    b.push(b'\n');
    Ok(b)
}

/// Write the artifacts and then the manifest describing them.
pub fn write_run(out: &Path, command: &Command, run: &RunOutput) -> CliResult<Manifest> {
    fs::create_dir_all(out)?;
    let mut artifacts = BTreeMap::new();
    for a in &run.artifacts {
        fs::write(out.join(a.name), &a.bytes)?;
        artifacts.insert(a.name.to_string(), sha256_hex(&a.bytes));
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.clone(),
        seed: run.seed,
        config: run.config.clone(),
        inputs: run.inputs.clone(),
        artifacts,
    };
    fs::write(out.join(MANIFEST), json_bytes(&manifest)?)?;
    Ok(manifest)
}
