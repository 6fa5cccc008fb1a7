use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::execute;
use crate::manifest::{file_sha256, write_run, Manifest};

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A manifest.json written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &ReplayArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.manifest)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.manifest.display())))?;
    let recorded: Manifest = serde_json::from_str(&text).map_err(|e| {
        CliError::Input(format!("{}: not a manifest: {e}", args.manifest.display()))
    })?;
    if recorded.version != env!("CARGO_PKG_VERSION") {
        eprintln!(
            "warning: manifest written by version {}, replaying with {}",
            recorded.version,
            env!("CARGO_PKG_VERSION")
        );
    }
    for (path, sha) in &recorded.inputs {
        if file_sha256(path.as_ref())? != *sha {
            return Err(CliError::Input(format!(
                "input {path} changed since the recorded run"
            )));
        }
    }
    let run = execute(&recorded.command, Some(&args.out))?;
    let fresh = write_run(&args.out, &recorded.command, &run)?;
    let mut mismatched = Vec::new();
    for (name, sha) in &recorded.artifacts {
        let ok = fresh.artifacts.get(name) == Some(sha);
        println!("{} {name}", if ok { "match   " } else { "MISMATCH" });
        if !ok {
            mismatched.push(name.clone());
        }
    }
    for name in fresh
        .artifacts
        .keys()
        .filter(|k| !recorded.artifacts.contains_key(*k))
    {
        println!("MISMATCH {name} (not in the manifest)");
        mismatched.push(name.clone());
    }
    if mismatched.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "replay did not reproduce: {}",
            mismatched.join(", ")
        )))
    }
}
