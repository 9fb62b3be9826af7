//! Run manifests: what a subcommand was asked to do, the digests of what it
//! read and what it wrote. Replaying a manifest re-executes the recorded
//! command and compares output digests.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{CliError, Command};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_FORMAT: &str = "surroscreen-manifest";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub tool_version: String,
    pub subcommand: String,
    /// Fully resolved arguments, defaults included.
    pub command: Command,
    pub seed: Option<u64>,
    /// Input path (as given) to SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Output file name to SHA-256.
    pub outputs: BTreeMap<String, String>,
    /// Seconds since the Unix epoch. Not covered by the replay contract.
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let m: RunManifest =
            serde_json::from_str(text).map_err(|e| CliError::Manifest(e.to_string()))?;
        if m.format != MANIFEST_FORMAT {
            return Err(CliError::Manifest(format!("unknown format `{}`", m.format)));
        }
        if m.command.subcommand_name() != m.subcommand {
            return Err(CliError::Manifest(format!(
                "subcommand `{}` does not match recorded command `{}`",
                m.subcommand,
                m.command.subcommand_name()
            )));
        }
        if matches!(m.command, Command::Replay(_)) {
            return Err(CliError::Manifest("a replay cannot be replayed".into()));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }
}

pub fn file_digest(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(surroscreen::sha256_hex(&bytes))
}

pub fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
