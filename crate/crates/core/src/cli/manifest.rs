//! Run manifests: what was run, with which parameters, on which inputs.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::Command;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Written next to every output file as `<output>.manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Value,
    pub inputs: Vec<InputDigest>,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub created: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn digest_file(path: &Path) -> Result<InputDigest> {
    Ok(InputDigest {
        path: path.to_path_buf(),
        sha256: sha256_hex(&std::fs::read(path)?),
    })
}

/// `command` and `params` of a run, the part that reproduces it.
pub fn run_record(cmd: &Command) -> Result<Value> {
    Ok(serde_json::to_value(cmd)?)
}

impl RunManifest {
    pub fn new(cmd: &Command) -> Result<Self> {
        let Value::Object(record) = run_record(cmd)? else {
            return Err(Error::InvalidParameter("command does not serialize to an object".into()));
        };
        let command = record
            .get("command")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_owned();
        let params = record.get("params").cloned().unwrap_or(Value::Null);
        let inputs = cmd
            .inputs()
            .into_iter()
            .map(digest_file)
            .collect::<Result<_>>()?;
        Ok(Self {
            command,
            params,
            inputs,
            version: env!("CARGO_PKG_VERSION").to_owned(),
            created: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        })
    }

    pub fn to_command(&self) -> Result<Command> {
        Ok(serde_json::from_value(serde_json::json!({
            "command": self.command,
            "params": self.params,
        }))?)
    }

    /// Inputs whose current digest differs from the recorded one.
    pub fn changed_inputs(&self) -> Vec<&Path> {
        self.inputs
            .iter()
            .filter(|d| digest_file(&d.path).map_or(true, |now| now.sha256 != d.sha256))
            .map(|d| d.path.as_path())
            .collect()
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write_manifest(output: &Path, cmd: &Command) -> Result<PathBuf> {
    let path = manifest_path(output);
    let manifest = RunManifest::new(cmd)?;
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(path)
}

/// Read a command back from a manifest or from a JSON report carrying a
/// `run` record.
pub fn load_command(path: &Path) -> Result<Command> {
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if doc.get("inputs").is_some() {
        let manifest: RunManifest = serde_json::from_value(doc)?;
        for changed in manifest.changed_inputs() {
            log::warn!("input {} changed since the manifest was written", changed.display());
        }
        return manifest.to_command();
    }
    let record = doc.get("run").cloned().unwrap_or(doc);
    Ok(serde_json::from_value(record)?)
}
