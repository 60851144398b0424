//! Run manifests: enough to re-run a command and check its output.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRef {
    pub path: String,
    pub sha256: String,
}

impl InputRef {
    pub fn hash(path: &Path) -> Result<InputRef> {
        let bytes = std::fs::read(path)?;
        Ok(InputRef { path: path.display().to_string(), sha256: format!("{:x}", Sha256::digest(&bytes)) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, as given.
    pub args: Vec<String>,
    /// Value of the seed environment variable at run time.
    pub env_seed: Option<u64>,
    pub inputs: Vec<InputRef>,
    /// Effective settings after defaults, config files and flags.
    pub config: Value,
    pub tolerances: Value,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, args: &[String], env_seed: Option<u64>, inputs: Vec<InputRef>, config: Value) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            args: args.to_vec(),
            env_seed,
            inputs,
            config,
            tolerances: tolerances(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        }
    }

    /// Accepts a bare manifest or any JSON output that embeds one.
    pub fn from_json(v: &Value) -> Result<RunManifest> {
        let m = v.get("manifest").unwrap_or(v);
        serde_json::from_value(m.clone()).map_err(|e| Error::Parse(format!("not a run manifest: {e}")))
    }

    /// Inputs whose current content no longer matches the recorded hash.
    pub fn changed_inputs(&self) -> Vec<String> {
        self.inputs
            .iter()
            .filter(|r| InputRef::hash(Path::new(&r.path)).map(|now| now.sha256 != r.sha256).unwrap_or(true))
            .map(|r| r.path.clone())
            .collect()
    }
}

fn tolerances() -> Value {
    json!({
        "hermitian": tol::HERMITIAN,
        "psd": tol::PSD,
        "trace": tol::TRACE,
        "norm": tol::NORM,
        "eig_cutoff": tol::EIG_CUTOFF,
        "kraus": tol::KRAUS,
        "isometry": tol::ISOMETRY,
        "choi_equal": tol::CHOI_EQUAL,
        "ppt": tol::PPT,
        "program": tol::PROGRAM,
        "unitary": tol::UNITARY,
        "optimizer": tol::OPTIMIZER,
    })
}

/// Drops the timestamp so two runs of one manifest compare equal.
pub fn without_timestamp(mut v: Value) -> Value {
    if let Some(m) = v.get_mut("manifest").and_then(Value::as_object_mut) {
        m.remove("timestamp");
    }
    if let Some(obj) = v.as_object_mut() {
        if obj.contains_key("args") && obj.contains_key("command") {
            obj.remove("timestamp");
        }
    }
    v
}
