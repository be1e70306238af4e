use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Record of one stage execution: what it read, what it wrote, and under which config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageManifest {
    pub stage: String,
    pub config_digest: String,
    pub seed: u64,
    /// Keyed by path relative to the output directory (`input:<name>` for raw tables).
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` wins when set.
    pub timestamp: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

pub fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
}

impl StageManifest {
    pub fn new(stage: &str, config_digest: &str, seed: u64) -> Self {
        Self {
            stage: stage.to_string(),
            config_digest: config_digest.to_string(),
            seed,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            timestamp: timestamp(),
        }
    }

    pub fn read(stage_dir: &Path) -> Result<Self, CliError> {
        let path = stage_dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io("manifest", &path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, stage_dir: &Path) -> Result<(), CliError> {
        let path = stage_dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io("manifest", &path, e))
    }
}

/// Check every recorded digest against the files on disk and against the upstream stage
/// that produced them. Returns one message per inconsistency.
pub fn validate_chain(out_dir: &Path, stages: &[&str]) -> Vec<String> {
    let mut problems = Vec::new();
    let mut produced: BTreeMap<String, String> = BTreeMap::new();
    for stage in stages {
        let m = match StageManifest::read(&out_dir.join(stage)) {
            Ok(m) => m,
            Err(e) => {
                problems.push(format!("{stage}: {e}"));
                continue;
            }
        };
        for (file, digest) in &m.inputs {
            if file.starts_with("input:") {
                continue;
            }
            match produced.get(file) {
                Some(d) if d == digest => {}
                Some(_) => problems.push(format!("{stage}: input {file} differs from what its producer recorded")),
                None => problems.push(format!("{stage}: input {file} has no producing stage")),
            }
        }
        for (file, digest) in &m.outputs {
            match sha256_file(&out_dir.join(file)) {
                Ok(d) if &d == digest => {}
                Ok(_) => problems.push(format!("{stage}: output {file} changed since the stage ran")),
                Err(e) => problems.push(format!("{stage}: output {file}: {e}")),
            }
            produced.insert(file.clone(), digest.clone());
        }
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn chain_detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path();
        std::fs::create_dir_all(out.join("a")).unwrap();
        std::fs::create_dir_all(out.join("b")).unwrap();
        std::fs::write(out.join("a/x.csv"), "1\n").unwrap();
        let mut a = StageManifest::new("a", "c", 0);
        a.outputs.insert("a/x.csv".into(), sha256_file(&out.join("a/x.csv")).unwrap());
        a.write(&out.join("a")).unwrap();
        let mut b = StageManifest::new("b", "c", 0);
        b.inputs.insert("a/x.csv".into(), a.outputs["a/x.csv"].clone());
        b.write(&out.join("b")).unwrap();
        assert!(validate_chain(out, &["a", "b"]).is_empty());
        std::fs::write(out.join("a/x.csv"), "2\n").unwrap();
        assert_eq!(validate_chain(out, &["a", "b"]).len(), 1);
    }
}
