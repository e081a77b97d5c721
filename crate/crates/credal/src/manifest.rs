use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::formats::{read_json, to_json_pretty};
use crate::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Every resolved flag, including defaults.
    pub flags: BTreeMap<String, Value>,
    /// Arguments that repeat the run into any output directory.
    pub rerun: Vec<String>,
    pub seed: u64,
    pub version: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
    pub wall_clock_seconds: f64,
    /// sha256 of every other file in the directory.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn read(dir: &Path) -> CliResult<Self> {
        read_json(&dir.join(MANIFEST_FILE))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `--name value` pairs for each flag; `true` becomes a bare switch,
/// lists are comma-joined, `false` and `null` are skipped.
pub fn flags_to_args(command: &str, globals: &BTreeMap<String, Value>, flags: &BTreeMap<String, Value>) -> Vec<String> {
    let mut out = vec!["credal".to_string()];
    let push = |map: &BTreeMap<String, Value>, out: &mut Vec<String>| {
        for (k, v) in map {
            let name = format!("--{}", k.replace('_', "-"));
            match v {
                Value::Null | Value::Bool(false) => {}
                Value::Bool(true) => out.push(name),
                Value::Array(items) => {
                    if !items.is_empty() {
                        out.push(name);
                        out.push(items.iter().map(scalar).collect::<Vec<_>>().join(","));
                    }
                }
                other => {
                    out.push(name);
                    out.push(scalar(other));
                }
            }
        }
    };
    push(globals, &mut out);
    out.push(command.to_string());
    push(flags, &mut out);
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Writes files into one directory and remembers their digests.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    digests: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> CliResult<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(Self { root, digests: BTreeMap::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.digests.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn finish(self, mut manifest: RunManifest) -> CliResult<RunManifest> {
        manifest.outputs = self.digests;
        let path = self.root.join(MANIFEST_FILE);
        std::fs::write(&path, to_json_pretty(&manifest)).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn rerun_arguments() {
        let globals = BTreeMap::from([("seed".to_string(), json!(7)), ("svg".to_string(), json!(false))]);
        let flags = BTreeMap::from([
            ("events".to_string(), json!([1, 3])),
            ("base_mode".to_string(), json!("grid")),
            ("dump_tower".to_string(), json!(true)),
        ]);
        assert_eq!(
            flags_to_args("converge", &globals, &flags),
            ["credal", "--seed", "7", "converge", "--base-mode", "grid", "--dump-tower", "--events", "1,3"]
        );
    }
}
