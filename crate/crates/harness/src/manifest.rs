//! Run manifests and hashed, atomically written output files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub name: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceRow {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub config: RunConfig,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub version: String,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    pub calibration: BTreeMap<String, f64>,
    pub tolerances: Vec<ToleranceRow>,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            config_hash: config.hash(),
            config: config.clone(),
            master_seed: config.seed,
            seeds: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timings: BTreeMap::new(),
            calibration: BTreeMap::new(),
            tolerances: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn tolerance(&mut self, name: impl Into<String>, measured: f64, tolerance: f64, passed: bool) {
        self.tolerances.push(ToleranceRow { name: name.into(), measured, tolerance, passed });
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }
}

/// Writes `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    fs::write(&tmp, bytes).map_err(|e| HarnessError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

/// An output directory that stamps every file with the config hash.
pub struct OutputDir {
    pub path: PathBuf,
    pub manifest: RunManifest,
}

impl OutputDir {
    pub fn create(path: &Path, config: &RunConfig) -> Result<Self> {
        fs::create_dir_all(path).map_err(|e| HarnessError::io(path, e))?;
        Ok(Self { path: path.to_path_buf(), manifest: RunManifest::new(config) })
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.path.join(name), bytes)?;
        self.manifest.outputs.push(OutputFile { name: name.to_string(), sha256: hex::encode(Sha256::digest(bytes)) });
        Ok(())
    }

    /// CSV with a leading `# config_hash:` comment line.
    pub fn csv(&mut self, name: &str, body: &str) -> Result<()> {
        let text = format!("# config_hash: {}\n{body}", self.manifest.config_hash);
        self.put(name, text.as_bytes())
    }

    /// JSON object with a `config_hash` field added.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut v = serde_json::to_value(value).expect("output serializes");
        let hash = serde_json::Value::String(self.manifest.config_hash.clone());
        let v = match v {
            serde_json::Value::Object(ref mut m) => {
                m.insert("config_hash".into(), hash);
                v
            }
            other => serde_json::json!({ "config_hash": hash, "data": other }),
        };
        let mut text = serde_json::to_string_pretty(&v).expect("output serializes");
        text.push('\n');
        self.put(name, text.as_bytes())
    }

    pub fn finish(self) -> Result<RunManifest> {
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        text.push('\n');
        write_atomic(&self.path.join(MANIFEST_FILE), text.as_bytes())?;
        Ok(self.manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Kind;

    #[test]
    fn outputs_are_stamped_and_hashed() {
        let dir = std::env::temp_dir().join(format!("akpz-manifest-{}", std::process::id()));
        let cfg = RunConfig::new(Kind::Check);
        let mut out = OutputDir::create(&dir, &cfg).unwrap();
        out.csv("a.csv", "x,y\n1,2\n").unwrap();
        out.json("b.json", &vec![1, 2]).unwrap();
        let m = out.finish().unwrap();
        let a = fs::read_to_string(dir.join("a.csv")).unwrap();
        assert_eq!(a, format!("# config_hash: {}\nx,y\n1,2\n", cfg.hash()));
        assert_eq!(m.outputs[0].sha256, hex::encode(Sha256::digest(a.as_bytes())));
        let b: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("b.json")).unwrap()).unwrap();
        assert_eq!(b["data"], serde_json::json!([1, 2]));
        assert_eq!(RunManifest::read(&dir.join(MANIFEST_FILE)).unwrap(), m);
        let leftovers = fs::read_dir(&dir).unwrap().filter(|e| e.as_ref().unwrap().path().to_string_lossy().ends_with(".tmp")).count();
        assert_eq!(leftovers, 0);
        fs::remove_dir_all(&dir).unwrap();
    }
}
