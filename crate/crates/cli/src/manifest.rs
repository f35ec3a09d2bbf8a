use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq)]
pub struct FileEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub experiment: String,
    pub config_sha256: String,
    pub seed: u64,
    pub files: Vec<FileEntry>,
    /// Headline scalars; non-finite values are stored as `null`.
    pub summary: BTreeMap<String, Value>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn new(experiment: &str, config_sha256: String, seed: u64) -> Self {
        Manifest { experiment: experiment.into(), config_sha256, seed, files: Vec::new(), summary: BTreeMap::new() }
    }

    pub fn scalar(&mut self, key: &str, v: f64) {
        let value = serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number);
        self.summary.insert(key.into(), value);
    }

    pub fn text(&mut self, key: &str, v: impl Into<String>) {
        self.summary.insert(key.into(), Value::String(v.into()));
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(Value::as_f64)
    }

    pub fn file(&self, path: &str) -> Option<&FileEntry> {
        self.files.iter().find(|f| f.path == path)
    }

    pub fn to_json(&self) -> String {
        let files: Vec<Value> =
            self.files.iter().map(|f| json!({"path": f.path, "sha256": f.sha256, "bytes": f.bytes})).collect();
        let v = json!({
            "experiment": self.experiment,
            "config_sha256": self.config_sha256,
            "seed": self.seed,
            "files": files,
            "summary": self.summary,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("serialisable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let bad = |what: &str| CliError::Format(format!("manifest: {what}"));
        let v: Value = serde_json::from_str(text).map_err(|e| CliError::Format(format!("manifest: {e}")))?;
        let string = |k: &str| v.get(k).and_then(Value::as_str).map(String::from).ok_or_else(|| bad(k));
        let files = v
            .get("files")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("files"))?
            .iter()
            .map(|f| {
                Ok(FileEntry {
                    path: f.get("path").and_then(Value::as_str).ok_or_else(|| bad("file path"))?.into(),
                    sha256: f.get("sha256").and_then(Value::as_str).ok_or_else(|| bad("file sha256"))?.into(),
                    bytes: f.get("bytes").and_then(Value::as_u64).ok_or_else(|| bad("file bytes"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let summary = match v.get("summary") {
            Some(Value::Object(m)) => m.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            _ => return Err(bad("summary")),
        };
        Ok(Manifest {
            experiment: string("experiment")?,
            config_sha256: string("config_sha256")?,
            seed: v.get("seed").and_then(Value::as_u64).ok_or_else(|| bad("seed"))?,
            files,
            summary,
        })
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        Self::from_json(&text)
    }

    /// Re-hashes every listed file under `dir`.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for f in &self.files {
            let path = dir.join(&f.path);
            let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
            if bytes.len() as u64 != f.bytes || sha256_hex(&bytes) != f.sha256 {
                return Err(CliError::Format(format!("{}: content does not match the manifest", f.path)));
            }
        }
        Ok(())
    }
}

/// Writes files under an output directory and records each in a manifest.
pub struct ArtifactWriter {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl ArtifactWriter {
    pub fn new(dir: &Path, manifest: Manifest) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(ArtifactWriter { dir: dir.to_path_buf(), manifest })
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.manifest.files.retain(|f| f.path != rel);
        self.manifest.files.push(FileEntry { path: rel.into(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }

    pub fn finish(self) -> Result<Manifest> {
        let path = self.dir.join(MANIFEST_FILE);
        fs::write(&path, self.manifest.to_json()).map_err(|e| CliError::io(&path, e))?;
        Ok(self.manifest)
    }
}
