//! Artifact writer: CSV and JSON files plus a hashed manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// One written file and its content hash.
#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Collects artifacts under an output directory.
pub struct Artifacts {
    dir: PathBuf,
    entries: Vec<ManifestEntry>,
}

/// Failure while writing artifacts.
#[derive(Debug)]
pub struct WriteError(pub String);

impl std::fmt::Display for WriteError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl Artifacts {
    /// Creates the output directory if needed.
    pub fn create(dir: &Path) -> Result<Self, WriteError> {
        fs::create_dir_all(dir).map_err(|e| WriteError(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), entries: Vec::new() })
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), WriteError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| WriteError(format!("cannot write {}: {e}", path.display())))?;
        let sha256 = Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect();
        self.entries.push(ManifestEntry { path: name.to_string(), bytes: bytes.len(), sha256 });
        Ok(())
    }

    /// Writes pretty-printed JSON with keys in declaration order.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), WriteError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| WriteError(format!("cannot encode {name}: {e}")))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Writes a CSV file with a mandatory header.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), WriteError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| WriteError(format!("cannot encode {name}: {e}"));
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.write_record(row).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| WriteError(format!("cannot encode {name}: {e}")))?;
        self.write_bytes(name, &bytes)
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(mut self) -> Result<Vec<ManifestEntry>, WriteError> {
        let entries = self.entries.clone();
        self.json("manifest.json", &serde_json::json!({ "files": entries }))?;
        Ok(entries)
    }
}

/// Formats a float with round-trip precision.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_hashes_content() {
        let dir = std::env::temp_dir().join(format!("hardsphere-output-{}", std::process::id()));
        let mut a = Artifacts::create(&dir).unwrap();
        a.csv("t.csv", &["a", "b"], &[vec![num(1.0), num(0.5)]]).unwrap();
        let entries = a.finish().unwrap();
        assert_eq!(entries.len(), 1);
        let text = fs::read_to_string(dir.join("t.csv")).unwrap();
        assert_eq!(text, "a,b\n1e0,5e-1\n");
        let expected: String = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(entries[0].sha256, expected);
        assert!(dir.join("manifest.json").exists());
        fs::remove_dir_all(dir).unwrap();
    }
}
