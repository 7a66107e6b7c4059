//! Run manifests: a JSON record of what a stage produced and under which
//! configuration, with SHA-256 digests so downstream stages can verify
//! their inputs before trusting them.

use std::collections::BTreeMap;
use std::io::Read as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub format_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub master_seed: u64,
    /// Full resolved configuration (every key, post-defaulting).
    pub config: BTreeMap<String, String>,
    /// Relative path → SHA-256 hex digest, sorted by path.
    pub files: BTreeMap<String, String>,
}

/// Streaming SHA-256 of a file, as lowercase hex.
pub fn sha256_hex(path: &Path) -> Result<String> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

impl Manifest {
    pub fn new(master_seed: u64, config: BTreeMap<String, String>) -> Self {
        Manifest {
            format_version: MANIFEST_FORMAT_VERSION,
            tool: "gaitlab".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            master_seed,
            config,
            files: BTreeMap::new(),
        }
    }

    /// Hashes `root/rel` and records it under `rel`.
    pub fn record_file(&mut self, root: &Path, rel: &str) -> Result<()> {
        let digest = sha256_hex(&root.join(rel))?;
        self.files.insert(rel.to_string(), digest);
        Ok(())
    }

    /// Writes the manifest as pretty JSON (keys sorted by the BTreeMaps).
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Parse(format!("cannot serialize manifest: {e}")))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if manifest.format_version != MANIFEST_FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "{}: manifest format version {} is not supported (expected {})",
                path.display(),
                manifest.format_version,
                MANIFEST_FORMAT_VERSION
            )));
        }
        Ok(manifest)
    }

    /// Recomputes every digest against files under `root`; names the first
    /// mismatching or missing file.
    pub fn verify(&self, root: &Path) -> Result<()> {
        for (rel, expected) in &self.files {
            let path = root.join(rel);
            if !path.is_file() {
                return Err(Error::Validation(format!(
                    "manifest lists {rel:?} but it does not exist"
                )));
            }
            let actual = sha256_hex(&path)?;
            if &actual != expected {
                return Err(Error::Validation(format!(
                    "checksum mismatch for {rel:?}: manifest says {expected}, file hashes to {actual}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn sha256_matches_known_vector() {
        // SHA-256("abc") is a published test vector.
        let dir = tempdir().unwrap();
        let path = dir.path().join("abc.txt");
        std::fs::write(&path, "abc").unwrap();
        assert_eq!(
            sha256_hex(&path).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn round_trip_and_verify() {
        let dir = tempdir().unwrap();
        std::fs::write(dir.path().join("a.csv"), "x,y\n1,2\n").unwrap();
        std::fs::write(dir.path().join("b.csv"), "p,q\n3,4\n").unwrap();

        let mut config = BTreeMap::new();
        config.insert("fps".to_string(), "25".to_string());
        let mut manifest = Manifest::new(42, config);
        manifest.record_file(dir.path(), "a.csv").unwrap();
        manifest.record_file(dir.path(), "b.csv").unwrap();

        let path = dir.path().join(MANIFEST_FILE_NAME);
        manifest.write(&path).unwrap();
        let back = Manifest::read(&path).unwrap();
        assert_eq!(back, manifest);
        back.verify(dir.path()).unwrap();
    }

    #[test]
    fn verify_names_the_tampered_file() {
        let dir = tempdir().unwrap();
        std::fs::write(dir.path().join("a.csv"), "x\n").unwrap();
        let mut manifest = Manifest::new(1, BTreeMap::new());
        manifest.record_file(dir.path(), "a.csv").unwrap();

        std::fs::write(dir.path().join("a.csv"), "tampered\n").unwrap();
        let err = manifest.verify(dir.path()).unwrap_err();
        assert_eq!(err.category(), "validation");
        assert!(err.to_string().contains("a.csv"), "{err}");

        std::fs::remove_file(dir.path().join("a.csv")).unwrap();
        let err = manifest.verify(dir.path()).unwrap_err();
        assert!(err.to_string().contains("does not exist"), "{err}");
    }

    #[test]
    fn writing_is_deterministic() {
        let dir = tempdir().unwrap();
        std::fs::write(dir.path().join("z.csv"), "1\n").unwrap();
        std::fs::write(dir.path().join("a.csv"), "2\n").unwrap();
        let build = |order: &[&str]| {
            let mut m = Manifest::new(7, BTreeMap::new());
            for rel in order {
                m.record_file(dir.path(), rel).unwrap();
            }
            serde_json::to_string_pretty(&m).unwrap()
        };
        assert_eq!(build(&["z.csv", "a.csv"]), build(&["a.csv", "z.csv"]));
    }

    #[test]
    fn rejects_unknown_format_version() {
        let dir = tempdir().unwrap();
        let mut manifest = Manifest::new(1, BTreeMap::new());
        manifest.format_version = 99;
        let path = dir.path().join(MANIFEST_FILE_NAME);
        manifest.write(&path).unwrap();
        let err = Manifest::read(&path).unwrap_err();
        assert_eq!(err.category(), "validation");
    }
}
