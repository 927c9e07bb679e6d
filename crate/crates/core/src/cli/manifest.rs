//! Run manifests written beside outputs: tool, version, subcommand, the
//! effective configuration and SHA-256 digests of every input and output.
//! No timestamps or host details, so identical runs give identical
//! manifests apart from the recorded paths.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub notes: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let mut file = std::fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn digests(paths: &[PathBuf]) -> std::io::Result<Vec<FileDigest>> {
    paths
        .iter()
        .map(|p| Ok(FileDigest { path: p.display().to_string(), sha256: sha256_file(p)? }))
        .collect()
}

impl Manifest {
    pub fn build(
        subcommand: &str,
        config: serde_json::Value,
        inputs: &[PathBuf],
        outputs: &[PathBuf],
        notes: BTreeMap<String, String>,
    ) -> std::io::Result<Manifest> {
        Ok(Manifest {
            tool: "lpi",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            config,
            inputs: digests(inputs)?,
            outputs: digests(outputs)?,
            notes,
        })
    }

    /// `<primary output>.manifest.json`.
    pub fn path_for(primary_output: &Path) -> PathBuf {
        let mut name = primary_output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn write(&self, primary_output: &Path) -> std::io::Result<PathBuf> {
        let path = Self::path_for(primary_output);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc.txt");
        std::fs::write(&p, b"abc").unwrap();
        assert_eq!(sha256_file(&p).unwrap(), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        let m = Manifest::build("bin", serde_json::json!({"seed": 1}), std::slice::from_ref(&p), &[], BTreeMap::new()).unwrap();
        let written = m.write(&p).unwrap();
        assert!(written.to_string_lossy().ends_with("abc.txt.manifest.json"));
        let text = std::fs::read_to_string(written).unwrap();
        assert!(text.contains("\"subcommand\": \"bin\"") && text.contains("ba7816bf"));
    }
}
