//! Provenance manifests.
//!
//! Every pipeline command writes a manifest next to its outputs: resolved
//! configuration (and its hash), input and output content hashes, tool
//! version, and the seed. Manifests contain no timestamps or absolute
//! output paths, so identical runs produce byte-identical manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn new(command: &str, config: &PipelineConfig) -> Self {
        let config_map = config.to_map();
        let canonical: String = config_map
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        RunManifest {
            tool: "minicorpus".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed: config.seed,
            config_hash: sha256_hex(canonical.as_bytes()),
            config: config_map,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    fn digest(path: &Path) -> std::io::Result<FileDigest> {
        // Base names only: identity lives in the hash, and manifests stay
        // byte-identical across runs rooted in different directories.
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Ok(FileDigest {
            name,
            sha256: sha256_file(path)?,
        })
    }

    pub fn add_input(&mut self, path: &Path) -> std::io::Result<()> {
        self.inputs.push(Self::digest(path)?);
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) -> std::io::Result<()> {
        self.outputs.push(Self::digest(path)?);
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, self.to_json() + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn identical_runs_produce_identical_manifests() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.txt");
        fs::write(&input, "data").unwrap();
        let out_a = dir.path().join("a").join("out.bin");
        let out_b = dir.path().join("b").join("out.bin");
        fs::create_dir_all(out_a.parent().unwrap()).unwrap();
        fs::create_dir_all(out_b.parent().unwrap()).unwrap();
        fs::write(&out_a, "result").unwrap();
        fs::write(&out_b, "result").unwrap();

        let config = PipelineConfig::default();
        let mut m1 = RunManifest::new("pack", &config);
        m1.add_input(&input).unwrap();
        m1.add_output(&out_a).unwrap();
        let mut m2 = RunManifest::new("pack", &config);
        m2.add_input(&input).unwrap();
        m2.add_output(&out_b).unwrap();
        assert_eq!(m1.to_json(), m2.to_json());
    }

    #[test]
    fn config_hash_tracks_config_changes() {
        let a = RunManifest::new("pack", &PipelineConfig::default());
        let mut changed = PipelineConfig::default();
        changed.seq_len = 64;
        let b = RunManifest::new("pack", &changed);
        assert_ne!(a.config_hash, b.config_hash);
    }
}
