//! Run manifests: the configuration of a run plus SHA-256 digests of the
//! files it read and wrote. Digests are recomputed on load.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{check_version, read_text, version_line, write_text};
use crate::error::{Error, Result};
use crate::probit::ModelConfig;

const KIND: &str = "mvprobit-manifest";

/// A file named relative to the manifest's directory, with its digest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// Seconds since the Unix epoch when the run finished.
    pub created_unix: u64,
    pub config: ModelConfig,
    pub dataset: FileDigest,
    pub plan: FileDigest,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl FileDigest {
    /// Digest of `dir/name`.
    pub fn of(dir: &Path, name: &str) -> Result<Self> {
        Ok(FileDigest { path: name.to_string(), sha256: sha256_file(&dir.join(name))? })
    }

    fn verify(&self, dir: &Path) -> Result<()> {
        let computed = sha256_file(&dir.join(&self.path))?;
        if computed != self.sha256 {
            return Err(Error::DigestMismatch {
                what: self.path.clone(),
                recorded: self.sha256.clone(),
                computed,
            });
        }
        Ok(())
    }
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Configuration(format!("serializing manifest: {e}")))?;
        write_text(path, &format!("{}\n{json}\n", version_line(KIND)))
    }

    /// Reads a manifest and verifies every recorded digest against the
    /// files next to it.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let (first, body) = text.split_once('\n').unwrap_or((text.as_str(), ""));
        check_version(Some(first), KIND, path)?;
        let manifest: RunManifest = serde_json::from_str(body).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for file in std::iter::once(&manifest.dataset).chain([&manifest.plan]).chain(&manifest.outputs) {
            file.verify(dir)?;
        }
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digests_are_checked_on_load() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["data.csv", "plan.txt", "out.txt"] {
            std::fs::write(dir.path().join(name), name).unwrap();
        }
        let manifest = RunManifest {
            tool_version: "0.0.0".into(),
            created_unix: 0,
            config: ModelConfig::default(),
            dataset: FileDigest::of(dir.path(), "data.csv").unwrap(),
            plan: FileDigest::of(dir.path(), "plan.txt").unwrap(),
            outputs: vec![FileDigest::of(dir.path(), "out.txt").unwrap()],
        };
        let path = dir.path().join("manifest.json");
        manifest.save(&path).unwrap();
        assert_eq!(RunManifest::load(&path).unwrap(), manifest);

        std::fs::write(dir.path().join("out.txt"), "tampered").unwrap();
        assert_eq!(RunManifest::load(&path).unwrap_err().kind(), "digest-mismatch");
    }

    #[test]
    fn known_digest() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc");
        std::fs::write(&p, "abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
