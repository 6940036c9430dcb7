use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const PRNG_NAME: &str = "ChaCha20";
pub const PRNG_SEEDING: &str = "rand_chacha::ChaCha20Rng::seed_from_u64";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Every file a scenario wrote, in path order. No timestamps, so equal
/// inputs give equal bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub kind: String,
    pub seed: Option<u64>,
    pub prng: String,
    pub prng_seeding: String,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Named file contents, kept sorted so the write order is fixed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Artifacts {
    files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    pub fn insert(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.insert(name.into(), contents.into());
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.get(name).map(Vec::as_slice)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn manifest(&self, scenario: &str, kind: &str, seed: Option<u64>) -> Manifest {
        Manifest {
            scenario: scenario.to_string(),
            kind: kind.to_string(),
            seed,
            prng: PRNG_NAME.to_string(),
            prng_seeding: PRNG_SEEDING.to_string(),
            files: self
                .files
                .iter()
                .map(|(path, data)| FileEntry {
                    path: path.clone(),
                    sha256: sha256_hex(data),
                    bytes: data.len() as u64,
                })
                .collect(),
        }
    }

    /// Writes every file and then the manifest, one at a time.
    pub fn write_all(&self, dir: &Path, manifest: &Manifest) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, data) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, data).map_err(|e| Error::io(&path, e))?;
        }
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, manifest_bytes(manifest)).map_err(|e| Error::io(&path, e))
    }
}

pub fn manifest_bytes(m: &Manifest) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(m).expect("manifest serialises");
    out.push(b'\n');
    out
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Re-hashes every listed file; the first mismatch is a data error.
pub fn verify_manifest(dir: &Path) -> Result<Manifest> {
    let m = read_manifest(dir)?;
    for f in &m.files {
        let path = dir.join(&f.path);
        let data = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if sha256_hex(&data) != f.sha256 {
            return Err(Error::Data(format!("hash mismatch for {}", f.path)));
        }
    }
    Ok(m)
}
