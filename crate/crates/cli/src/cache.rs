//! Content-addressed on-disk cache.
//!
//! An entry lives at `<dir>/<sha256(key)>` and holds a header line
//! `sha256:<hex digest of payload>` followed by the payload. Writes go
//! through a temporary file and a rename, so readers never see partial
//! entries.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub const CACHE_ENV: &str = "QPHOM_CACHE_DIR";

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).with_context(|| format!("creating cache directory {}", dir.display()))?;
        Ok(Self { dir })
    }

    /// The cache named by the environment, if any.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os(CACHE_ENV) {
            Some(dir) if !dir.is_empty() => Self::new(PathBuf::from(dir)).map(Some),
            _ => Ok(None),
        }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(digest(key.as_bytes()))
    }

    /// The stored payload, or `None` on a miss. Corrupt entries are misses.
    pub fn lookup(&self, key: &str) -> Option<Vec<u8>> {
        let path = self.path(key);
        let bytes = fs::read(&path).ok()?;
        let Some(split) = bytes.iter().position(|b| *b == b'\n') else {
            log::warn!("cache entry {} has no header; ignoring", path.display());
            return None;
        };
        let (header, payload) = (&bytes[..split], &bytes[split + 1..]);
        let expected = header.strip_prefix(b"sha256:").unwrap_or(b"");
        if expected != digest(payload).as_bytes() {
            log::warn!("cache entry {} is corrupt; recomputing", path.display());
            return None;
        }
        Some(payload.to_vec())
    }

    pub fn store(&self, key: &str, payload: &[u8]) -> Result<()> {
        let path = self.path(key);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)
            .with_context(|| format!("creating a temporary file in {}", self.dir.display()))?;
        tmp.write_all(format!("sha256:{}\n", digest(payload)).as_bytes())?;
        tmp.write_all(payload)?;
        tmp.persist(&path).with_context(|| format!("writing cache entry {}", path.display()))?;
        Ok(())
    }
}
