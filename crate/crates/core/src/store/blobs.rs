//! Content-addressed attachment bodies, named by their SHA-256 digest.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use parking_lot::RwLock;

use crate::canonical::sha256_hex;
use crate::domain::is_hex_digest;

pub(crate) enum BlobStore {
    Memory(RwLock<HashMap<String, Vec<u8>>>),
    Dir(PathBuf),
}

impl BlobStore {
    pub(crate) fn memory() -> Self {
        BlobStore::Memory(RwLock::new(HashMap::new()))
    }

    pub(crate) fn dir(path: PathBuf, create: bool) -> io::Result<Self> {
        if create {
            fs::create_dir_all(&path)?;
        }
        Ok(BlobStore::Dir(path))
    }

    /// Stores `bytes` unless already present and returns its digest.
    pub(crate) fn put(&self, bytes: &[u8]) -> io::Result<String> {
        let digest = sha256_hex(bytes);
        match self {
            BlobStore::Memory(map) => {
                map.write().entry(digest.clone()).or_insert_with(|| bytes.to_vec());
            }
            BlobStore::Dir(dir) => {
                let target = dir.join(&digest);
                if !target.exists() {
                    let tmp = dir.join(format!(".tmp-{digest}-{}", std::process::id()));
                    let mut f = fs::File::create(&tmp)?;
                    f.write_all(bytes)?;
                    f.sync_all()?;
                    fs::rename(&tmp, &target)?;
                }
            }
        }
        Ok(digest)
    }

    pub(crate) fn get(&self, digest: &str) -> io::Result<Option<Vec<u8>>> {
        if !is_hex_digest(digest) {
            return Ok(None);
        }
        match self {
            BlobStore::Memory(map) => Ok(map.read().get(digest).cloned()),
            BlobStore::Dir(dir) => match fs::read(dir.join(digest)) {
                Ok(bytes) => Ok(Some(bytes)),
                Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
                Err(e) => Err(e),
            },
        }
    }

    pub(crate) fn contains(&self, digest: &str) -> bool {
        if !is_hex_digest(digest) {
            return false;
        }
        match self {
            BlobStore::Memory(map) => map.read().contains_key(digest),
            BlobStore::Dir(dir) => dir.join(digest).is_file(),
        }
    }

    pub(crate) fn count(&self) -> usize {
        match self {
            BlobStore::Memory(map) => map.read().len(),
            BlobStore::Dir(dir) => fs::read_dir(dir)
                .map(|entries| {
                    entries
                        .filter_map(Result::ok)
                        .filter(|e| is_hex_digest(&e.file_name().to_string_lossy()))
                        .count()
                })
                .unwrap_or(0),
        }
    }
}
