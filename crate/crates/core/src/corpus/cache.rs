//! Binary corpus cache.
//!
//! Layout: 8-byte magic, little-endian u32 format version, 64 ASCII bytes of
//! source checksum (space padded), then the bincode-encoded store payload.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{CorpusError, CorpusStore, StoreParts};
use crate::persist::write_atomic_with;

pub const CACHE_MAGIC: &[u8; 8] = b"HFCORPUS";
pub const CACHE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheHeader {
    pub version: u32,
    pub checksum: String,
}

pub fn write_cache(store: &CorpusStore, path: &Path) -> Result<(), CorpusError> {
    let checksum = format!("{:<64}", store.checksum());
    if checksum.len() != 64 {
        return Err(CorpusError::Cache("checksum must be 64 hex characters".into()));
    }
    write_atomic_with(path, |file| {
        let mut w = BufWriter::new(file);
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_FORMAT_VERSION.to_le_bytes())?;
        w.write_all(checksum.as_bytes())?;
        bincode::serialize_into(&mut w, &store.to_parts()).map_err(std::io::Error::other)?;
        w.flush()
    })?;
    Ok(())
}

fn read_header<R: Read>(r: &mut R) -> Result<CacheHeader, CorpusError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(CorpusError::Cache("bad magic header".into()));
    }
    let mut version = [0u8; 4];
    r.read_exact(&mut version)?;
    let version = u32::from_le_bytes(version);
    let mut checksum = [0u8; 64];
    r.read_exact(&mut checksum)?;
    let checksum = String::from_utf8_lossy(&checksum).trim_end().to_string();
    Ok(CacheHeader { version, checksum })
}

pub fn read_cache_header(path: &Path) -> Result<CacheHeader, CorpusError> {
    read_header(&mut BufReader::new(File::open(path)?))
}

/// Loads a cached store. When `expected_checksum` is given and differs from
/// the one recorded in the cache, the cache is stale and `Ok(None)` is
/// returned.
pub fn load_cache(path: &Path, expected_checksum: Option<&str>) -> Result<Option<CorpusStore>, CorpusError> {
    let mut r = BufReader::new(File::open(path)?);
    let header = read_header(&mut r)?;
    if header.version != CACHE_FORMAT_VERSION {
        return Err(CorpusError::Cache(format!(
            "unsupported cache version {} (expected {CACHE_FORMAT_VERSION})",
            header.version
        )));
    }
    if let Some(expected) = expected_checksum {
        if expected != header.checksum {
            return Ok(None);
        }
    }
    let parts: StoreParts = bincode::deserialize_from(&mut r).map_err(|e| CorpusError::Cache(e.to_string()))?;
    Ok(Some(CorpusStore::from_parts(parts)))
}
