//! Binary named-tensor archive used for checkpoints and classifier weights.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! b"GANCKPT\0" | u32 version | u64 header_len | header JSON | f64 payload
//! ```
//!
//! The header lists every tensor (name, shape, offset into the payload in
//! f64 units), a free-form `meta` object, and the SHA-256 of the payload.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::tensor::Tensor;

pub const MAGIC: &[u8; 8] = b"GANCKPT\0";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("archive version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt archive: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Serialize, Deserialize)]
struct Entry {
    name: String,
    shape: Vec<usize>,
    offset: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    meta: serde_json::Value,
    tensors: Vec<Entry>,
    payload_sha256: String,
}

/// Named tensors plus arbitrary JSON metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    pub meta: serde_json::Value,
    pub tensors: BTreeMap<String, Tensor>,
}

impl Archive {
    pub fn new(meta: serde_json::Value) -> Self {
        Self {
            meta,
            tensors: BTreeMap::new(),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut payload = Vec::new();
        let mut entries = Vec::with_capacity(self.tensors.len());
        let mut offset = 0;
        for (name, t) in &self.tensors {
            entries.push(Entry {
                name: name.clone(),
                shape: t.shape().to_vec(),
                offset,
            });
            offset += t.len();
            for v in t.data() {
                payload.extend_from_slice(&v.to_le_bytes());
            }
        }
        let header = Header {
            meta: self.meta.clone(),
            tensors: entries,
            payload_sha256: hex::encode(Sha256::digest(&payload)),
        };
        let header = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(20 + header.len() + payload.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        out.extend_from_slice(&payload);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ArchiveError> {
        let corrupt = |m: &str| ArchiveError::Corrupt(m.to_string());
        if bytes.len() < 20 || &bytes[..8] != MAGIC {
            return Err(corrupt("missing magic"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(ArchiveError::VersionMismatch {
                found: version,
                expected: VERSION,
            });
        }
        let header_len = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
        let header_end = 20usize
            .checked_add(header_len)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| corrupt("truncated header"))?;
        let header: Header = serde_json::from_slice(&bytes[20..header_end])
            .map_err(|e| ArchiveError::Corrupt(format!("header: {e}")))?;
        let payload = &bytes[header_end..];
        if hex::encode(Sha256::digest(payload)) != header.payload_sha256 {
            return Err(corrupt("payload checksum mismatch"));
        }
        if payload.len() % 8 != 0 {
            return Err(corrupt("payload is not a whole number of f64 values"));
        }
        let values: Vec<f64> = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let mut tensors = BTreeMap::new();
        for e in header.tensors {
            let len: usize = e.shape.iter().product();
            let data = e
                .offset
                .checked_add(len)
                .and_then(|end| values.get(e.offset..end))
                .ok_or_else(|| ArchiveError::Corrupt(format!("tensor {} out of bounds", e.name)))?;
            let t = Tensor::from_vec(e.shape, data.to_vec())
                .map_err(|err| ArchiveError::Corrupt(err.to_string()))?;
            tensors.insert(e.name, t);
        }
        Ok(Self {
            meta: header.meta,
            tensors,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ArchiveError> {
        // write-then-rename so a crash never leaves a half-written archive
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, self.encode())?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ArchiveError> {
        Self::decode(&fs::read(path)?)
    }
}
