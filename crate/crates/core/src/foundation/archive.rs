//! `QHM1` model archive: an ordered list of named `f64` tensors.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "QHM1"  u32 entry_count
//! per entry: u32 name_len, name bytes (UTF-8), u32 rank, rank × u64 dims,
//!            product(dims) × f64 payload
//! ```

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, FormatError, Result};
use crate::foundation::Tensor;

pub const ARCHIVE_MAGIC: [u8; 4] = *b"QHM1";

/// Named tensors in insertion order. Names are unique and non-empty.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Archive {
    entries: Vec<(String, Tensor)>,
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<(String, Tensor)>) -> Result<Self> {
        let mut archive = Archive::new();
        for (name, tensor) in entries {
            archive.push(name, tensor)?;
        }
        Ok(archive)
    }

    pub fn push(&mut self, name: impl Into<String>, tensor: Tensor) -> Result<()> {
        let name = name.into();
        if name.is_empty() {
            return Err(FormatError::EmptyName.into());
        }
        if self.get(&name).is_some() {
            return Err(FormatError::DuplicateName(name).into());
        }
        self.entries.push((name, tensor));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    /// Like [`Archive::get`] but reports the missing name.
    pub fn require(&self, name: &str) -> Result<&Tensor> {
        self.get(name)
            .ok_or_else(|| Error::Value(format!("archive has no entry {name:?}")))
    }

    pub fn entries(&self) -> &[(String, Tensor)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(String, Tensor)> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Appends every entry of `other`, prefixing names with `prefix`.
    pub fn extend_prefixed(&mut self, prefix: &str, other: Archive) -> Result<()> {
        for (name, t) in other.entries {
            self.push(format!("{prefix}{name}"), t)?;
        }
        Ok(())
    }

    /// Entries whose name starts with `prefix`, with the prefix stripped.
    pub fn sub_archive(&self, prefix: &str) -> Archive {
        Archive {
            entries: self
                .entries
                .iter()
                .filter_map(|(n, t)| n.strip_prefix(prefix).map(|s| (s.to_string(), t.clone())))
                .collect(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&ARCHIVE_MAGIC);
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for (name, tensor) in &self.entries {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(&(tensor.rank() as u32).to_le_bytes());
            for &d in tensor.shape() {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for &v in tensor.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(4)?;
        if magic != ARCHIVE_MAGIC {
            return Err(FormatError::BadMagic {
                expected: u32::from_be_bytes(ARCHIVE_MAGIC),
                found: u32::from_be_bytes(magic.try_into().unwrap()),
            }
            .into());
        }
        let count = r.u32()? as usize;
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        for _ in 0..count {
            let name_len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(name_len)?)
                .map_err(|_| FormatError::InvalidName)?
                .to_string();
            if name.is_empty() {
                return Err(FormatError::EmptyName.into());
            }
            if !seen.insert(name.clone()) {
                return Err(FormatError::DuplicateName(name).into());
            }
            let rank = r.u32()? as usize;
            let mut shape = Vec::with_capacity(rank.min(16));
            let mut numel: usize = 1;
            for _ in 0..rank {
                let d = usize::try_from(r.u64()?)
                    .map_err(|_| FormatError::Dimensions("dimension exceeds usize".into()))?;
                numel = numel
                    .checked_mul(d)
                    .ok_or_else(|| FormatError::Dimensions("element count overflows".into()))?;
                shape.push(d);
            }
            let payload_len = numel
                .checked_mul(8)
                .ok_or_else(|| FormatError::Dimensions("payload size overflows".into()))?;
            let payload = r.take(payload_len)?;
            let data = payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            entries.push((name, Tensor::new(shape, data)?));
        }
        if r.pos != bytes.len() {
            return Err(FormatError::TrailingBytes(bytes.len() - r.pos).into());
        }
        Ok(Archive { entries })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let available = self.bytes.len() - self.pos;
        if n > available {
            return Err(FormatError::Truncated {
                needed: n,
                available,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Writes `entries` to `path`. Names must be unique and non-empty.
pub fn write_archive(entries: &[(String, Tensor)], path: impl AsRef<Path>) -> Result<()> {
    Archive::from_entries(entries.to_vec())?.save(path)
}

pub fn read_archive(path: impl AsRef<Path>) -> Result<Vec<(String, Tensor)>> {
    Ok(Archive::load(path)?.into_entries())
}
