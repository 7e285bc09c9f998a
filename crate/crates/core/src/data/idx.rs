//! IDX container parsing (the MNIST distribution format).

use std::io::Read;
use std::path::Path;

use crate::error::{Error, FormatError, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const MNIST_SIDE: usize = 28;

/// Images stored as one contiguous `count × rows × cols` byte buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Images {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl Images {
    pub fn count(&self) -> usize {
        self.pixels.len().checked_div(self.rows * self.cols).unwrap_or(0)
    }

    pub fn pixel_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.pixel_count();
        &self.pixels[i * n..(i + 1) * n]
    }

    pub fn select(&self, indices: &[usize]) -> Images {
        let mut pixels = Vec::with_capacity(indices.len() * self.pixel_count());
        for &i in indices {
            pixels.extend_from_slice(self.image(i));
        }
        Images {
            rows: self.rows,
            cols: self.cols,
            pixels,
        }
    }
}

fn be_u32(bytes: &[u8], offset: usize) -> Result<u32, FormatError> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or(FormatError::Truncated {
            needed: offset + 4,
            available: bytes.len(),
        })
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<(), FormatError> {
    let found = be_u32(bytes, 0)?;
    if found != expected {
        return Err(FormatError::BadMagic { expected, found });
    }
    Ok(())
}

fn payload(bytes: &[u8], header: usize, len: usize) -> Result<&[u8], FormatError> {
    let needed = header + len;
    match bytes.len().cmp(&needed) {
        std::cmp::Ordering::Less => Err(FormatError::Truncated {
            needed,
            available: bytes.len(),
        }),
        std::cmp::Ordering::Greater => Err(FormatError::TrailingBytes(bytes.len() - needed)),
        std::cmp::Ordering::Equal => Ok(&bytes[header..]),
    }
}

/// Parses an IDX image file. Unless `permissive`, images must be 28×28.
pub fn parse_idx_images(bytes: &[u8], permissive: bool) -> Result<Images> {
    check_magic(bytes, IMAGE_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    if !permissive && (rows != MNIST_SIDE || cols != MNIST_SIDE) {
        return Err(FormatError::Dimensions(format!(
            "expected {MNIST_SIDE}x{MNIST_SIDE} images, got {rows}x{cols}"
        ))
        .into());
    }
    let len = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| FormatError::Dimensions("image payload size overflows".into()))?;
    let pixels = payload(bytes, 16, len)?.to_vec();
    Ok(Images { rows, cols, pixels })
}

/// Parses an IDX label file; every label must be a digit `0..=9`.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABEL_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    let labels = payload(bytes, 8, count)?;
    if let Some((i, &bad)) = labels.iter().enumerate().find(|(_, &l)| l > 9) {
        return Err(Error::Value(format!("label {bad} at index {i} is not a digit")));
    }
    Ok(labels.to_vec())
}

/// Reads a file, transparently inflating it when it starts with the gzip
/// signature `1f 8b`.
pub fn read_maybe_gzip(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let path = path.as_ref();
    let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        flate2::read::GzDecoder::new(&raw[..])
            .read_to_end(&mut out)
            .map_err(|e| FormatError::Gzip(format!("{}: {e}", path.display())))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}
