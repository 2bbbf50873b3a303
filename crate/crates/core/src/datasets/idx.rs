//! IDX files as distributed for MNIST and Fashion-MNIST.
//!
//! Big-endian. Images: magic `0x00000803`, u32 count, u32 rows, u32 cols,
//! then `count·rows·cols` unsigned bytes. Labels: magic `0x00000801`, u32
//! count, then `count` bytes.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::RawDataset;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], at: usize, what: &'static str) -> Result<u32> {
    let b = bytes.get(at..at + 4).ok_or(Error::Truncated { what, expected: at + 4, actual: bytes.len() })?;
    Ok(u32::from_be_bytes(b.try_into().expect("4 bytes")))
}

fn check_magic(bytes: &[u8], expected: u32, what: &'static str) -> Result<()> {
    let found = be_u32(bytes, 0, what)?;
    if found != expected {
        return Err(Error::BadMagic { expected, found });
    }
    Ok(())
}

fn body<'a>(bytes: &'a [u8], header: usize, len: usize, what: &'static str) -> Result<&'a [u8]> {
    bytes.get(header..header + len).ok_or(Error::Truncated { what, expected: header + len, actual: bytes.len() })
}

/// Returns `(count, rows, cols, pixels)`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, usize, Vec<u8>)> {
    const WHAT: &str = "IDX image file";
    check_magic(bytes, IDX_IMAGES_MAGIC, WHAT)?;
    let count = be_u32(bytes, 4, WHAT)? as usize;
    let rows = be_u32(bytes, 8, WHAT)? as usize;
    let cols = be_u32(bytes, 12, WHAT)? as usize;
    let pixels = body(bytes, 16, count * rows * cols, WHAT)?;
    Ok((count, rows, cols, pixels.to_vec()))
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    const WHAT: &str = "IDX label file";
    check_magic(bytes, IDX_LABELS_MAGIC, WHAT)?;
    let count = be_u32(bytes, 4, WHAT)? as usize;
    Ok(body(bytes, 8, count, WHAT)?.to_vec())
}

pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<RawDataset> {
    let images = std::fs::read(images_path).map_err(|e| Error::io(images_path, e))?;
    let labels = std::fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;
    let (count, rows, cols, pixels) = parse_idx_images(&images)?;
    let labels = parse_idx_labels(&labels)?;
    if labels.len() != count {
        return Err(Error::CountMismatch { images: count, labels: labels.len() });
    }
    Ok(RawDataset { pixels, rows: count, dim: rows * cols, labels })
}

pub fn write_idx_images<W: Write>(mut out: W, rows: usize, cols: usize, pixels: &[u8]) -> std::io::Result<()> {
    let count = pixels.len() / (rows * cols).max(1);
    out.write_all(&IDX_IMAGES_MAGIC.to_be_bytes())?;
    for v in [count, rows, cols] {
        out.write_all(&(v as u32).to_be_bytes())?;
    }
    out.write_all(pixels)
}

pub fn write_idx_labels<W: Write>(mut out: W, labels: &[u8]) -> std::io::Result<()> {
    out.write_all(&IDX_LABELS_MAGIC.to_be_bytes())?;
    out.write_all(&(labels.len() as u32).to_be_bytes())?;
    out.write_all(labels)
}
