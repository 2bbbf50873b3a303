//! CIFAR-10 binary batches: fixed 3073-byte records, one label byte followed
//! by 1024 red, 1024 green and 1024 blue bytes (row-major 32×32 planes).
//! Pixels are kept in that channel-major order.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::RawDataset;

pub const CIFAR_RECORD_BYTES: usize = 3073;
const CIFAR_DIM: usize = CIFAR_RECORD_BYTES - 1;

pub fn parse_cifar10(bytes: &[u8]) -> Result<RawDataset> {
    if !bytes.len().is_multiple_of(CIFAR_RECORD_BYTES) {
        return Err(Error::CifarRecordSize { len: bytes.len(), record: CIFAR_RECORD_BYTES });
    }
    let rows = bytes.len() / CIFAR_RECORD_BYTES;
    let mut pixels = Vec::with_capacity(rows * CIFAR_DIM);
    let mut labels = Vec::with_capacity(rows);
    for record in bytes.chunks_exact(CIFAR_RECORD_BYTES) {
        labels.push(record[0]);
        pixels.extend_from_slice(&record[1..]);
    }
    Ok(RawDataset { pixels, rows, dim: CIFAR_DIM, labels })
}

/// Concatenates the given batch files in order.
pub fn load_cifar10<P: AsRef<Path>>(paths: &[P]) -> Result<RawDataset> {
    let mut all = RawDataset { pixels: Vec::new(), rows: 0, dim: CIFAR_DIM, labels: Vec::new() };
    for path in paths {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let part = parse_cifar10(&bytes)?;
        all.pixels.extend(part.pixels);
        all.labels.extend(part.labels);
        all.rows += part.rows;
    }
    Ok(all)
}

pub fn write_cifar10<W: Write>(mut out: W, data: &RawDataset) -> std::io::Result<()> {
    for i in 0..data.rows {
        out.write_all(&[data.labels[i]])?;
        out.write_all(data.image(i))?;
    }
    Ok(())
}
