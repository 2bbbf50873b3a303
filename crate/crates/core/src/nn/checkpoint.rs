//! Binary parameter checkpoints.
//!
//! All integers and reals are little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic b"NSDW"
//! 4       4     version, u32 = 1
//! 8       4     dense layer count L, u32
//! then for each dense layer, input side first:
//!         4     in_units, u32
//!         4     out_units, u32
//!         8·in·out  weights, f64, row-major (in_units rows of out_units)
//!         8·out     bias, f64
//! ```
//!
//! Only dense parameters are stored; dropout slots and NSDropout masks are
//! rebuilt from the configuration (masks are persisted separately in mask
//! trace files).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ndcore::Matrix;
use crate::scalar::Scalar;

use super::network::Network;

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"NSDW";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Dense parameters of one layer as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseParams {
    pub weights: Matrix<f64>,
    pub bias: Vec<f64>,
}

fn corrupt(e: std::io::Error) -> Error {
    Error::Checkpoint(e.to_string())
}

pub fn write_checkpoint<T: Scalar, W: Write>(net: &Network<T>, mut out: W) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(&CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(net.dense_layers().count() as u32).to_le_bytes());
    for d in net.dense_layers() {
        buf.extend_from_slice(&(d.in_units() as u32).to_le_bytes());
        buf.extend_from_slice(&(d.out_units() as u32).to_le_bytes());
        for v in d.weights().as_slice().iter().chain(d.bias()) {
            buf.extend_from_slice(&v.as_f64().to_le_bytes());
        }
    }
    out.write_all(&buf).map_err(corrupt)?;
    out.flush().map_err(corrupt)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(corrupt)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; n * 8];
    r.read_exact(&mut bytes).map_err(corrupt)?;
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect())
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<Vec<DenseParams>> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(corrupt)?;
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint(format!("bad magic {magic:02x?}")));
    }
    let version = read_u32(&mut input)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let count = read_u32(&mut input)? as usize;
    let mut layers = Vec::with_capacity(count.min(64));
    for _ in 0..count {
        let i = read_u32(&mut input)? as usize;
        let o = read_u32(&mut input)? as usize;
        let weights = Matrix::from_external(i, o, read_f64s(&mut input, i * o)?).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let bias = read_f64s(&mut input, o)?;
        if bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::Checkpoint("non-finite bias".into()));
        }
        layers.push(DenseParams { weights, bias });
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest).map_err(corrupt)? != 0 {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    Ok(layers)
}

pub fn save_checkpoint<T: Scalar>(net: &Network<T>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_checkpoint(net, BufWriter::new(file))
}

pub fn load_checkpoint(path: &Path) -> Result<Vec<DenseParams>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(BufReader::new(file))
}

impl<T: Scalar> Network<T> {
    /// Overwrites dense parameters from a checkpoint with matching shapes.
    pub fn load_parameters(&mut self, params: &[DenseParams]) -> Result<()> {
        let shapes: Vec<(usize, usize)> = self.dense_layers().map(|d| d.weights().shape()).collect();
        let stored: Vec<(usize, usize)> = params.iter().map(|p| p.weights.shape()).collect();
        if shapes != stored {
            return Err(Error::Checkpoint(format!("checkpoint layers {stored:?} do not match network {shapes:?}")));
        }
        for (d, p) in self.dense_layers_mut().zip(params) {
            *d.weights_mut() = p.weights.cast();
            for (b, &v) in d.bias_mut().iter_mut().zip(&p.bias) {
                *b = T::lit(v);
            }
        }
        Ok(())
    }
}
