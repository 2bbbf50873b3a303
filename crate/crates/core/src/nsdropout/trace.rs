//! Mask trace files.
//!
//! A trace is a comma-separated text file with the header
//!
//! ```text
//! refresh,epoch,slot,class,units,kept_hex
//! ```
//!
//! and one record per class per mask refresh. `refresh` counts refreshes from
//! 1 within a run, `epoch` is 1-based, `slot` is the index of the
//! neuron-specific dropout layer among such layers (input side first).
//! `kept_hex` packs the keep flags little-endian by unit: byte `k` holds units
//! `8k..8k+7` with unit `8k` in the least significant bit, bytes are written in
//! ascending `k` as two lowercase hex digits, and padding bits are zero.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

use super::{mask_churn, MaskSet};

pub const TRACE_HEADER: &str = "refresh,epoch,slot,class,units,kept_hex";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskTraceRecord {
    pub refresh: usize,
    pub epoch: usize,
    pub slot: usize,
    pub class: usize,
    pub kept: Vec<bool>,
}

pub fn encode_kept_hex(kept: &[bool]) -> String {
    kept.chunks(8)
        .map(|chunk| {
            let byte = chunk.iter().enumerate().fold(0u8, |acc, (bit, &k)| acc | (u8::from(k) << bit));
            format!("{byte:02x}")
        })
        .collect()
}

pub fn decode_kept_hex(hex: &str, units: usize) -> Option<Vec<bool>> {
    if hex.len() != units.div_ceil(8) * 2 || !hex.is_ascii() {
        return None;
    }
    let mut kept = Vec::with_capacity(units);
    for k in 0..hex.len() / 2 {
        let byte = u8::from_str_radix(&hex[2 * k..2 * k + 2], 16).ok()?;
        for bit in 0..8 {
            if kept.len() < units {
                kept.push(byte >> bit & 1 == 1);
            } else if byte >> bit & 1 == 1 {
                return None;
            }
        }
    }
    Some(kept)
}

/// Streams trace records to any writer, header first.
pub struct MaskTraceWriter<W: Write> {
    out: W,
}

impl<W: Write> MaskTraceWriter<W> {
    pub fn new(mut out: W) -> std::io::Result<Self> {
        writeln!(out, "{TRACE_HEADER}")?;
        Ok(Self { out })
    }

    pub fn write_masks(&mut self, refresh: usize, epoch: usize, slot: usize, masks: &MaskSet) -> std::io::Result<()> {
        for (class, row) in masks.rows().enumerate() {
            writeln!(self.out, "{refresh},{epoch},{slot},{class},{},{}", masks.units(), encode_kept_hex(row))?;
        }
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

pub fn read_mask_trace<R: BufRead>(reader: R) -> Result<Vec<MaskTraceRecord>> {
    let mut records = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| Error::MaskTrace { line: line_no, reason: e.to_string() })?;
        let bad = |reason: &str| Error::MaskTrace { line: line_no, reason: reason.to_string() };
        if n == 0 {
            if line.trim() != TRACE_HEADER {
                return Err(bad("missing header"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 6 {
            return Err(bad("expected 6 fields"));
        }
        let num = |i: usize| fields[i].parse::<usize>().map_err(|_| bad("non-integer field"));
        let units = num(4)?;
        let kept = decode_kept_hex(fields[5], units).ok_or_else(|| bad("bad kept_hex"))?;
        records.push(MaskTraceRecord { refresh: num(0)?, epoch: num(1)?, slot: num(2)?, class: num(3)?, kept });
    }
    Ok(records)
}

/// Mask set of one slot as of the last refresh of each epoch, in epoch order.
pub fn masks_by_epoch(records: &[MaskTraceRecord], slot: usize) -> Result<Vec<(usize, MaskSet)>> {
    // epoch -> (refresh, class -> kept)
    let mut latest: BTreeMap<usize, (usize, BTreeMap<usize, Vec<bool>>)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.slot == slot) {
        let entry = latest.entry(r.epoch).or_insert((r.refresh, BTreeMap::new()));
        if r.refresh > entry.0 {
            *entry = (r.refresh, BTreeMap::new());
        }
        if r.refresh == entry.0 {
            entry.1.insert(r.class, r.kept.clone());
        }
    }
    latest
        .into_iter()
        .map(|(epoch, (_, classes))| {
            let rows: Vec<Vec<bool>> = classes.into_values().collect();
            Ok((epoch, MaskSet::from_rows(rows, 0.0)?))
        })
        .collect()
}

/// Mean per-class churn between consecutive epochs of one slot; one value per
/// epoch pair.
pub fn churn_series(records: &[MaskTraceRecord], slot: usize) -> Result<Vec<f64>> {
    let by_epoch = masks_by_epoch(records, slot)?;
    by_epoch.windows(2).map(|w| Ok(mask_churn(&w[1].1, &w[0].1)?.mean)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_layout() {
        let kept = [true, false, false, false, false, false, false, false, false, true];
        assert_eq!(encode_kept_hex(&kept), "0102");
        assert_eq!(decode_kept_hex("0102", 10).unwrap(), kept);
        assert!(decode_kept_hex("0106", 10).is_none(), "padding bit set");
        assert!(decode_kept_hex("01", 10).is_none());
    }

    #[test]
    fn write_then_read() {
        let m = MaskSet::from_rows(vec![vec![true, false, true], vec![false, true, true]], 0.34).unwrap();
        let mut w = MaskTraceWriter::new(Vec::new()).unwrap();
        w.write_masks(1, 1, 0, &m).unwrap();
        w.write_masks(2, 2, 0, &MaskSet::pass_through(2, 3)).unwrap();
        let bytes = w.into_inner();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("refresh,epoch,slot,class,units,kept_hex\n1,1,0,0,3,05\n"));
        let recs = read_mask_trace(bytes.as_slice()).unwrap();
        assert_eq!(recs.len(), 4);
        assert_eq!(churn_series(&recs, 0).unwrap(), vec![1.0]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_mask_trace("nope\n".as_bytes()).is_err());
        let text = format!("{TRACE_HEADER}\n1,1,0,0,3\n");
        assert!(matches!(read_mask_trace(text.as_bytes()), Err(Error::MaskTrace { line: 2, .. })));
    }
}
