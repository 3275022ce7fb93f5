//! Sample batch serialization.
//!
//! Binary layout: little-endian `u64` dimension, little-endian `u64` count,
//! then `d·n` little-endian `f64` values, row-major.
//!
//! CSV layout: a header `x0,x1,…` followed by one sample per row, every
//! value written with 17 significant digits.

use std::io::{Read, Write};

use super::SampleBatch;
use crate::error::{invalid, Error, Result};

fn io_err(e: std::io::Error) -> Error {
    Error::InvalidParameter(format!("i/o: {e}"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidParameter(format!("csv: {e}"))
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn write_binary<W: Write>(batch: &SampleBatch, mut w: W) -> Result<()> {
    w.write_all(&(batch.dimension() as u64).to_le_bytes()).map_err(io_err)?;
    w.write_all(&(batch.len() as u64).to_le_bytes()).map_err(io_err)?;
    let mut buf = Vec::with_capacity(8 * batch.values().len());
    for v in batch.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf).map_err(io_err)
}

pub fn read_binary<R: Read>(mut r: R) -> Result<SampleBatch> {
    let mut word = [0u8; 8];
    r.read_exact(&mut word).map_err(io_err)?;
    let d = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word).map_err(io_err)?;
    let n = u64::from_le_bytes(word) as usize;
    let len = d
        .checked_mul(n)
        .and_then(|v| v.checked_mul(8))
        .ok_or_else(|| invalid("batch header overflows"))?;
    let mut bytes = Vec::new();
    r.take(len as u64).read_to_end(&mut bytes).map_err(io_err)?;
    if bytes.len() != len {
        return Err(invalid(format!(
            "truncated batch: expected {len} payload bytes, found {}",
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    SampleBatch::new(d, data)
}

pub fn write_csv<W: Write>(batch: &SampleBatch, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record((0..batch.dimension()).map(|j| format!("x{j}")))
        .map_err(csv_err)?;
    for row in batch.rows() {
        out.write_record(row.iter().map(|&v| fmt_f64(v))).map_err(csv_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn read_csv<R: Read>(r: R) -> Result<SampleBatch> {
    let mut input = csv::Reader::from_reader(r);
    let d = input.headers().map_err(csv_err)?.len();
    let mut data = Vec::new();
    for record in input.records() {
        let record = record.map_err(csv_err)?;
        for field in record.iter() {
            data.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| invalid(format!("bad value {field:?}: {e}")))?,
            );
        }
    }
    SampleBatch::new(d, data)
}
