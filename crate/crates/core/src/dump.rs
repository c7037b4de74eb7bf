//! Flat binary dumps: one JSON header line terminated by `\n`, followed by
//! the payload as little-endian `f64` values in row-major order.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

pub const DTYPE: &str = "f64le";

/// Named slice of a dump payload, used when several arrays share one file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpSegment {
    pub name: String,
    pub shape: Vec<usize>,
    /// Offset in elements from the start of the payload.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub dtype: String,
    pub shape: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub segments: Vec<DumpSegment>,
}

impl DumpHeader {
    pub fn new(shape: Vec<usize>) -> Self {
        Self {
            dtype: DTYPE.to_string(),
            shape,
            segments: Vec::new(),
        }
    }

    pub fn element_count(&self) -> usize {
        self.shape.iter().product()
    }
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

pub fn write_dump<W: Write>(mut out: W, header: &DumpHeader, data: &[f64]) -> io::Result<()> {
    if header.element_count() != data.len() {
        return Err(invalid(format!(
            "header shape {:?} holds {} values but {} were given",
            header.shape,
            header.element_count(),
            data.len()
        )));
    }
    serde_json::to_writer(&mut out, header)?;
    out.write_all(b"\n")?;
    for v in data {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()
}

pub fn read_dump<R: BufRead>(mut input: R) -> io::Result<(DumpHeader, Vec<f64>)> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: DumpHeader =
        serde_json::from_str(line.trim_end()).map_err(|e| invalid(format!("bad dump header: {e}")))?;
    if header.dtype != DTYPE {
        return Err(invalid(format!("unsupported dtype {}", header.dtype)));
    }
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != header.element_count() * 8 {
        return Err(invalid(format!(
            "payload has {} bytes, header shape {:?} needs {}",
            bytes.len(),
            header.shape,
            header.element_count() * 8
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((header, data))
}
