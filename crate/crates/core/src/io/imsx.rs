//! IMSX: a minimal little-endian spectrum container.
//!
//! ```text
//! offset  size        field
//! 0       4           magic "IMSX"
//! 4       2           format version (u16, = 1)
//! 6       4           header length H (u32)
//! 10      H           UTF-8 JSON header: sample_id, drift_axis, retention_axis, label
//! 10+H    4*rows*cols f32 intensities, row-major (retention rows x drift columns)
//! ```
//!
//! The file ends exactly at the end of the payload.

use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{Axis, ImsSpectrum, SampleLabel};

pub const IMSX_MAGIC: [u8; 4] = *b"IMSX";
pub const IMSX_VERSION: u16 = 1;
const PREAMBLE_LEN: usize = 10;

#[derive(Serialize, Deserialize)]
struct Header {
    sample_id: String,
    drift_axis: Axis,
    retention_axis: Axis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<SampleLabel>,
}

pub fn encode_imsx(spectrum: &ImsSpectrum) -> Vec<u8> {
    let header = Header {
        sample_id: spectrum.sample_id().to_string(),
        drift_axis: spectrum.drift_axis().clone(),
        retention_axis: spectrum.retention_axis().clone(),
        label: spectrum.label(),
    };
    let header = serde_json::to_vec(&header).expect("header serializes");
    let (rows, cols) = spectrum.shape();
    let mut out = Vec::with_capacity(PREAMBLE_LEN + header.len() + 4 * rows * cols);
    out.extend_from_slice(&IMSX_MAGIC);
    out.extend_from_slice(&IMSX_VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for &v in spectrum.intensity().iter() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_imsx(bytes: &[u8]) -> Result<ImsSpectrum> {
    if bytes.len() < 4 || bytes[..4] != IMSX_MAGIC {
        return Err(Error::BadMagic {
            expected: IMSX_MAGIC,
            found: bytes[..bytes.len().min(4)].to_vec(),
        });
    }
    if bytes.len() < PREAMBLE_LEN {
        return Err(Error::MalformedHeader {
            offset: bytes.len(),
            message: format!("file ends inside the {PREAMBLE_LEN}-byte preamble"),
        });
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != IMSX_VERSION {
        return Err(Error::UnsupportedVersion { version, offset: 4 });
    }
    let header_len = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let header_end = PREAMBLE_LEN
        .checked_add(header_len)
        .filter(|&end| end <= bytes.len())
        .ok_or_else(|| Error::MalformedHeader {
            offset: 6,
            message: format!(
                "header length {header_len} runs past end of file ({} bytes)",
                bytes.len()
            ),
        })?;
    let header: Header = serde_json::from_slice(&bytes[PREAMBLE_LEN..header_end]).map_err(|e| {
        Error::MalformedHeader {
            offset: PREAMBLE_LEN + e.column().saturating_sub(1),
            message: e.to_string(),
        }
    })?;
    for axis in [&header.drift_axis, &header.retention_axis] {
        axis.check().map_err(|e| Error::MalformedHeader {
            offset: PREAMBLE_LEN,
            message: e.to_string(),
        })?;
    }

    let rows = header.retention_axis.count;
    let cols = header.drift_axis.count;
    let payload = &bytes[header_end..];
    let expected = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| Error::MalformedHeader {
            offset: PREAMBLE_LEN,
            message: format!("{rows}x{cols} cells overflow"),
        })?;
    if payload.len() != expected {
        return Err(Error::TruncatedPayload {
            offset: header_end,
            expected,
            found: payload.len(),
        });
    }
    let values: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    let intensity = Array2::from_shape_vec((rows, cols), values).expect("length checked");
    ImsSpectrum::new(header.sample_id, header.drift_axis, header.retention_axis, intensity)
        .map(|s| s.with_label(header.label))
        .map_err(|e| Error::MalformedHeader {
            offset: PREAMBLE_LEN,
            message: e.to_string(),
        })
}

pub fn read_imsx(path: impl AsRef<Path>) -> Result<ImsSpectrum> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_imsx(&bytes)
}

/// Writes through a temporary file in the destination directory, so a failed
/// write never leaves a partial file behind. Returns the byte count.
pub fn write_imsx(spectrum: &ImsSpectrum, path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let bytes = encode_imsx(spectrum);
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(bytes.len())
}
