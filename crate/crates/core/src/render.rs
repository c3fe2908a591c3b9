//! Grayscale PGM rendering of intensity matrices.

use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Binary PGM (P5, maxval 255): width is the drift count, height the
/// retention count, one pixel per cell in storage order.
///
/// Values are mapped linearly from [min, max] to [0, 255] with rounding;
/// with `log` each value is first replaced by `log10(1 + max(x, 0))`.
/// A constant matrix renders all zeros. Non-finite cells render as 0 and do
/// not take part in the range.
pub fn encode_pgm(intensity: &Array2<f64>, log: bool) -> Vec<u8> {
    let (rows, cols) = intensity.dim();
    let values: Vec<f64> = intensity
        .iter()
        .map(|&x| if log { (1.0 + x.max(0.0)).log10() } else { x })
        .collect();
    let (lo, hi) = values
        .iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.reserve(values.len());
    let range = hi - lo;
    for v in values {
        let px = if !v.is_finite() || range <= 0.0 {
            0
        } else {
            ((v - lo) / range * 255.0).round().clamp(0.0, 255.0) as u8
        };
        out.push(px);
    }
    out
}

pub fn write_pgm(intensity: &Array2<f64>, log: bool, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_pgm(intensity, log)).map_err(|e| Error::io(path, e))
}
