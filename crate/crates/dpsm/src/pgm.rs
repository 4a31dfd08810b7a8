//! Binary PGM (P5, maxval 255).

use std::path::Path;

use crate::error::{io_err, Error, Result};

/// Quantize a value in `[0, 1]` (clamped) to a gray level.
pub fn gray_level(v: f64) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v * 255.0).round() as u8
}

/// Encode `pixels` (row-major) as P5 bytes.
pub fn encode_pgm(pixels: &[f64], rows: usize, cols: usize) -> Result<Vec<u8>> {
    if pixels.len() != rows * cols {
        return Err(Error::Format {
            what: "PGM image",
            reason: format!("{} pixels for a {rows}x{cols} image", pixels.len()),
        });
    }
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(pixels.iter().map(|&v| gray_level(v)));
    Ok(out)
}

/// Write `sign · x` as a PGM so that a recovery of `−x̃` renders as `x̃`.
pub fn write_image_pgm(x: &[f64], sign: f64, rows: usize, cols: usize, path: impl AsRef<Path>) -> Result<()> {
    let signed: Vec<f64> = x.iter().map(|v| sign * v).collect();
    let bytes = encode_pgm(&signed, rows, cols)?;
    let path = path.as_ref();
    std::fs::write(path, bytes).map_err(io_err(path))
}

/// Decode a P5 file written by [`encode_pgm`]: `(gray levels, rows, cols)`.
pub fn decode_pgm(bytes: &[u8]) -> Result<(Vec<u8>, usize, usize)> {
    let bad = |reason: &str| Error::Format {
        what: "PGM image",
        reason: reason.to_string(),
    };
    // header: magic, width, height, maxval, each followed by one whitespace byte
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ASCII header"))?);
    }
    pos += 1;
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(bad("expected P5 with maxval 255"));
    }
    let cols: usize = fields[1].parse().map_err(|_| bad("bad width"))?;
    let rows: usize = fields[2].parse().map_err(|_| bad("bad height"))?;
    let data = bytes.get(pos..).unwrap_or_default();
    if data.len() != rows * cols {
        return Err(bad("pixel count does not match the header"));
    }
    Ok((data.to_vec(), rows, cols))
}
