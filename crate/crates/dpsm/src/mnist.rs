//! IDX image files (`0x00000803`, big-endian header, row-major `u8` pixels).

use std::path::Path;

use crate::error::{io_err, Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
const HEADER_LEN: usize = 16;

/// A grayscale image with pixels in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub pixels: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
}

fn be_u32(bytes: &[u8], at: usize, what: &'static str) -> Result<u32> {
    let field = bytes.get(at..at + 4).ok_or(Error::Truncated {
        what,
        needed: at + 4,
        available: bytes.len(),
    })?;
    Ok(u32::from_be_bytes(field.try_into().expect("four bytes")))
}

/// Decode image `index` of an in-memory IDX file, block-averaging by
/// `downsample` (which must divide both sides).
pub fn parse_idx_image(bytes: &[u8], index: usize, downsample: usize) -> Result<Image> {
    let magic = be_u32(bytes, 0, "IDX magic")?;
    if magic != IMAGE_MAGIC {
        return Err(Error::BadMagic {
            found: magic,
            expected: IMAGE_MAGIC,
        });
    }
    let count = be_u32(bytes, 4, "IDX image count")? as usize;
    let rows = be_u32(bytes, 8, "IDX row count")? as usize;
    let cols = be_u32(bytes, 12, "IDX column count")? as usize;
    if index >= count {
        return Err(Error::IndexOutOfRange { index, count });
    }
    let span = rows
        .checked_mul(cols)
        .and_then(|size| Some((size, index.checked_mul(size)?.checked_add(HEADER_LEN)?)))
        .and_then(|(size, start)| Some((start, start.checked_add(size)?)));
    let (start, end) = span.ok_or(Error::Format {
        what: "IDX header",
        reason: format!("{count} images of {rows}x{cols} pixels overflow the address space"),
    })?;
    let raw = bytes.get(start..end).ok_or(Error::Truncated {
        what: "IDX pixel data",
        needed: end,
        available: bytes.len(),
    })?;
    let pixels = raw.iter().map(|&b| f64::from(b) / 255.0).collect();
    downsample_image(
        Image {
            pixels,
            rows,
            cols,
        },
        downsample,
    )
}

/// Read image `index` from an IDX file on disk.
pub fn load_mnist_image(path: impl AsRef<Path>, index: usize, downsample: usize) -> Result<Image> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    parse_idx_image(&bytes, index, downsample)
}

/// Average non-overlapping `factor × factor` blocks.
pub fn downsample_image(image: Image, factor: usize) -> Result<Image> {
    if factor == 0 || !image.rows.is_multiple_of(factor) || !image.cols.is_multiple_of(factor) {
        return Err(Error::Format {
            what: "downsample factor",
            reason: format!("{factor} does not divide a {}x{} image", image.rows, image.cols),
        });
    }
    if factor == 1 {
        return Ok(image);
    }
    let (rows, cols) = (image.rows / factor, image.cols / factor);
    let area = (factor * factor) as f64;
    let mut pixels = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let mut s = 0.0;
            for dr in 0..factor {
                let base = (r * factor + dr) * image.cols + c * factor;
                s += image.pixels[base..base + factor].iter().sum::<f64>();
            }
            pixels.push(s / area);
        }
    }
    Ok(Image { pixels, rows, cols })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(count: u32, rows: u32, cols: u32, data: &[u8]) -> Vec<u8> {
        let mut v = Vec::new();
        for x in [IMAGE_MAGIC, count, rows, cols] {
            v.extend_from_slice(&x.to_be_bytes());
        }
        v.extend_from_slice(data);
        v
    }

    #[test]
    fn decodes_and_scales() {
        let bytes = idx(2, 2, 2, &[0, 255, 51, 102, 1, 2, 3, 4]);
        let img = parse_idx_image(&bytes, 0, 1).unwrap();
        assert_eq!((img.rows, img.cols), (2, 2));
        assert_eq!(img.pixels, vec![0.0, 1.0, 0.2, 0.4]);
        let img = parse_idx_image(&bytes, 1, 2).unwrap();
        assert_eq!(img.pixels, vec![10.0 / 4.0 / 255.0]);
    }

    #[test]
    fn header_guards() {
        let good = idx(1, 2, 2, &[1, 2, 3, 4]);
        for cut in [0, 3, 7, 11, 15, 19] {
            assert!(matches!(parse_idx_image(&good[..cut], 0, 1), Err(Error::Truncated { .. })), "cut {cut}");
        }
        let mut labels = good.clone();
        labels[3] = 0x01;
        assert!(matches!(parse_idx_image(&labels, 0, 1), Err(Error::BadMagic { found: 0x801, .. })));
        assert!(matches!(parse_idx_image(&good, 1, 1), Err(Error::IndexOutOfRange { index: 1, count: 1 })));
        assert!(matches!(parse_idx_image(&good, 0, 3), Err(Error::Format { .. })));
        let huge = idx(2, u32::MAX, u32::MAX, &[]);
        assert!(parse_idx_image(&huge, 1, 1).is_err());
    }
}
