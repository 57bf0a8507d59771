//! IDX container reader/writer (the MNIST distribution format).
//!
//! Layout, all integers big-endian: a `u32` magic (`0x00000803` for rank-3
//! `u8` image tensors, `0x00000801` for rank-1 `u8` label vectors), one `u32`
//! per dimension, then the raw bytes. Gzip-compressed files are detected by
//! their `1f 8b` prefix and inflated transparently.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImage {
    /// Row-major `rows × cols` grayscale bytes.
    pub pixels: Vec<u8>,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImageSet {
    pub rows: usize,
    pub cols: usize,
    pub images: Vec<RawImage>,
}

fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&bytes[..]).read_to_end(&mut out).map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(bytes)
    }
}

fn be_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::at_offset(offset as u64, format!("truncated header: missing {what}")))
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<()> {
    let magic = be_u32(bytes, 0, "magic number")?;
    if magic != expected {
        return Err(Error::at_offset(0, format!("bad magic 0x{magic:08x}, expected 0x{expected:08x}")));
    }
    Ok(())
}

fn check_body(bytes: &[u8], header: usize, expected: usize) -> Result<()> {
    let body = bytes.len() - header;
    if body < expected {
        return Err(Error::at_offset(
            bytes.len() as u64,
            format!("truncated data: header promises {expected} bytes, found {body}"),
        ));
    }
    if body > expected {
        return Err(Error::at_offset(
            (header + expected) as u64,
            format!("{} trailing bytes after declared data", body - expected),
        ));
    }
    Ok(())
}

/// Parse an image tensor: `(rows, cols, per-image pixel buffers)`.
pub fn parse_images(bytes: &[u8]) -> Result<(usize, usize, Vec<Vec<u8>>)> {
    check_magic(bytes, IMAGES_MAGIC)?;
    let count = be_u32(bytes, 4, "image count")? as usize;
    let rows = be_u32(bytes, 8, "row count")? as usize;
    let cols = be_u32(bytes, 12, "column count")? as usize;
    let size = rows * cols;
    check_body(bytes, 16, count * size)?;
    let images = bytes[16..].chunks_exact(size.max(1)).take(count).map(<[u8]>::to_vec).collect();
    Ok((rows, cols, images))
}

pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABELS_MAGIC)?;
    let count = be_u32(bytes, 4, "label count")? as usize;
    check_body(bytes, 8, count)?;
    Ok(bytes[8..].to_vec())
}

/// Read an image file and its label file into labelled byte matrices.
pub fn load_mnist_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<RawImageSet> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();
    let (rows, cols, images) =
        parse_images(&read_maybe_gz(images_path)?).map_err(|e| with_path(e, images_path))?;
    let labels = parse_labels(&read_maybe_gz(labels_path)?).map_err(|e| with_path(e, labels_path))?;
    if images.len() != labels.len() {
        return Err(Error::at_offset(
            4,
            format!(
                "{} declares {} images but {} declares {} labels",
                images_path.display(),
                images.len(),
                labels_path.display(),
                labels.len()
            ),
        ));
    }
    let images = images.into_iter().zip(labels).map(|(pixels, label)| RawImage { pixels, label }).collect();
    Ok(RawImageSet { rows, cols, images })
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Format { location, message } => {
            Error::Format { location: format!("{} {location}", path.display()), message }
        }
        other => other,
    }
}

pub fn encode_images(rows: usize, cols: usize, images: &[Vec<u8>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * rows * cols);
    for v in [IMAGES_MAGIC, images.len() as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    for img in images {
        out.extend_from_slice(img);
    }
    out
}

pub fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Write an uncompressed IDX image/label pair.
pub fn write_mnist_idx(set: &RawImageSet, images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<()> {
    let pixels: Vec<Vec<u8>> = set.images.iter().map(|i| i.pixels.clone()).collect();
    let labels: Vec<u8> = set.images.iter().map(|i| i.label).collect();
    write_file(images_path.as_ref(), &encode_images(set.rows, set.cols, &pixels))?;
    write_file(labels_path.as_ref(), &encode_labels(&labels))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::File::create(path).and_then(|mut f| f.write_all(bytes)).map_err(|e| Error::io(path, e))
}
