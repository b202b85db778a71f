use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 2051;
pub const LABELS_MAGIC: u32 = 2049;

/// Images decoded from an IDX3 file, pixels scaled to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    /// One row-major vector of `rows * cols` pixels per image.
    pub images: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IdxFile {
    Images(IdxImages),
    Labels(Vec<u8>),
}

/// Parses an IDX file, dispatching on its magic number.
pub fn load_idx(path: &Path) -> Result<IdxFile> {
    let bytes = fs::read(path)?;
    parse_idx(path, &bytes)
}

pub fn parse_idx(path: &Path, bytes: &[u8]) -> Result<IdxFile> {
    match read_u32(path, bytes, 0)? {
        IMAGES_MAGIC => parse_images(path, bytes).map(IdxFile::Images),
        LABELS_MAGIC => parse_labels(path, bytes).map(IdxFile::Labels),
        found => Err(Error::BadMagic {
            path: path.to_path_buf(),
            expected: IMAGES_MAGIC,
            found,
        }),
    }
}

pub fn load_images(path: &Path) -> Result<IdxImages> {
    parse_images(path, &fs::read(path)?)
}

pub fn load_labels(path: &Path) -> Result<Vec<u8>> {
    parse_labels(path, &fs::read(path)?)
}

pub fn parse_images(path: &Path, bytes: &[u8]) -> Result<IdxImages> {
    expect_magic(path, bytes, IMAGES_MAGIC)?;
    let count = read_u32(path, bytes, 4)? as usize;
    let rows = read_u32(path, bytes, 8)? as usize;
    let cols = read_u32(path, bytes, 12)? as usize;
    let per = rows
        .checked_mul(cols)
        .filter(|&p| p > 0)
        .ok_or_else(|| Error::IdxDimension {
            path: path.to_path_buf(),
            detail: format!("image size {rows}x{cols}"),
        })?;
    let payload = payload(path, bytes, 16, count.saturating_mul(per))?;
    let images = payload
        .chunks_exact(per)
        .map(|img| img.iter().map(|&b| f64::from(b) / 255.0).collect())
        .collect();
    Ok(IdxImages { rows, cols, images })
}

pub fn parse_labels(path: &Path, bytes: &[u8]) -> Result<Vec<u8>> {
    expect_magic(path, bytes, LABELS_MAGIC)?;
    let count = read_u32(path, bytes, 4)? as usize;
    Ok(payload(path, bytes, 8, count)?.to_vec())
}

fn expect_magic(path: &Path, bytes: &[u8], expected: u32) -> Result<()> {
    let found = read_u32(path, bytes, 0)?;
    if found != expected {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            expected,
            found,
        });
    }
    Ok(())
}

fn read_u32(path: &Path, bytes: &[u8], at: usize) -> Result<u32> {
    let word = bytes
        .get(at..at + 4)
        .ok_or_else(|| truncated(path, at + 4, bytes.len()))?;
    Ok(u32::from_be_bytes(word.try_into().expect("4 bytes")))
}

fn payload<'a>(path: &Path, bytes: &'a [u8], start: usize, len: usize) -> Result<&'a [u8]> {
    let end = start.saturating_add(len);
    if bytes.len() < end {
        return Err(truncated(path, end, bytes.len()));
    }
    if bytes.len() > end {
        return Err(Error::IdxDimension {
            path: path.to_path_buf(),
            detail: format!("header promises {end} bytes, file has {}", bytes.len()),
        });
    }
    Ok(&bytes[start..end])
}

fn truncated(path: &Path, needed: usize, found: usize) -> Error {
    Error::Truncated {
        path: PathBuf::from(path),
        needed,
        found,
    }
}
