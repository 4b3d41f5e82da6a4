use std::path::Path;

use crate::error::{Error, Location, Result};
use crate::nn::Matrix;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

fn format_error(offset: usize, message: String) -> Error {
    Error::Format {
        location: Location::Byte(offset as u64),
        message,
    }
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    let slice = bytes
        .get(offset..offset + 4)
        .ok_or_else(|| format_error(offset, format!("header truncated: need 4 bytes, file has {}", bytes.len())))?;
    Ok(u32::from_be_bytes(slice.try_into().expect("four bytes")))
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<()> {
    let magic = read_u32(bytes, 0)?;
    if magic != expected {
        return Err(format_error(0, format!("bad magic 0x{magic:08x}, expected 0x{expected:08x}")));
    }
    Ok(())
}

fn payload(bytes: &[u8], start: usize, len: usize) -> Result<&[u8]> {
    let have = bytes.len().saturating_sub(start);
    if have < len {
        return Err(format_error(
            bytes.len(),
            format!("payload truncated: expected {len} bytes, got {have}"),
        ));
    }
    Ok(&bytes[start..start + len])
}

/// Images as rows of pixels scaled to `[0, 1]`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Matrix> {
    check_magic(bytes, IMAGE_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    let width = rows * cols;
    let data = payload(bytes, 16, count * width)?;
    Matrix::from_vec(count, width, data.iter().map(|&b| f64::from(b) / 255.0).collect())
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABEL_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    Ok(payload(bytes, 8, count)?.to_vec())
}

pub fn load_idx_images(path: impl AsRef<Path>) -> Result<Matrix> {
    parse_idx_images(&std::fs::read(path)?)
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    parse_idx_labels(&std::fs::read(path)?)
}
