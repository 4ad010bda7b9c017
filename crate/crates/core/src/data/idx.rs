//! The IDX container used by the MNIST distribution: a big-endian `u32`
//! magic number, one big-endian `u32` per dimension, then unsigned bytes.

use std::fs;
use std::path::Path;

use super::dataset::Dataset;
use super::error::DataError;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn u32(&mut self, field: &'static str) -> Result<u32, DataError> {
        let chunk = self.take(4, field)?;
        Ok(u32::from_be_bytes(chunk.try_into().expect("four bytes")))
    }

    fn take(&mut self, len: usize, field: &'static str) -> Result<&'a [u8], DataError> {
        if self.bytes.len() - self.pos < len {
            return Err(DataError::Truncated { field, offset: self.bytes.len() as u64 });
        }
        let out = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    fn magic(&mut self, field: &'static str, expected: u32) -> Result<(), DataError> {
        let found = self.u32(field)?;
        if found != expected {
            return Err(DataError::BadMagic { field, offset: 0, expected, found });
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<Vec<u8>, DataError> {
    fs::read(path).map_err(|source| DataError::Io { path: path.to_path_buf(), source })
}

/// Parses an image file: `(count, rows·cols, pixels)`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>), DataError> {
    let mut c = Cursor { bytes, pos: 0 };
    c.magic("image magic", IMAGE_MAGIC)?;
    let count = c.u32("image count")? as usize;
    let rows = c.u32("image rows")? as usize;
    let cols = c.u32("image cols")? as usize;
    let pixels = c.take(count * rows * cols, "image pixels")?;
    Ok((count, rows * cols, pixels.to_vec()))
}

/// Parses a label file into raw label bytes.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, DataError> {
    let mut c = Cursor { bytes, pos: 0 };
    c.magic("label magic", LABEL_MAGIC)?;
    let count = c.u32("label count")? as usize;
    Ok(c.take(count, "labels")?.to_vec())
}

/// Loads an image/label file pair. Pixels stay raw bytes (0–255); labels
/// are remapped onto contiguous class ids.
pub fn load_idx(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let (count, width, pixels) = parse_idx_images(&read(images.as_ref())?)?;
    let raw = parse_idx_labels(&read(labels.as_ref())?)?;
    if raw.len() != count {
        return Err(DataError::CountMismatch { field: "label count", offset: 4, images: count, labels: raw.len() });
    }
    if count == 0 {
        return Err(DataError::Empty);
    }
    let features = pixels.into_iter().map(f64::from).collect();
    let raw: Vec<f64> = raw.into_iter().map(f64::from).collect();
    Dataset::with_raw_classes(features, width, &raw)
}

/// Serializes images and labels in IDX form (used to build fixtures).
pub fn encode_idx(images: &[u8], count: usize, rows: usize, cols: usize, labels: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let mut img = Vec::with_capacity(16 + images.len());
    for v in [IMAGE_MAGIC, count as u32, rows as u32, cols as u32] {
        img.extend_from_slice(&v.to_be_bytes());
    }
    img.extend_from_slice(images);
    let mut lab = Vec::with_capacity(8 + labels.len());
    for v in [LABEL_MAGIC, labels.len() as u32] {
        lab.extend_from_slice(&v.to_be_bytes());
    }
    lab.extend_from_slice(labels);
    (img, lab)
}
