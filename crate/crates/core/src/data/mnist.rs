//! IDX reader for the MNIST distribution files.

use std::path::Path;

use crate::dataset::LabeledDataset;
use crate::error::{Error, IdxError, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

/// Decoded image file: `count` images of `rows × cols` bytes, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

fn be_u32(bytes: &[u8], at: usize, what: &'static str) -> Result<u32, IdxError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(IdxError::Truncated {
            what,
            expected: at + 4,
            found: bytes.len(),
        })
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<(), IdxError> {
    let found = be_u32(bytes, 0, "header")?;
    if found != expected {
        return Err(IdxError::BadMagic { expected, found });
    }
    Ok(())
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages, IdxError> {
    check_magic(bytes, IMAGE_MAGIC)?;
    let count = be_u32(bytes, 4, "header")? as usize;
    let rows = be_u32(bytes, 8, "header")? as usize;
    let cols = be_u32(bytes, 12, "header")? as usize;
    if rows == 0 || cols == 0 {
        return Err(IdxError::Truncated {
            what: "image dimensions",
            expected: 1,
            found: 0,
        });
    }
    let body = &bytes[16..];
    let expected = count.saturating_mul(rows.saturating_mul(cols));
    if body.len() < expected {
        return Err(IdxError::Truncated {
            what: "pixels",
            expected,
            found: body.len(),
        });
    }
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: body[..expected].to_vec(),
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, IdxError> {
    check_magic(bytes, LABEL_MAGIC)?;
    let count = be_u32(bytes, 4, "header")? as usize;
    let body = &bytes[8..];
    if body.len() < count {
        return Err(IdxError::Truncated {
            what: "labels",
            expected: count,
            found: body.len(),
        });
    }
    let labels = body[..count].to_vec();
    if let Some((row, &label)) = labels.iter().enumerate().find(|(_, &l)| l > 9) {
        return Err(IdxError::BadLabel { row, label });
    }
    Ok(labels)
}

/// Pairs decoded images with labels, scaling pixels to `[0, 1]`.
pub fn decode_mnist(images: &[u8], labels: &[u8]) -> Result<LabeledDataset, IdxError> {
    let images = parse_idx_images(images)?;
    let labels = parse_idx_labels(labels)?;
    if images.count != labels.len() {
        return Err(IdxError::CountMismatch {
            images: images.count,
            labels: labels.len(),
        });
    }
    let features = images.pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
    let labels = labels.into_iter().map(usize::from).collect();
    Ok(LabeledDataset::new(features, images.rows * images.cols, labels, 10)
        .expect("decoded IDX files are consistent"))
}

pub fn load_mnist(images_path: &Path, labels_path: &Path) -> Result<LabeledDataset> {
    let images = std::fs::read(images_path)?;
    let labels = std::fs::read(labels_path)?;
    let images_at = |source| Error::Idx {
        path: images_path.to_path_buf(),
        source,
    };
    parse_idx_images(&images).map_err(images_at)?;
    decode_mnist(&images, &labels).map_err(|source| match source {
        IdxError::CountMismatch { .. } => images_at(source),
        _ => Error::Idx {
            path: labels_path.to_path_buf(),
            source,
        },
    })
}

/// Encodes images in IDX format; the inverse of [`parse_idx_images`].
pub fn encode_idx_images(rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    let count = pixels.len() / (rows * cols).max(1);
    let mut out = Vec::with_capacity(16 + pixels.len());
    for v in [IMAGE_MAGIC, count as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(pixels);
    out
}

/// Encodes labels in IDX format; the inverse of [`parse_idx_labels`].
pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let pixels: Vec<u8> = (0..12).map(|i| (i * 20) as u8).collect();
        let data = decode_mnist(&encode_idx_images(2, 2, &pixels), &encode_idx_labels(&[3, 0, 9])).unwrap();
        assert_eq!(data.len(), 3);
        assert_eq!(data.n_features(), 4);
        assert_eq!(data.labels(), &[3, 0, 9]);
        assert_eq!(data.row(2)[3], 220.0 / 255.0);
    }

    #[test]
    fn header_magic_values() {
        let images = encode_idx_images(1, 1, &[7]);
        assert_eq!(&images[..4], &[0, 0, 8, 3]);
        assert_eq!(&encode_idx_labels(&[1])[..4], &[0, 0, 8, 1]);
    }

    #[test]
    fn distinct_errors() {
        let images = encode_idx_images(2, 2, &[0; 8]);
        let labels = encode_idx_labels(&[1, 2]);
        assert!(matches!(
            parse_idx_images(&labels),
            Err(IdxError::BadMagic { found: LABEL_MAGIC, .. })
        ));
        let err = parse_idx_images(&images[..images.len() - 1]).unwrap_err();
        assert!(err.to_string().starts_with("truncated file"));
        assert!(parse_idx_images(&images[..6]).unwrap_err().to_string().starts_with("truncated file"));
        assert_eq!(
            decode_mnist(&images, &encode_idx_labels(&[1, 2, 3])).unwrap_err(),
            IdxError::CountMismatch { images: 2, labels: 3 }
        );
        assert_eq!(
            parse_idx_labels(&encode_idx_labels(&[1, 12])).unwrap_err(),
            IdxError::BadLabel { row: 1, label: 12 }
        );
    }
}
