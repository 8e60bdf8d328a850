//! IDX (MNIST-style) image and label files.
//!
//! Images: magic `0x00000803`, then `count`, `rows`, `cols` as big-endian
//! u32, then `count·rows·cols` u8 pixels. Labels: magic `0x00000801`, then
//! `count`, then `count` u8 labels.

use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor2;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdxHeader {
    pub magic: u32,
    /// Dimension sizes following the magic: `[count]` or `[count, rows, cols]`.
    pub dims: [u32; 3],
    pub rank: usize,
}

impl IdxHeader {
    pub fn header_len(&self) -> usize {
        4 + 4 * self.rank
    }

    pub fn count(&self) -> usize {
        self.dims[0] as usize
    }

    /// Number of payload bytes implied by the dims.
    pub fn payload_len(&self) -> u64 {
        self.dims[..self.rank].iter().map(|&d| d as u64).product()
    }

    /// Parses the header at the start of `bytes`, requiring `expected` magic.
    pub fn parse(bytes: &[u8], expected: u32, path: &Path) -> Result<Self> {
        let word = |i: usize| -> Result<u32> {
            bytes
                .get(4 * i..4 * i + 4)
                .map(|b| u32::from_be_bytes(b.try_into().expect("4 bytes")))
                .ok_or_else(|| Error::Truncated {
                    path: path.to_path_buf(),
                    offset: bytes.len() as u64,
                    needed: (4 * i + 4 - bytes.len()) as u64,
                })
        };
        let magic = word(0)?;
        if magic != expected {
            return Err(Error::Format(format!(
                "{}: magic {magic:#010x}, expected {expected:#010x}",
                path.display()
            )));
        }
        let rank = (magic & 0xFF) as usize;
        let mut dims = [0u32; 3];
        for (i, d) in dims.iter_mut().enumerate().take(rank) {
            *d = word(i + 1)?;
        }
        Ok(Self { magic, dims, rank })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdxImages {
    /// One flattened image per row, pixels scaled to `[0, 1]`.
    pub images: Tensor2,
    pub labels: Vec<usize>,
    pub rows: usize,
    pub cols: usize,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(Error::io_at(path))
}

fn payload<'a>(bytes: &'a [u8], header: &IdxHeader, path: &Path) -> Result<&'a [u8]> {
    let start = header.header_len();
    let need = header.payload_len();
    let have = (bytes.len() - start) as u64;
    if have < need {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            offset: bytes.len() as u64,
            needed: need - have,
        });
    }
    Ok(&bytes[start..start + need as usize])
}

/// Loads an image file and its label file.
pub fn load_idx_images(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<IdxImages> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let ibytes = read(ip)?;
    let ih = IdxHeader::parse(&ibytes, IMAGES_MAGIC, ip)?;
    let pixels = payload(&ibytes, &ih, ip)?;

    let lbytes = read(lp)?;
    let lh = IdxHeader::parse(&lbytes, LABELS_MAGIC, lp)?;
    let labels: Vec<usize> = payload(&lbytes, &lh, lp)?
        .iter()
        .map(|&b| b as usize)
        .collect();

    if ih.count() != lh.count() {
        return Err(Error::Format(format!(
            "{} images but {} labels",
            ih.count(),
            lh.count()
        )));
    }
    let (rows, cols) = (ih.dims[1] as usize, ih.dims[2] as usize);
    let data = pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
    Ok(IdxImages {
        images: Tensor2::new(ih.count(), rows * cols, data)?,
        labels,
        rows,
        cols,
    })
}

/// Writes u8 images in IDX layout.
pub fn write_idx_images(
    path: impl AsRef<Path>,
    rows: usize,
    cols: usize,
    pixels: &[Vec<u8>],
) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(16 + pixels.len() * rows * cols);
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    for d in [pixels.len(), rows, cols] {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    for img in pixels {
        if img.len() != rows * cols {
            return Err(Error::Shape(format!(
                "image of {} pixels, expected {}",
                img.len(),
                rows * cols
            )));
        }
        out.extend_from_slice(img);
    }
    std::fs::write(path, out).map_err(Error::io_at(path))
}

pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    std::fs::write(path, out).map_err(Error::io_at(path))
}
