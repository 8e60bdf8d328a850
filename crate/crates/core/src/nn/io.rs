//! Binary and JSON model persistence.
//!
//! Binary layout (all integers little-endian):
//!
//! ```text
//! "STDW" | version: u32 | layer_count: u32
//! per layer: in: u32 | out: u32 | activation: u8 | weight: out*in f64 | bias: out f64
//! ```

use std::path::Path;

use super::model::{Activation, Dense, Model};
use crate::error::{Error, Result};
use crate::tensor::Tensor2;

pub const MAGIC: &[u8; 4] = b"STDW";
pub const FORMAT_VERSION: u32 = 1;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Format(format!(
                "model bytes truncated at offset {} (needed {n} more)",
                self.pos
            )));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        Ok(self
            .take(n * 8)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

impl Model {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.param_count() * 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.layers().len() as u32).to_le_bytes());
        for l in self.layers() {
            out.extend_from_slice(&(l.in_dim() as u32).to_le_bytes());
            out.extend_from_slice(&(l.out_dim() as u32).to_le_bytes());
            out.push(l.activation.tag());
            for v in l.weight.data().iter().chain(&l.bias) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        let magic = r.take(4)?;
        if magic != MAGIC {
            return Err(Error::Format(format!(
                "bad model magic {magic:?}, expected \"STDW\""
            )));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported model format version {version}"
            )));
        }
        let count = r.u32()? as usize;
        let mut layers = Vec::with_capacity(count);
        for _ in 0..count {
            let inp = r.u32()? as usize;
            let out = r.u32()? as usize;
            let tag = r.take(1)?[0];
            let activation = Activation::from_tag(tag)
                .ok_or_else(|| Error::Format(format!("unknown activation tag {tag}")))?;
            let weight = Tensor2::new(out, inp, r.f64s(inp * out)?)?;
            let bias = r.f64s(out)?;
            layers.push(Dense {
                weight,
                bias,
                activation,
            });
        }
        if r.pos != bytes.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes after model",
                bytes.len() - r.pos
            )));
        }
        Model::from_layers(layers)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(Error::io_at(path))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_bytes(&std::fs::read(path).map_err(Error::io_at(path))?)
    }

    /// Human-readable dump for debugging.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
