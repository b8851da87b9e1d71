//! Binary checkpoint layout (all integers and floats little-endian):
//!
//! | offset | size          | content                                   |
//! |--------|---------------|-------------------------------------------|
//! | 0      | 8             | magic `TSEMBED\0`                         |
//! | 8      | 4             | format version, `u32` = 1                 |
//! | 12     | 4             | flags, `u32`; bit 0 = L2-normalized output |
//! | 16     | 4             | number of dims `n`, `u32` (>= 2)          |
//! | 20     | 4 n           | layer dims `[F, h1, .., d]`, `u32` each   |
//! | ...    | 8 (out*in)    | layer 0 weights, row-major `out x in`, `f64` |
//! | ...    | 8 out         | layer 0 bias, `f64`                       |
//! |        |               | then layer 1, 2, ... in the same layout   |
//!
//! The file ends exactly after the last bias.

use std::fs;
use std::path::Path;

use super::{Embedder, Layer};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"TSEMBED\0";
pub const CHECKPOINT_VERSION: u32 = 1;

const FLAG_NORMALIZE: u32 = 1;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let out = self.buf.get(self.pos..self.pos.checked_add(n)?)?;
        self.pos += n;
        Some(out)
    }

    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }

    fn f64s(&mut self, n: usize) -> Option<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8)?)?;
        Some(
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect(),
        )
    }
}

impl Embedder {
    pub fn to_bytes(&self) -> Vec<u8> {
        let dims = self.dims();
        let mut out = Vec::with_capacity(20 + 4 * dims.len() + 8 * self.num_params());
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        let flags = if self.normalize_output() {
            FLAG_NORMALIZE
        } else {
            0
        };
        out.extend_from_slice(&flags.to_le_bytes());
        out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
        for d in &dims {
            out.extend_from_slice(&(*d as u32).to_le_bytes());
        }
        for layer in self.layers() {
            for v in layer.weights.iter().chain(&layer.bias) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, String> {
        let mut r = Reader { buf: bytes, pos: 0 };
        let truncated = || "truncated checkpoint".to_string();
        if r.take(8).ok_or_else(truncated)? != CHECKPOINT_MAGIC {
            return Err("not a checkpoint (bad magic)".into());
        }
        let version = r.u32().ok_or_else(truncated)?;
        if version != CHECKPOINT_VERSION {
            return Err(format!("unsupported checkpoint version {version}"));
        }
        let flags = r.u32().ok_or_else(truncated)?;
        if flags & !FLAG_NORMALIZE != 0 {
            return Err(format!("unknown checkpoint flags {flags:#x}"));
        }
        let n = r.u32().ok_or_else(truncated)? as usize;
        if n < 2 {
            return Err(format!("checkpoint declares {n} dims, need at least 2"));
        }
        let mut dims = Vec::with_capacity(n);
        for _ in 0..n {
            dims.push(r.u32().ok_or_else(truncated)? as usize);
        }
        let mut layers = Vec::with_capacity(n - 1);
        for w in dims.windows(2) {
            let (inputs, outputs) = (w[0], w[1]);
            let weights = r.f64s(inputs * outputs).ok_or_else(truncated)?;
            let bias = r.f64s(outputs).ok_or_else(truncated)?;
            layers.push(Layer {
                inputs,
                outputs,
                weights,
                bias,
            });
        }
        if r.pos != bytes.len() {
            return Err(format!(
                "{} trailing bytes after checkpoint",
                bytes.len() - r.pos
            ));
        }
        Embedder::from_layers(layers, flags & FLAG_NORMALIZE != 0).map_err(|e| e.to_string())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Embedder::from_bytes(&bytes).map_err(|m| Error::format(path, m))
    }
}
