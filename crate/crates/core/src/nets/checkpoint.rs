//! Binary parameter container.
//!
//! Layout (all integers little-endian, all floats IEEE-754 f64 bit patterns):
//!
//! ```text
//! magic  b"ALCK"
//! u32    format version (currently 1)
//! ...    sections written by the owner in a fixed, documented order
//! ```
//!
//! Section primitives: `u32`, `u64`, `f64`, length-prefixed UTF-8 strings,
//! length-prefixed f64 vectors, an [`MlpSpec`] (layer count, sizes,
//! activation tags), and raw row-major parameter payloads shaped by a spec.
//! Writing then reading any value reproduces it bit-exactly.

use crate::error::{CoreError, Result};
use crate::nets::mlp::{Activation, MlpParams, MlpSpec};
use crate::numkit::Matrix;

pub const MAGIC: &[u8; 4] = b"ALCK";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Default)]
pub struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    pub fn new() -> Self {
        let mut w = ByteWriter { buf: Vec::new() };
        w.buf.extend_from_slice(MAGIC);
        w.u32(FORMAT_VERSION);
        w
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn string(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }

    pub fn f64_vec(&mut self, v: &[f64]) {
        self.u32(v.len() as u32);
        for &x in v {
            self.f64(x);
        }
    }

    pub fn spec(&mut self, spec: &MlpSpec) {
        self.u32(spec.layer_sizes().len() as u32);
        for &s in spec.layer_sizes() {
            self.u32(s as u32);
        }
        for &a in spec.activations() {
            self.buf.push(match a {
                Activation::Relu => 0,
                Activation::Tanh => 1,
                Activation::Identity => 2,
            });
        }
    }

    /// Row-major weight payload then bias payload, layer by layer.
    pub fn params(&mut self, params: &MlpParams) {
        for (w, b) in params.weights.iter().zip(params.biases.iter()) {
            for &x in w.as_slice() {
                self.f64(x);
            }
            for &x in b {
                self.f64(x);
            }
        }
    }

    /// One affine layer outside an MLP (policy heads).
    pub fn affine(&mut self, w: &Matrix, b: &[f64]) {
        self.u32(w.rows() as u32);
        self.u32(w.cols() as u32);
        for &x in w.as_slice() {
            self.f64(x);
        }
        for &x in b {
            self.f64(x);
        }
    }
}

#[derive(Debug)]
pub struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(buf: &'a [u8]) -> Result<Self> {
        let mut r = ByteReader { buf, pos: 0 };
        let magic = r.take(4)?;
        if magic != MAGIC {
            return Err(CoreError::Format("bad checkpoint magic".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(CoreError::Format(format!(
                "unsupported checkpoint version {version}"
            )));
        }
        Ok(r)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(CoreError::Format("truncated checkpoint".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn done(&self) -> bool {
        self.pos == self.buf.len()
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| CoreError::Format("bad utf8".into()))
    }

    pub fn f64_vec(&mut self) -> Result<Vec<f64>> {
        let n = self.u32()? as usize;
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            v.push(self.f64()?);
        }
        Ok(v)
    }

    pub fn spec(&mut self) -> Result<MlpSpec> {
        let n = self.u32()? as usize;
        if n < 2 || n > 64 {
            return Err(CoreError::Format(format!("implausible layer count {n}")));
        }
        let mut sizes = Vec::with_capacity(n);
        for _ in 0..n {
            sizes.push(self.u32()? as usize);
        }
        let mut acts = Vec::with_capacity(n - 1);
        for _ in 0..n - 1 {
            acts.push(match self.take(1)?[0] {
                0 => Activation::Relu,
                1 => Activation::Tanh,
                2 => Activation::Identity,
                t => return Err(CoreError::Format(format!("unknown activation tag {t}"))),
            });
        }
        MlpSpec::new(sizes, acts)
    }

    pub fn params(&mut self, spec: &MlpSpec) -> Result<MlpParams> {
        let mut params = MlpParams::zeros(spec);
        for o in 0..spec.n_layers() {
            for x in params.weights[o].as_mut_slice() {
                *x = self.f64()?;
            }
            for x in &mut params.biases[o] {
                *x = self.f64()?;
            }
        }
        Ok(params)
    }

    pub fn affine(&mut self) -> Result<(Matrix, Vec<f64>)> {
        let rows = self.u32()? as usize;
        let cols = self.u32()? as usize;
        if rows == 0 || cols == 0 || rows > 1 << 20 || cols > 1 << 20 {
            return Err(CoreError::Format("implausible affine shape".into()));
        }
        let mut w = Matrix::zeros(rows, cols);
        for x in w.as_mut_slice() {
            *x = self.f64()?;
        }
        let mut b = vec![0.0; rows];
        for x in &mut b {
            *x = self.f64()?;
        }
        Ok((w, b))
    }
}
