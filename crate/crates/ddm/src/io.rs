//! Model serialization.
//!
//! Binary layout (all integers little-endian):
//!
//! ```text
//! magic "VPDM" | version u32 | dim_count u32 | dims u32 × dim_count
//! then per layer: weights f32 × (out·in), row-major | bias f32 × out
//! ```
//!
//! The format carries exactly the `f32` values the inference path uses, so
//! a model saved on one machine and loaded on another produces
//! bit-identical probabilities.

use thiserror::Error;

use crate::model::{DenseLayer, MlpModel};

const MAGIC: &[u8; 4] = b"VPDM";
const VERSION: u32 = 1;
/// Sanity cap on layer widths; real models are ≤ 128 wide.
const MAX_DIM: u32 = 1 << 16;
const MAX_DIMS: u32 = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelIoError {
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("model file is truncated")]
    Truncated,
    #[error("model file has {0} trailing bytes")]
    TrailingBytes(usize),
    #[error("model must have at least 2 layer dims, found {0}")]
    TooFewDims(u32),
    #[error("layer dim {value} at position {position} is out of range")]
    DimOutOfRange { position: usize, value: u32 },
    #[error("non-finite parameter in layer {layer}")]
    NonFinite { layer: usize },
}

impl MlpModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&VERSION.to_le_bytes());
        bytes.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        for &dim in &self.dims {
            bytes.extend_from_slice(&(dim as u32).to_le_bytes());
        }
        for layer in &self.layers {
            for &value in &layer.weights {
                bytes.extend_from_slice(&value.to_le_bytes());
            }
            for &value in &layer.bias {
                bytes.extend_from_slice(&value.to_le_bytes());
            }
        }
        bytes
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelIoError> {
        let mut cursor = Cursor { bytes, at: 0 };
        if cursor.take(4)? != MAGIC {
            return Err(ModelIoError::BadMagic);
        }
        let version = cursor.u32()?;
        if version != VERSION {
            return Err(ModelIoError::UnsupportedVersion(version));
        }
        let dim_count = cursor.u32()?;
        if dim_count < 2 {
            return Err(ModelIoError::TooFewDims(dim_count));
        }
        if dim_count > MAX_DIMS {
            return Err(ModelIoError::DimOutOfRange {
                position: 0,
                value: dim_count,
            });
        }
        let mut dims = Vec::with_capacity(dim_count as usize);
        for position in 0..dim_count as usize {
            let value = cursor.u32()?;
            if value == 0 || value > MAX_DIM {
                return Err(ModelIoError::DimOutOfRange { position, value });
            }
            dims.push(value as usize);
        }
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for (layer, pair) in dims.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let weights = cursor.f32s(fan_in * fan_out)?;
            let bias = cursor.f32s(fan_out)?;
            if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
                return Err(ModelIoError::NonFinite { layer });
            }
            layers.push(DenseLayer { weights, bias });
        }
        if cursor.at != bytes.len() {
            return Err(ModelIoError::TrailingBytes(bytes.len() - cursor.at));
        }
        Ok(MlpModel::from_parts(dims, layers))
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], ModelIoError> {
        let end = self.at.checked_add(len).ok_or(ModelIoError::Truncated)?;
        if end > self.bytes.len() {
            return Err(ModelIoError::Truncated);
        }
        let slice = &self.bytes[self.at..end];
        self.at = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, ModelIoError> {
        let raw = self.take(4)?;
        Ok(u32::from_le_bytes(raw.try_into().expect("4 bytes")))
    }

    fn f32s(&mut self, count: usize) -> Result<Vec<f32>, ModelIoError> {
        let raw = self.take(count.checked_mul(4).ok_or(ModelIoError::Truncated)?)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect())
    }
}
