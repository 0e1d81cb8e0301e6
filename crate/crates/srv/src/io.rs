//! On-disk tree format.
//!
//! Layout (all integers little-endian):
//! `"VPDT"` | version `u32` | node count `u32` | node records. Each record
//! is 17 bytes: kind `u8` (0 leaf, 1 split), attribute `u16`, threshold
//! `f32`, left `u32`, right `u32`, class `u16`. Unused fields of a record
//! must be zero. Split children must point forward (child index strictly
//! greater than the parent's), which rules out cycles in one pass.

use vp_dialect::DialectId;

use crate::features::FEATURE_COUNT;
use crate::tree::{DecisionTree, Node};

const MAGIC: &[u8; 4] = b"VPDT";
const VERSION: u32 = 1;
const RECORD_LEN: usize = 17;

/// Errors from decoding a stored tree.
#[derive(Debug, PartialEq, thiserror::Error)]
pub enum TreeIoError {
    #[error("not a tree file (bad magic)")]
    BadMagic,
    #[error("unsupported tree format version {0}")]
    UnsupportedVersion(u32),
    #[error("tree file is truncated")]
    Truncated,
    #[error("tree file has {0} trailing bytes")]
    TrailingBytes(usize),
    #[error("tree file declares no nodes")]
    Empty,
    #[error("invalid node {index}: {reason}")]
    InvalidNode { index: usize, reason: &'static str },
}

impl DecisionTree {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.nodes.len() * RECORD_LEN);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.nodes.len() as u32).to_le_bytes());
        for node in &self.nodes {
            match *node {
                Node::Leaf { class } => {
                    out.push(0);
                    out.extend_from_slice(&0u16.to_le_bytes());
                    out.extend_from_slice(&0f32.to_le_bytes());
                    out.extend_from_slice(&0u32.to_le_bytes());
                    out.extend_from_slice(&0u32.to_le_bytes());
                    out.extend_from_slice(&class.get().to_le_bytes());
                }
                Node::Split {
                    attribute,
                    threshold,
                    left,
                    right,
                } => {
                    out.push(1);
                    out.extend_from_slice(&attribute.to_le_bytes());
                    out.extend_from_slice(&threshold.to_le_bytes());
                    out.extend_from_slice(&left.to_le_bytes());
                    out.extend_from_slice(&right.to_le_bytes());
                    out.extend_from_slice(&0u16.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, TreeIoError> {
        let mut cursor = Cursor { bytes, at: 0 };
        if cursor.take(4)? != MAGIC {
            return Err(TreeIoError::BadMagic);
        }
        let version = cursor.u32()?;
        if version != VERSION {
            return Err(TreeIoError::UnsupportedVersion(version));
        }
        let count = cursor.u32()? as usize;
        if count == 0 {
            return Err(TreeIoError::Empty);
        }

        let mut nodes = Vec::with_capacity(count);
        for index in 0..count {
            let invalid = |reason| TreeIoError::InvalidNode { index, reason };
            let kind = cursor.u8()?;
            let attribute = cursor.u16()?;
            let threshold = f32::from_le_bytes(cursor.take(4)?.try_into().expect("4 bytes"));
            let left = cursor.u32()?;
            let right = cursor.u32()?;
            let class = cursor.u16()?;
            let node = match kind {
                0 => {
                    if attribute != 0 || threshold.to_bits() != 0 || left != 0 || right != 0 {
                        return Err(invalid("leaf with split fields set"));
                    }
                    let class =
                        DialectId::new(class).ok_or_else(|| invalid("leaf class is zero"))?;
                    Node::Leaf { class }
                }
                1 => {
                    if class != 0 {
                        return Err(invalid("split with a class set"));
                    }
                    if usize::from(attribute) >= FEATURE_COUNT {
                        return Err(invalid("attribute out of range"));
                    }
                    if !threshold.is_finite() {
                        return Err(invalid("non-finite threshold"));
                    }
                    let forward = |child: u32| (child as usize) > index && (child as usize) < count;
                    if !forward(left) || !forward(right) {
                        return Err(invalid("child index does not point forward"));
                    }
                    Node::Split {
                        attribute,
                        threshold,
                        left,
                        right,
                    }
                }
                _ => return Err(invalid("unknown node kind")),
            };
            nodes.push(node);
        }
        if cursor.at != bytes.len() {
            return Err(TreeIoError::TrailingBytes(bytes.len() - cursor.at));
        }
        Ok(DecisionTree { nodes })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], TreeIoError> {
        let end = self.at.checked_add(len).ok_or(TreeIoError::Truncated)?;
        let slice = self.bytes.get(self.at..end).ok_or(TreeIoError::Truncated)?;
        self.at = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, TreeIoError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, TreeIoError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32, TreeIoError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}
