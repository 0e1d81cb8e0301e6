//! Fixed-width numeric encoding of a parsed response structure.
//!
//! The encoding is content-blind: only message count, per-message field
//! counts, and per-field syntactic types survive. Two replies with the
//! same shape encode identically no matter what values they carry.

use vp_dialect::{FieldType, ResponseStructure};

use crate::SrvError;

/// Encodable envelope: up to 6 messages of up to 4 fields each. Anything
/// larger cannot belong to a registered dialect and is rejected outright.
pub const MAX_PACKETS: usize = 6;
pub const MAX_FIELDS: usize = 4;

/// Feature vector width: message count, then per message slot a field
/// count and one type code per field position.
pub const FEATURE_COUNT: usize = 1 + MAX_PACKETS * (1 + MAX_FIELDS);

/// Type codes: 0 = absent, 1 = string, 2 = integer.
fn type_code(ftype: FieldType) -> f32 {
    match ftype {
        FieldType::Str => 1.0,
        FieldType::Int => 2.0,
    }
}

/// One encoded response shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureFeatures(pub [f32; FEATURE_COUNT]);

/// Encodes a parsed response. Layout:
/// `[0]` message count; for message slot `p` (0-based), `[1 + 5p]` field
/// count and `[2 + 5p ..= 5 + 5p]` type codes; unused slots stay zero.
pub fn extract_features(structure: &ResponseStructure) -> Result<StructureFeatures, SrvError> {
    let packets = structure.packets();
    if packets.len() > MAX_PACKETS {
        return Err(SrvError::TooManyPackets(packets.len()));
    }
    let mut out = [0.0f32; FEATURE_COUNT];
    out[0] = packets.len() as f32;
    for (pi, fields) in packets.iter().enumerate() {
        if fields.len() > MAX_FIELDS {
            return Err(SrvError::TooManyFields(fields.len()));
        }
        let base = 1 + pi * (1 + MAX_FIELDS);
        out[base] = fields.len() as f32;
        for (fi, field) in fields.iter().enumerate() {
            out[base + 1 + fi] = type_code(field.ftype);
        }
    }
    Ok(StructureFeatures(out))
}
