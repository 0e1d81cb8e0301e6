//! Shared fixtures: hand-built decision models with known routing, so
//! protocol behavior can be pinned per dialect without training.

use vp_ddm::MlpModel;

/// Builds a single-layer model over the 100-byte input whose argmax
/// depends only on `byte_index`: input byte 'a' + k at that position maps
/// to class k. Classes win on consecutive byte intervals by giving class
/// k slope k in that coordinate with crossovers at half-letter
/// boundaries.
pub fn router_model(classes: usize, byte_index: u32) -> MlpModel {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"VPDM");
    bytes.extend_from_slice(&1u32.to_le_bytes());
    bytes.extend_from_slice(&2u32.to_le_bytes());
    bytes.extend_from_slice(&100u32.to_le_bytes());
    bytes.extend_from_slice(&(classes as u32).to_le_bytes());
    let mut bias = 0.0f32;
    let mut biases = Vec::with_capacity(classes);
    for class in 0..classes {
        if class > 0 {
            bias -= 96.5 + class as f32;
        }
        biases.push(bias);
        for input in 0..100u32 {
            let weight = if input == byte_index {
                255.0 * class as f32
            } else {
                0.0
            };
            bytes.extend_from_slice(&weight.to_le_bytes());
        }
    }
    for b in biases {
        bytes.extend_from_slice(&b.to_le_bytes());
    }
    MlpModel::from_bytes(&bytes).expect("well-formed model bytes")
}

/// A model that maps every request to the same class.
#[allow(dead_code)]
pub fn constant_model(classes: usize, winner_index: usize) -> MlpModel {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"VPDM");
    bytes.extend_from_slice(&1u32.to_le_bytes());
    bytes.extend_from_slice(&2u32.to_le_bytes());
    bytes.extend_from_slice(&100u32.to_le_bytes());
    bytes.extend_from_slice(&(classes as u32).to_le_bytes());
    for _ in 0..classes * 100 {
        bytes.extend_from_slice(&0.0f32.to_le_bytes());
    }
    for class in 0..classes {
        let bias: f32 = if class == winner_index { 1.0 } else { 0.0 };
        bytes.extend_from_slice(&bias.to_le_bytes());
    }
    MlpModel::from_bytes(&bytes).expect("well-formed model bytes")
}
