//! Hand-built decision models with known, provable routing.
//!
//! Attack measurements need full control over which dialect a request
//! maps to — detection rates must not depend on what a trained model
//! happened to learn. These constructors build tiny single-layer models
//! in the standard serialized format whose argmax is a closed-form
//! function of the input, so harness runs and demos stay deterministic.

use vp_ddm::MlpModel;

/// A model whose prediction depends only on the byte at `byte_index`:
/// byte value `b'a' + k` maps to class `k` (clamped to the last class
/// for later letters). Class `k` gets slope `k` on that input with
/// crossovers at the half-letter boundaries, so the argmax walks through
/// the classes as the byte walks through the alphabet.
pub fn byte_router_model(classes: usize, byte_index: usize) -> MlpModel {
    assert!(classes >= 1, "need at least one class");
    assert!(byte_index < 100, "routing byte must be inside the model input");
    let mut bytes = header(classes);
    let mut bias = 0.0f32;
    let mut biases = Vec::with_capacity(classes);
    for class in 0..classes {
        if class > 0 {
            // Crossover with the previous class at byte value 96.5 + class.
            bias -= 96.5 + class as f32;
        }
        biases.push(bias);
        for input in 0..100 {
            let weight = if input == byte_index { 255.0 * class as f32 } else { 0.0 };
            bytes.extend_from_slice(&weight.to_le_bytes());
        }
    }
    for b in biases {
        bytes.extend_from_slice(&b.to_le_bytes());
    }
    MlpModel::from_bytes(&bytes).expect("well-formed model bytes")
}

/// A model that maps every request to the same class.
pub fn constant_model(classes: usize, winner_index: usize) -> MlpModel {
    assert!(winner_index < classes, "winner must be one of the classes");
    let mut bytes = header(classes);
    for _ in 0..classes * 100 {
        bytes.extend_from_slice(&0.0f32.to_le_bytes());
    }
    for class in 0..classes {
        let bias: f32 = if class == winner_index { 1.0 } else { 0.0 };
        bytes.extend_from_slice(&bias.to_le_bytes());
    }
    MlpModel::from_bytes(&bytes).expect("well-formed model bytes")
}

/// Serialized-model header for a single `100 -> classes` layer.
fn header(classes: usize) -> Vec<u8> {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"VPDM");
    bytes.extend_from_slice(&1u32.to_le_bytes());
    bytes.extend_from_slice(&2u32.to_le_bytes());
    bytes.extend_from_slice(&100u32.to_le_bytes());
    bytes.extend_from_slice(&(classes as u32).to_le_bytes());
    bytes
}
