//! Encoding and inference behavior: frozen byte encodings, argmax
//! tie-breaking, and the all-zero model baseline.

use vp_ddm::{vectorize_request, MlpModel, INPUT_DIM};
use vp_dialect::DialectId;

#[test]
fn encoding_is_byte_over_255_padded_with_zeros() {
    let vector = vectorize_request("get a.txt");
    let expected_head: Vec<f32> = [103u8, 101, 116, 32, 97, 46, 116, 120, 116]
        .iter()
        .map(|&b| f32::from(b) / 255.0)
        .collect();
    assert_eq!(&vector.0[..9], expected_head.as_slice());
    assert!(vector.0[9..].iter().all(|&v| v == 0.0));
}

#[test]
fn encoding_truncates_to_the_input_width() {
    let long = "x".repeat(300);
    let vector = vectorize_request(&long);
    assert_eq!(vector.0.len(), INPUT_DIM);
    assert!(vector.0.iter().all(|&v| v == 120.0 / 255.0));
}

#[test]
fn empty_request_encodes_to_zeros() {
    assert!(vectorize_request("").0.iter().all(|&v| v == 0.0));
}

#[test]
fn non_ascii_bytes_encode_per_byte() {
    // '¤' is 0xC2 0xA4 in UTF-8; the encoder works on bytes, not chars.
    let vector = vectorize_request("¤");
    assert_eq!(vector.0[0], 194.0 / 255.0);
    assert_eq!(vector.0[1], 164.0 / 255.0);
    assert_eq!(vector.0[2], 0.0);
}

#[test]
fn zero_model_outputs_the_uniform_distribution() {
    let model = MlpModel::zeros(15);
    let probabilities = model.forward(&vectorize_request("get hello.txt"));
    assert_eq!(probabilities.len(), 15);
    for &p in &probabilities {
        assert_eq!(p, 1.0 / 15.0);
    }
}

#[test]
fn prediction_ties_resolve_to_the_lowest_dialect_id() {
    let model = MlpModel::zeros(15);
    assert_eq!(model.predict_dialect("get hello.txt"), DialectId::new(1).unwrap());
    assert_eq!(model.predict_dialect(""), DialectId::new(1).unwrap());
}

#[test]
fn forward_probabilities_sum_to_one() {
    let model = MlpModel::zeros(7);
    let total: f32 = model.forward(&vectorize_request("list /tmp")).iter().sum();
    assert!((total - 1.0).abs() < 1e-6);
}
