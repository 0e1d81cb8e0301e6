//! Frozen impurity values and feature encodings.

use vp_dialect::{parse_response, WireMessage};
use vp_srv::{extract_features, gini, SrvError, FEATURE_COUNT};

#[test]
fn gini_frozen_values() {
    assert_eq!(gini(&[5, 5]).unwrap(), 0.5);
    assert_eq!(gini(&[10, 0]).unwrap(), 0.0);
    assert_eq!(gini(&[7]).unwrap(), 0.0);
    // Uniform over 15 classes: 1 - 15 * (1/15)^2 = 14/15.
    let uniform = gini(&[1; 15]).unwrap();
    assert!((uniform - 14.0 / 15.0).abs() < 1e-12);
    // 1 - (0.25 + 0.0625 + 0.0625) = 0.625
    assert!((gini(&[2, 1, 1]).unwrap() - 0.625).abs() < 1e-12);
}

#[test]
fn gini_rejects_zero_totals() {
    assert_eq!(gini(&[]), Err(SrvError::EmptyCounts));
    assert_eq!(gini(&[0, 0, 0]), Err(SrvError::EmptyCounts));
}

fn features_of(lines: &[&str]) -> Result<Vec<f32>, SrvError> {
    let messages: Vec<WireMessage> = lines
        .iter()
        .map(|l| WireMessage::new(*l).unwrap())
        .collect();
    let structure = parse_response(&messages).unwrap();
    Ok(extract_features(&structure)?.0.to_vec())
}

#[test]
fn single_message_encoding() {
    // "File exists,20,hello.txt,get": one message, 4 fields typed s,i,s,s.
    let got = features_of(&["File exists,20,hello.txt,get"]).unwrap();
    let mut want = vec![0.0f32; FEATURE_COUNT];
    want[0] = 1.0; // message count
    want[1] = 4.0; // fields in message 1
    want[2..6].copy_from_slice(&[1.0, 2.0, 1.0, 1.0]);
    assert_eq!(got, want);
}

#[test]
fn two_message_encoding() {
    let got = features_of(&["File exists", "20,hello.txt,get"]).unwrap();
    let mut want = vec![0.0f32; FEATURE_COUNT];
    want[0] = 2.0;
    want[1] = 1.0;
    want[2] = 1.0; // lone string field
    want[6] = 3.0;
    want[7..10].copy_from_slice(&[2.0, 1.0, 1.0]);
    assert_eq!(got, want);
}

#[test]
fn envelope_is_enforced() {
    let seven = ["x"; 7];
    assert_eq!(features_of(&seven), Err(SrvError::TooManyPackets(7)));
    assert_eq!(
        features_of(&["a,b,c,d,e"]),
        Err(SrvError::TooManyFields(5))
    );
}
