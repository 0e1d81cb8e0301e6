//! Round-trip and corruption behavior of the stored tree format.

use vp_dialect::{parse_response, register_ftp_dialects, DialectId, RequestContext};
use vp_srv::{extract_features, train_tree, DecisionTree, TrainParams, TreeIoError};

fn sample_tree() -> DecisionTree {
    let registry = register_ftp_dialects();
    let ctx = RequestContext::new("get", "hello.txt", Some(20));
    let rows: Vec<_> = registry
        .iter()
        .map(|d| {
            let structure = parse_response(&d.render_response(&ctx).unwrap()).unwrap();
            (extract_features(&structure).unwrap(), d.id())
        })
        .collect();
    train_tree(&rows, &TrainParams::default()).unwrap()
}

#[test]
fn round_trip_preserves_bytes_and_predictions() {
    let tree = sample_tree();
    let bytes = tree.to_bytes();
    let restored = DecisionTree::from_bytes(&bytes).unwrap();
    assert_eq!(restored.to_bytes(), bytes);
    assert_eq!(restored, tree);
}

#[test]
fn header_is_validated() {
    let tree = sample_tree();
    let good = tree.to_bytes();

    let mut bad_magic = good.clone();
    bad_magic[0] = b'X';
    assert_eq!(DecisionTree::from_bytes(&bad_magic), Err(TreeIoError::BadMagic));

    let mut bad_version = good.clone();
    bad_version[4] = 9;
    assert_eq!(
        DecisionTree::from_bytes(&bad_version),
        Err(TreeIoError::UnsupportedVersion(9))
    );

    assert_eq!(
        DecisionTree::from_bytes(&good[..good.len() - 1]),
        Err(TreeIoError::Truncated)
    );

    let mut trailing = good.clone();
    trailing.push(0);
    assert_eq!(
        DecisionTree::from_bytes(&trailing),
        Err(TreeIoError::TrailingBytes(1))
    );

    let empty = [b'V', b'P', b'D', b'T', 1, 0, 0, 0, 0, 0, 0, 0];
    assert_eq!(DecisionTree::from_bytes(&empty), Err(TreeIoError::Empty));
}

/// Builds a single-record file by hand: header plus one 17-byte node.
fn one_node_file(record: [u8; 17]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(b"VPDT");
    out.extend_from_slice(&1u32.to_le_bytes());
    out.extend_from_slice(&1u32.to_le_bytes());
    out.extend_from_slice(&record);
    out
}

#[test]
fn node_records_are_validated() {
    // kind 2 is unknown.
    let mut record = [0u8; 17];
    record[0] = 2;
    assert!(matches!(
        DecisionTree::from_bytes(&one_node_file(record)),
        Err(TreeIoError::InvalidNode { index: 0, .. })
    ));

    // Leaf with class 0.
    let record = [0u8; 17];
    assert!(matches!(
        DecisionTree::from_bytes(&one_node_file(record)),
        Err(TreeIoError::InvalidNode { .. })
    ));

    // A split whose children point at itself (backward reference / cycle).
    let mut record = [0u8; 17];
    record[0] = 1;
    // attribute 0, threshold 0, left = right = 0 -> not forward.
    record[7] = 0;
    assert!(matches!(
        DecisionTree::from_bytes(&one_node_file(record)),
        Err(TreeIoError::InvalidNode { .. })
    ));
}

#[test]
fn split_fields_must_be_in_range() {
    let tree = sample_tree();
    let mut bytes = tree.to_bytes();
    // First node of this tree is a split; its attribute lives at offset 13.
    bytes[13] = 200;
    assert!(matches!(
        DecisionTree::from_bytes(&bytes),
        Err(TreeIoError::InvalidNode { index: 0, .. })
    ));
}

#[test]
fn leaves_with_split_fields_are_rejected() {
    // A leaf (kind 0) smuggling a child pointer.
    let mut record = [0u8; 17];
    record[15] = 1; // class 1, valid
    record[7] = 3; // left child set
    assert!(matches!(
        DecisionTree::from_bytes(&one_node_file(record)),
        Err(TreeIoError::InvalidNode { .. })
    ));
}
