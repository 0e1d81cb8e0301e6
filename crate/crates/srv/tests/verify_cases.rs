//! End-to-end verification behavior: genuine replies pass with the right
//! decoded outcome, and every tampering axis lands in the right reject
//! bucket.

use vp_dialect::{
    parse_response, register_ftp_dialects, DialectId, DialectRegistry, RequestContext, WireMessage,
};
use vp_srv::{
    extract_features, train_tree, verify_response, DecisionTree, RejectReason, ResponseOutcome,
    TrainParams, Verdict,
};

fn fixture() -> (DialectRegistry, DecisionTree) {
    let registry = register_ftp_dialects();
    let contexts = [
        RequestContext::new("get", "hello.txt", Some(20)),
        RequestContext::new("put", "data_7.bin", Some(0)),
        RequestContext::new("get", "r.log", Some(999_999)),
    ];
    let mut rows = Vec::new();
    for dialect in registry.iter() {
        for ctx in &contexts {
            for messages in [
                dialect.render_response(ctx).unwrap(),
                dialect.render_not_found(ctx).unwrap(),
            ] {
                let structure = parse_response(&messages).unwrap();
                rows.push((extract_features(&structure).unwrap(), dialect.id()));
            }
        }
    }
    let tree = train_tree(&rows, &TrainParams::default()).unwrap();
    (registry, tree)
}

fn structure_of(lines: &[&str]) -> vp_dialect::ResponseStructure {
    let messages: Vec<WireMessage> = lines
        .iter()
        .map(|l| WireMessage::new(*l).unwrap())
        .collect();
    parse_response(&messages).unwrap()
}

fn id(raw: u16) -> DialectId {
    DialectId::new(raw).unwrap()
}

#[test]
fn genuine_replies_pass_for_every_dialect_and_outcome() {
    let (registry, tree) = fixture();
    let ctx = RequestContext::new("get", "hello.txt", Some(20));
    for dialect in registry.iter() {
        let found = parse_response(&dialect.render_response(&ctx).unwrap()).unwrap();
        assert_eq!(
            verify_response(&tree, &registry, &found, dialect.id(), &ctx).unwrap(),
            Verdict::Accept(ResponseOutcome::FileFound),
            "dialect {}",
            dialect.id()
        );
        let missing = parse_response(&dialect.render_not_found(&ctx).unwrap()).unwrap();
        assert_eq!(
            verify_response(&tree, &registry, &missing, dialect.id(), &ctx).unwrap(),
            Verdict::Accept(ResponseOutcome::FileMissing),
            "dialect {} (missing)",
            dialect.id()
        );
    }
}

#[test]
fn genuine_replies_pass_when_the_size_is_unknown() {
    let (registry, tree) = fixture();
    let render_ctx = RequestContext::new("get", "hello.txt", Some(21));
    let verify_ctx = RequestContext::new("get", "hello.txt", None);
    for dialect in registry.iter() {
        let structure = parse_response(&dialect.render_response(&render_ctx).unwrap()).unwrap();
        assert_eq!(
            verify_response(&tree, &registry, &structure, dialect.id(), &verify_ctx).unwrap(),
            Verdict::Accept(ResponseOutcome::FileFound),
            "dialect {}",
            dialect.id()
        );
    }
}

#[test]
fn the_fixed_malformed_reply_is_a_dialect_mismatch() {
    let (registry, tree) = fixture();
    // A peer with no dialect support answers every request the same way.
    let structure = structure_of(&["File does not exist"]);
    let ctx = RequestContext::new("get", "hello.txt", None);
    for dialect in registry.iter() {
        let verdict = verify_response(&tree, &registry, &structure, dialect.id(), &ctx).unwrap();
        assert!(
            !verdict.is_accept(),
            "dialect {} accepted the malformed reply",
            dialect.id()
        );
    }
}

#[test]
fn tampered_content_is_a_content_mismatch() {
    let (registry, tree) = fixture();
    let ctx = RequestContext::new("get", "hello.txt", Some(20));

    // Wrong size, right shape.
    let wrong_size = structure_of(&["File exists,21,hello.txt,get"]);
    assert_eq!(
        verify_response(&tree, &registry, &wrong_size, id(8), &ctx).unwrap(),
        Verdict::Reject(RejectReason::ContentMismatch)
    );

    // Wrong filename echo.
    let wrong_name = structure_of(&["File exists,20,other.txt,get"]);
    assert_eq!(
        verify_response(&tree, &registry, &wrong_name, id(8), &ctx).unwrap(),
        Verdict::Reject(RejectReason::ContentMismatch)
    );

    // Wrong prose.
    let wrong_prose = structure_of(&["file exists,20,hello.txt,get"]);
    assert_eq!(
        verify_response(&tree, &registry, &wrong_prose, id(8), &ctx).unwrap(),
        Verdict::Reject(RejectReason::ContentMismatch)
    );
}

#[test]
fn wrong_shape_is_a_dialect_mismatch() {
    let (registry, tree) = fixture();
    let ctx = RequestContext::new("get", "hello.txt", Some(20));

    // A different dialect's genuine reply.
    let other = structure_of(&["20"]);
    assert_eq!(
        verify_response(&tree, &registry, &other, id(8), &ctx).unwrap(),
        Verdict::Reject(RejectReason::DialectMismatch)
    );

    // Genuine reply plus a trailing junk message.
    let padded = structure_of(&["File exists,20,hello.txt,get", "junk"]);
    assert_eq!(
        verify_response(&tree, &registry, &padded, id(8), &ctx).unwrap(),
        Verdict::Reject(RejectReason::DialectMismatch)
    );

    // Too many messages to even encode.
    let oversized = structure_of(&["a", "a", "a", "a", "a", "a", "a"]);
    assert_eq!(
        verify_response(&tree, &registry, &oversized, id(8), &ctx).unwrap(),
        Verdict::Reject(RejectReason::DialectMismatch)
    );
}

#[test]
fn size_consistency_rules_apply_when_the_size_is_unknown() {
    let (registry, tree) = fixture();
    let ctx = RequestContext::new("get", "hello.txt", None);

    // Doubled size must repeat the same value.
    let unequal = structure_of(&["20,21", "Connection Closed"]);
    assert_eq!(
        verify_response(&tree, &registry, &unequal, id(2), &ctx).unwrap(),
        Verdict::Reject(RejectReason::ContentMismatch)
    );

    // Split size: second half carries the rounding, so it is the larger.
    let ok_split = structure_of(&["10", "11"]);
    assert_eq!(
        verify_response(&tree, &registry, &ok_split, id(4), &ctx).unwrap(),
        Verdict::Accept(ResponseOutcome::FileFound)
    );
    let bad_split = structure_of(&["10", "12"]);
    assert_eq!(
        verify_response(&tree, &registry, &bad_split, id(4), &ctx).unwrap(),
        Verdict::Reject(RejectReason::ContentMismatch)
    );
    let swapped = structure_of(&["11", "10"]);
    assert_eq!(
        verify_response(&tree, &registry, &swapped, id(4), &ctx).unwrap(),
        Verdict::Reject(RejectReason::ContentMismatch)
    );

    // The inverse dialect's size must be non-positive when unknown.
    let positive = structure_of(&["File does not exist", "20"]);
    assert_eq!(
        verify_response(&tree, &registry, &positive, id(14), &ctx).unwrap(),
        Verdict::Reject(RejectReason::ContentMismatch)
    );
}

#[test]
fn unknown_expected_dialect_is_a_caller_error() {
    let (registry, tree) = fixture();
    let ctx = RequestContext::new("get", "hello.txt", None);
    let structure = structure_of(&["20"]);
    assert!(verify_response(&tree, &registry, &structure, id(99), &ctx).is_err());
}
