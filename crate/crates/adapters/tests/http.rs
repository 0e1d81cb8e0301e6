//! HTTP adapter: message framing, the two response dialects, client-side
//! verification, and end-to-end sessions against a live server.

mod common;

use std::io::Cursor;
use std::sync::Arc;
use std::time::Duration;

use proptest::prelude::*;
use tempfile::TempDir;
use vp_adapters::http::{
    http_dialect_decode, http_dialect_respond, http_message_features, http_shape_dataset,
    http_verify_response, parse_request_line, spawn_http_server, HttpClient, HttpClientConfig,
    HttpDialect, HttpMessage, HttpServerConfig, HttpServerHandle, HttpTransferResult, HttpVerdict,
};
use vp_adapters::{AdapterError, EndpointMode};
use vp_ddm::MlpModel;
use vp_dialect::TerminationReason;
use vp_srv::{train_tree, DecisionTree, RejectReason, TrainParams};

use common::{constant_model, router_model};

/// Request lines route on byte 4 — the first letter of the path.
const PAGE_D1: &str = "about.html";
const PAGE_D2: &str = "basics.html";

fn endpoint_model() -> MlpModel {
    router_model(2, 4)
}

fn verifier_tree() -> DecisionTree {
    train_tree(&http_shape_dataset(20), &TrainParams::default()).expect("non-empty dataset")
}

struct Fixture {
    file_root: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let file_root = TempDir::new().expect("tempdir");
        std::fs::write(
            file_root.path().join(PAGE_D1),
            b"<html><body>about us, at length</body></html>",
        )
        .unwrap();
        std::fs::write(
            file_root.path().join(PAGE_D2),
            b"<html><body>the basics</body></html>",
        )
        .unwrap();
        Self { file_root }
    }

    fn spawn(&self, mode: EndpointMode, model: MlpModel) -> HttpServerHandle {
        let config = HttpServerConfig {
            mode,
            read_timeout: Duration::from_millis(500),
            ..HttpServerConfig::new(self.file_root.path())
        };
        spawn_http_server(config, Arc::new(model)).expect("bind loopback")
    }

    fn client(&self, server: &HttpServerHandle, model: MlpModel) -> HttpClient {
        let config = HttpClientConfig {
            read_timeout: Duration::from_millis(500),
        };
        HttpClient::connect(server.addr(), Arc::new(model), Arc::new(verifier_tree()), config)
            .expect("connect to loopback server")
    }
}

fn body_of(result: HttpTransferResult) -> Vec<u8> {
    match result {
        HttpTransferResult::Body(body) => body,
        other => panic!("expected a body, got {other:?}"),
    }
}

#[test]
fn message_framing_round_trips() {
    let cases = vec![
        HttpMessage::ok(b"hello body".to_vec()),
        HttpMessage::ok(Vec::new()),
        HttpMessage::without_body(200),
        HttpMessage {
            status: 404,
            body: Some(Vec::new()),
        },
    ];
    for message in cases {
        let mut wire = Vec::new();
        message.write_to(&mut wire).unwrap();
        let mut reader = Cursor::new(wire);
        let back = HttpMessage::read_from(&mut reader).unwrap().unwrap();
        assert_eq!(back, message);
    }
}

#[test]
fn a_hundred_byte_body_travels_as_five_twenty_byte_segments() {
    let body = vec![7u8; 100];
    let messages = http_dialect_respond(HttpDialect::MutationOfResponseMessage, &body);
    assert_eq!(messages.len(), 5);
    for message in &messages {
        assert_eq!(message.body.as_ref().unwrap().len(), 20);
    }
}

#[test]
fn segment_sizes_follow_the_ceiling_law() {
    let cases: Vec<(usize, [usize; 5])> = vec![
        (103, [21, 21, 21, 21, 19]),
        (12, [3, 3, 3, 3, 0]),
        (3, [1, 1, 1, 0, 0]),
        (0, [0, 0, 0, 0, 0]),
    ];
    for (total, expected) in cases {
        let body: Vec<u8> = (0..total).map(|i| i as u8).collect();
        let messages = http_dialect_respond(HttpDialect::MutationOfResponseMessage, &body);
        let sizes: Vec<usize> = messages
            .iter()
            .map(|m| m.body.as_ref().unwrap().len())
            .collect();
        assert_eq!(sizes, expected, "total {total}");
        let reassembled = http_dialect_decode(HttpDialect::MutationOfResponseMessage, &messages)
            .unwrap();
        assert_eq!(reassembled, body, "byte conservation at total {total}");
    }
}

#[test]
fn field_shifting_sends_companion_then_empty_trailer() {
    let body = b"<html>page</html>".to_vec();
    let messages = http_dialect_respond(HttpDialect::FieldShifting, &body);
    assert_eq!(messages.len(), 3);
    assert_eq!(messages[0].body.as_deref(), Some(body.as_slice()));
    let reversed: Vec<u8> = body.iter().rev().copied().collect();
    assert_eq!(messages[1].body.as_deref(), Some(reversed.as_slice()));
    assert_eq!(messages[2].body, None, "trailer has no body section");
    assert_eq!(
        http_dialect_decode(HttpDialect::FieldShifting, &messages).unwrap(),
        body
    );
}

#[test]
fn the_two_shapes_are_distinct_and_learnable() {
    let features: Vec<_> = HttpDialect::ALL
        .iter()
        .map(|&d| {
            let messages = http_dialect_respond(d, b"any body at all");
            http_message_features(&messages).expect("fits the envelope")
        })
        .collect();
    assert_ne!(features[0], features[1]);
    let tree = verifier_tree();
    for (features, dialect) in features.iter().zip(HttpDialect::ALL) {
        assert_eq!(tree.predict(features), dialect.id());
    }
}

#[test]
fn verification_accepts_genuine_and_rejects_cross_dialect_shapes() {
    let tree = verifier_tree();
    let body = b"a perfectly ordinary page".to_vec();
    for genuine in HttpDialect::ALL {
        let messages = http_dialect_respond(genuine, &body);
        for expected in HttpDialect::ALL {
            let verdict = http_verify_response(&messages, expected, &tree);
            if expected == genuine {
                assert_eq!(verdict, HttpVerdict::Accept(body.clone()));
            } else {
                assert_eq!(
                    verdict,
                    HttpVerdict::Reject(RejectReason::DialectMismatch),
                    "{genuine:?} shape checked as {expected:?}"
                );
            }
        }
    }
}

#[test]
fn broken_content_laws_read_as_content_mismatch() {
    let tree = verifier_tree();
    let body = vec![1u8; 50];

    // Move a byte across a segment boundary: sizes 9,11,10,10,10 violate
    // the split law even though the total is conserved.
    let mut messages = http_dialect_respond(HttpDialect::MutationOfResponseMessage, &body);
    let moved = messages[0].body.as_mut().unwrap().pop().unwrap();
    messages[1].body.as_mut().unwrap().push(moved);
    assert_eq!(
        http_verify_response(&messages, HttpDialect::MutationOfResponseMessage, &tree),
        HttpVerdict::Reject(RejectReason::ContentMismatch)
    );

    // Wrong companion body.
    let mut messages = http_dialect_respond(HttpDialect::FieldShifting, &body);
    messages[1].body.as_mut().unwrap()[0] ^= 0xff;
    assert_eq!(
        http_verify_response(&messages, HttpDialect::FieldShifting, &tree),
        HttpVerdict::Reject(RejectReason::ContentMismatch)
    );

    // Right shape, wrong status.
    let mut messages = http_dialect_respond(HttpDialect::MutationOfResponseMessage, &body);
    messages[4].status = 404;
    assert_eq!(
        http_verify_response(&messages, HttpDialect::MutationOfResponseMessage, &tree),
        HttpVerdict::Reject(RejectReason::ContentMismatch)
    );
}

#[test]
fn request_lines_parse_and_reject_traversal() {
    assert_eq!(parse_request_line("GET hello.html HTTP/1.1").unwrap(), "hello.html");
    for bad in [
        "POST hello.html HTTP/1.1",
        "GET hello.html HTTP/1.0",
        "GET  HTTP/1.1",
        "GET ../etc/passwd HTTP/1.1",
        "GET a/b.html HTTP/1.1",
    ] {
        assert!(
            matches!(parse_request_line(bad), Err(AdapterError::MalformedRequest(_))),
            "{bad:?} must not parse"
        );
    }
}

#[test]
fn both_dialects_transfer_end_to_end() {
    let fixture = Fixture::new();
    let server = fixture.spawn(EndpointMode::Dialected, endpoint_model());
    let mut client = fixture.client(&server, endpoint_model());

    for page in [PAGE_D1, PAGE_D2] {
        let (result, timing) = client.get(page).unwrap();
        let body = body_of(result);
        let on_disk = std::fs::read(fixture.file_root.path().join(page)).unwrap();
        assert_eq!(body, on_disk, "page {page}");
        assert!(timing.total_ms > 0.0);
        assert!(timing.srv_ms > 0.0);
    }
}

#[test]
fn missing_pages_resolve_to_404_and_the_session_survives() {
    let fixture = Fixture::new();
    let server = fixture.spawn(EndpointMode::Dialected, endpoint_model());
    let mut client = fixture.client(&server, endpoint_model());

    let (result, _) = client.get("absent.html").unwrap();
    assert_eq!(result, HttpTransferResult::NotFound);
    // The session is still usable.
    let (result, _) = client.get(PAGE_D1).unwrap();
    assert!(!body_of(result).is_empty());
}

#[test]
fn an_undialected_server_is_detected_and_the_session_terminates() {
    let fixture = Fixture::new();
    let server = fixture.spawn(EndpointMode::Plain, endpoint_model());
    let mut client = fixture.client(&server, endpoint_model());

    let (result, _) = client.get(PAGE_D1).unwrap();
    // One plain message where five dialect segments were owed: the
    // client refuses to accept the body and tears the session down.
    assert!(
        matches!(
            result,
            HttpTransferResult::Terminated(TerminationReason::ResponseTimeout)
                | HttpTransferResult::Terminated(TerminationReason::DialectMismatch)
        ),
        "got {result:?}"
    );
}

#[test]
fn mismatched_models_terminate_before_the_body_is_accepted() {
    let fixture = Fixture::new();
    let server = fixture.spawn(EndpointMode::Dialected, endpoint_model());
    // The client's model expects the field-shifting dialect for every
    // request; the server picks the segmented one for PAGE_D1.
    let mut client = fixture.client(&server, constant_model(2, 1));

    let (result, _) = client.get(PAGE_D1).unwrap();
    assert_eq!(
        result,
        HttpTransferResult::Terminated(TerminationReason::DialectMismatch)
    );
    assert!(!client.transcript().data_bytes_received());
}

#[test]
fn plain_baseline_round_trips_without_dialects() {
    let fixture = Fixture::new();
    let server = fixture.spawn(EndpointMode::Plain, endpoint_model());
    let mut client = fixture.client(&server, endpoint_model());

    let (result, timing) = client.get_plain(PAGE_D1).unwrap();
    let on_disk = std::fs::read(fixture.file_root.path().join(PAGE_D1)).unwrap();
    assert_eq!(body_of(result), on_disk);
    assert!(timing.total_ms > 0.0);

    let (missing, _) = client.get_plain("absent.html").unwrap();
    assert_eq!(missing, HttpTransferResult::NotFound);
}

#[test]
fn invalid_paths_are_rejected_before_any_wire_activity() {
    let fixture = Fixture::new();
    let server = fixture.spawn(EndpointMode::Dialected, endpoint_model());
    let mut client = fixture.client(&server, endpoint_model());
    assert!(matches!(
        client.get("../secret.html"),
        Err(AdapterError::MalformedRequest(_))
    ));
    assert!(client.transcript().events().is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Byte conservation for both dialects over arbitrary bodies.
    #[test]
    fn any_body_is_conserved(body in proptest::collection::vec(any::<u8>(), 0..400)) {
        for dialect in HttpDialect::ALL {
            let messages = http_dialect_respond(dialect, &body);
            prop_assert_eq!(messages.len(), dialect.message_count());
            let reassembled = http_dialect_decode(dialect, &messages).unwrap();
            prop_assert_eq!(&reassembled, &body);
        }
    }
}
