//! The two response dialects and the client-side verifier.
//!
//! - `MutationOfResponseMessage` — the body travels in exactly five
//!   segments, each its own response message. Segment sizes follow a
//!   fixed law: the first segments take the ceiling of an equal split,
//!   the last takes the remainder, so the split is uniquely determined
//!   by the total length and checkable by the receiver.
//! - `FieldShifting` — three messages: the requested body, then a
//!   deterministic companion body (the requested bytes reversed), then a
//!   trailer with no body section at all.

use vp_dialect::DialectId;
use vp_srv::{DecisionTree, RejectReason, StructureFeatures, FEATURE_COUNT, MAX_FIELDS};

use super::message::HttpMessage;
use crate::AdapterError;

/// Number of response dialects; decision models for this protocol have
/// this many output classes.
pub const HTTP_DIALECT_COUNT: usize = 2;

/// How many segments the segmented dialect uses.
pub const RESPONSE_SEGMENTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HttpDialect {
    MutationOfResponseMessage,
    FieldShifting,
}

impl HttpDialect {
    pub const ALL: [HttpDialect; HTTP_DIALECT_COUNT] = [
        HttpDialect::MutationOfResponseMessage,
        HttpDialect::FieldShifting,
    ];

    pub fn id(self) -> DialectId {
        let index = Self::ALL.iter().position(|d| *d == self).expect("listed");
        DialectId::from_index(index)
    }

    pub fn from_id(id: DialectId) -> Option<Self> {
        Self::ALL.get(id.index()).copied()
    }

    /// How many messages one response occupies in this dialect.
    pub fn message_count(self) -> usize {
        match self {
            HttpDialect::MutationOfResponseMessage => RESPONSE_SEGMENTS,
            HttpDialect::FieldShifting => 3,
        }
    }
}

/// Client verdict for one received response sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HttpVerdict {
    /// Structure and dialect agree; here is the reassembled body.
    Accept(Vec<u8>),
    Reject(RejectReason),
}

impl HttpVerdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, HttpVerdict::Accept(_))
    }
}

fn companion_body(body: &[u8]) -> Vec<u8> {
    body.iter().rev().copied().collect()
}

/// The unique five-way split of `total` bytes: equal ceiling-sized
/// segments, the last taking whatever remains.
fn segment_sizes(total: usize) -> [usize; RESPONSE_SEGMENTS] {
    let head = total.div_ceil(RESPONSE_SEGMENTS);
    let mut sizes = [0usize; RESPONSE_SEGMENTS];
    let mut remaining = total;
    for size in &mut sizes {
        *size = head.min(remaining);
        remaining -= *size;
    }
    sizes
}

/// Renders a found resource's response messages in the given dialect.
pub fn http_dialect_respond(dialect: HttpDialect, body: &[u8]) -> Vec<HttpMessage> {
    match dialect {
        HttpDialect::MutationOfResponseMessage => {
            let mut at = 0;
            segment_sizes(body.len())
                .into_iter()
                .map(|size| {
                    let segment = &body[at..at + size];
                    at += size;
                    HttpMessage::ok(segment)
                })
                .collect()
        }
        HttpDialect::FieldShifting => vec![
            HttpMessage::ok(body),
            HttpMessage::ok(companion_body(body)),
            HttpMessage::without_body(200),
        ],
    }
}

/// Inverse of [`http_dialect_respond`]: reassembles the original body
/// from a sequence that must match the dialect's shape and content laws.
pub fn http_dialect_decode(
    dialect: HttpDialect,
    messages: &[HttpMessage],
) -> Result<Vec<u8>, AdapterError> {
    let features = http_message_features(messages)
        .ok_or_else(|| AdapterError::MalformedPacket("unencodable response shape".into()))?;
    if features != canonical_features(dialect) {
        return Err(AdapterError::MalformedPacket(format!(
            "sequence does not have the {dialect:?} shape"
        )));
    }
    if !content_ok(dialect, messages) {
        return Err(AdapterError::MalformedPacket(format!(
            "sequence violates the {dialect:?} content rules"
        )));
    }
    Ok(reassemble(dialect, messages))
}

/// Body reassembly for a sequence already known to have the right shape.
fn reassemble(dialect: HttpDialect, messages: &[HttpMessage]) -> Vec<u8> {
    match dialect {
        HttpDialect::MutationOfResponseMessage => messages
            .iter()
            .flat_map(|m| m.body.as_deref().expect("shape has bodies"))
            .copied()
            .collect(),
        HttpDialect::FieldShifting => messages[0].body.clone().expect("shape has a body"),
    }
}

/// Value-level laws beyond shape: statuses, the segment-size law, and
/// the companion derivation.
fn content_ok(dialect: HttpDialect, messages: &[HttpMessage]) -> bool {
    if messages.iter().any(|m| m.status != 200) {
        return false;
    }
    match dialect {
        HttpDialect::MutationOfResponseMessage => {
            let lengths: Vec<usize> = messages
                .iter()
                .map(|m| m.body.as_deref().expect("shape has bodies").len())
                .collect();
            let total: usize = lengths.iter().sum();
            lengths == segment_sizes(total)
        }
        HttpDialect::FieldShifting => {
            let requested = messages[0].body.as_deref().expect("shape has a body");
            let companion = messages[1].body.as_deref().expect("shape has a body");
            companion == companion_body(requested)
        }
    }
}

/// Shape features of a response sequence: message count, then per
/// message a field count and type codes — an integer status field,
/// plus a string body field when the message has a body section.
pub fn http_message_features(messages: &[HttpMessage]) -> Option<StructureFeatures> {
    if messages.is_empty() || messages.len() > vp_srv::MAX_PACKETS {
        return None;
    }
    let mut out = [0.0f32; FEATURE_COUNT];
    out[0] = messages.len() as f32;
    for (mi, message) in messages.iter().enumerate() {
        let base = 1 + mi * (1 + MAX_FIELDS);
        out[base + 1] = 2.0; // integer status
        if message.body.is_some() {
            out[base] = 2.0;
            out[base + 2] = 1.0; // string body
        } else {
            out[base] = 1.0;
        }
    }
    Some(StructureFeatures(out))
}

/// The canonical features of each dialect's shape.
fn canonical_features(dialect: HttpDialect) -> StructureFeatures {
    let messages = http_dialect_respond(dialect, b"0123456789");
    http_message_features(&messages).expect("canonical shapes fit the envelope")
}

/// Labeled shape samples for training the client's structural verifier.
pub fn http_shape_dataset(samples_per_class: usize) -> Vec<(StructureFeatures, DialectId)> {
    HttpDialect::ALL
        .iter()
        .flat_map(|&dialect| {
            std::iter::repeat((canonical_features(dialect), dialect.id())).take(samples_per_class)
        })
        .collect()
}

/// Client-side verification of one response sequence against the dialect
/// the client derived for its own request.
pub fn http_verify_response(
    messages: &[HttpMessage],
    expected: HttpDialect,
    tree: &DecisionTree,
) -> HttpVerdict {
    let Some(features) = http_message_features(messages) else {
        return HttpVerdict::Reject(RejectReason::DialectMismatch);
    };
    if tree.predict(&features) != expected.id() {
        return HttpVerdict::Reject(RejectReason::DialectMismatch);
    }
    if features != canonical_features(expected) {
        return HttpVerdict::Reject(RejectReason::DialectMismatch);
    }
    if !content_ok(expected, messages) {
        return HttpVerdict::Reject(RejectReason::ContentMismatch);
    }
    HttpVerdict::Accept(reassemble(expected, messages))
}
