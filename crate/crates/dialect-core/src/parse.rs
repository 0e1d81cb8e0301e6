//! Parsing of received response messages into a typed structure.
//!
//! Parsing is deliberately forgiving about *content* — any single-line
//! byte string splits into fields — and strict about *shape*: typing is
//! syntactic, so a peer can only reproduce a dialect's signature by
//! actually phrasing its reply the way that dialect does.

use crate::schema::{signature_of, FieldType};

/// One message as it appears on the control channel: a single line,
/// excluding the terminator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireMessage(String);

impl WireMessage {
    /// Wraps a line payload. The payload must not embed the line framing.
    pub fn new(payload: impl Into<String>) -> Result<Self, ParseError> {
        let payload = payload.into();
        if payload.contains(['\r', '\n']) {
            return Err(ParseError::EmbeddedNewline);
        }
        Ok(Self(payload))
    }

    /// Wraps raw line bytes as received from a peer. Invalid UTF-8 is
    /// replaced rather than rejected: a garbled field still parses, types
    /// as a string, and fails verification downstream instead of crashing
    /// the framing layer.
    pub fn from_line_bytes(bytes: &[u8]) -> Self {
        let text = String::from_utf8_lossy(bytes).into_owned();
        debug_assert!(!text.contains(['\r', '\n']), "line framing strips terminators");
        Self(text)
    }

    pub fn payload(&self) -> &str {
        &self.0
    }
}

/// One parsed field: the raw token and its syntactic type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldValue {
    pub text: String,
    pub ftype: FieldType,
}

impl FieldValue {
    /// Numeric value of an integer-typed field. `None` for string fields
    /// or integers too wide to represent.
    pub fn as_int(&self) -> Option<i128> {
        match self.ftype {
            FieldType::Int => self.text.parse().ok(),
            FieldType::Str => None,
        }
    }
}

/// A full parsed reply: one field list per received message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseStructure {
    packets: Vec<Vec<FieldValue>>,
}

impl ResponseStructure {
    pub fn packets(&self) -> &[Vec<FieldValue>] {
        &self.packets
    }

    pub fn packet_count(&self) -> usize {
        self.packets.len()
    }

    /// Signature in the same format as [`crate::ResponseSchema::signature`],
    /// so a structure can be compared against a schema directly.
    pub fn signature(&self) -> String {
        signature_of(
            self.packets
                .iter()
                .map(|p| p.iter().map(|f| f.ftype)),
        )
    }
}

/// Errors from structural parsing.
#[derive(Debug, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("response carried no messages")]
    EmptyResponse,
    #[error("wire message payload may not contain CR or LF")]
    EmbeddedNewline,
}

/// Splits each message on `,` and types every token. Empty tokens are
/// legal and type as strings, so `""` parses to one empty string field.
pub fn parse_response(messages: &[WireMessage]) -> Result<ResponseStructure, ParseError> {
    if messages.is_empty() {
        return Err(ParseError::EmptyResponse);
    }
    let packets = messages
        .iter()
        .map(|m| {
            m.payload()
                .split(',')
                .map(|token| FieldValue {
                    text: token.to_owned(),
                    ftype: FieldType::classify(token),
                })
                .collect()
        })
        .collect();
    Ok(ResponseStructure { packets })
}
