//! Dialect adapters for two further protocols, proving the scheme is not
//! FTP-specific.
//!
//! *MQTT*: the **client** authenticates. Each publish is encoded in one
//! of three packet-level dialects chosen by the shared decision model
//! from the topic alone; the broker re-derives the dialect from the same
//! topic, verifies the packet structure, and disconnects on any mismatch
//! before the payload is stored.
//!
//! *HTTP*: the **server** authenticates, exactly as in the file-transfer
//! protocol. The response to a `GET` is shaped by one of two dialects
//! chosen from the full request line; the client verifies the shape and
//! reassembles the body, terminating the session on any mismatch.
//!
//! Each protocol trains its own decision model over its own request
//! corpus (topics for MQTT, request lines for HTTP), so the class counts
//! differ per protocol. The structural verifier reuses the same
//! decision-tree machinery as the file-transfer protocol, over the shape
//! features of the packet sequence.

mod corpus;
pub mod http;
pub mod mqtt;

pub use corpus::{http_request_corpus, mqtt_topic_corpus};

/// How an endpoint speaks: dialected (authenticating) or the plain
/// baseline protocol used for overhead comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EndpointMode {
    #[default]
    Dialected,
    Plain,
}

/// Errors from the adapter layers. Wire-level misbehavior of a *peer* is
/// never an error — it surfaces as a reject verdict or a termination —
/// so these are caller bugs and transport failures only.
#[derive(Debug, thiserror::Error)]
pub enum AdapterError {
    #[error("field of {len} bytes exceeds the 16-bit length prefix")]
    OversizedField { len: usize },
    #[error("topic and message must be non-empty")]
    EmptyField,
    #[error("malformed packet: {0}")]
    MalformedPacket(String),
    #[error("request path {0:?} must be a bare filename")]
    MalformedRequest(String),
    #[error("model chose dialect {0}, unknown to this protocol")]
    UnknownDialect(u16),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
