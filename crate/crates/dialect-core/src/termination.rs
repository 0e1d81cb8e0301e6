//! The reasons a verifying endpoint tears a session down.

/// Why a client (or broker) terminated a session instead of continuing.
/// Shared by every protocol front end: mismatches come from response
/// verification, the rest from the transport behaving badly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TerminationReason {
    /// The reply's shape was not the agreed dialect's.
    DialectMismatch,
    /// Right shape, wrong contents for this request.
    ContentMismatch,
    /// The peer went silent mid-response.
    ResponseTimeout,
    /// The peer closed the connection.
    ConnectionClosed,
    /// Transport-level failure.
    Io(String),
}
