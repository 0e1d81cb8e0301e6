//! Dialected FTP over TCP.
//!
//! Both endpoints load the same decision model. For every request the
//! client predicts a dialect, sends the request in plain form, and the
//! server — having predicted the same dialect from the same bytes —
//! answers with that dialect's response structure. The client verifies
//! the structure and field contents before any file bytes move; a reply
//! that fails verification terminates the whole session immediately.
//!
//! Wire format: CRLF-terminated lines on the control channel, dialect
//! fields comma-separated within a line, raw bytes on a separate data
//! channel that the server opens toward the client-advertised port.

mod client;
mod config;
mod server;
mod wire;

pub use client::{ClientConfig, FtpClient, TransferResult};
pub use config::{DialectEngine, ServerConfig, ServerMode};
pub use server::{spawn_server, ServerHandle, GREETING, PORT_OK, READY_ACK, RECEIVED_ACK};
pub use vp_dialect::{
    Channel, Direction, Phase, SessionTranscript, TerminationReason, TimingReport,
    TranscriptEvent,
};

/// Errors establishing or driving a session. Mid-transfer peer
/// misbehavior is not an `Err` — it surfaces as
/// [`TransferResult::Terminated`].
#[derive(Debug, thiserror::Error)]
pub enum FtpError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("login rejected: {0}")]
    LoginRejected(String),
    #[error("unexpected control reply: {0:?}")]
    UnexpectedReply(String),
    #[error("request must be \"get <filename>\", got {0:?}")]
    MalformedRequest(String),
}
