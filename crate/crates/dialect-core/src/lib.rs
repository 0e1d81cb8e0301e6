//! Protocol dialects: per-request variations of an application-layer
//! protocol's response format, used as lightweight authentication
//! fingerprints.
//!
//! A *dialect* fixes the shape of a server's reply to a file request: how
//! many messages the server sends and which fields each message carries.
//! Both endpoints derive the same dialect for every request, so a peer
//! that answers in the wrong shape gives itself away and the session can
//! be torn down before any payload moves. This crate owns the dialect
//! registry for the FTP-style file transfer protocol, renders response
//! messages from a request context, and parses received messages back
//! into a typed structure for verification.

mod parse;
mod registry;
mod render;
mod schema;
mod termination;
mod timing;
mod transcript;

pub use parse::{parse_response, FieldValue, ParseError, ResponseStructure, WireMessage};
pub use registry::{register_ftp_dialects, Dialect, DialectRegistry, RegistryError};
pub use render::{RenderError, RequestContext};
pub use schema::{FieldSemantic, FieldType, PacketSchema, ResponseSchema};
pub use termination::TerminationReason;
pub use timing::TimingReport;
pub use transcript::{Channel, Direction, Phase, SessionTranscript, TranscriptEvent};

use std::fmt;
use std::num::ParseIntError;
use std::str::FromStr;

/// Identifier of a registered dialect. Numbering is 1-based: the first
/// dialect in a registry is `DialectId(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DialectId(u16);

impl DialectId {
    /// Builds an id. Returns `None` for 0, which is never a valid dialect.
    pub fn new(raw: u16) -> Option<Self> {
        (raw != 0).then_some(Self(raw))
    }

    pub fn get(self) -> u16 {
        self.0
    }

    /// Zero-based index into a registry's dialect table.
    pub fn index(self) -> usize {
        usize::from(self.0) - 1
    }

    /// Inverse of [`DialectId::index`].
    pub fn from_index(index: usize) -> Self {
        Self(u16::try_from(index + 1).expect("dialect index out of range"))
    }
}

impl fmt::Display for DialectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Errors from parsing a dialect id out of user input (CLI flags, config).
#[derive(Debug, thiserror::Error)]
pub enum DialectIdParseError {
    #[error("dialect id is not a number: {0}")]
    NotANumber(#[from] ParseIntError),
    #[error("dialect ids start at 1")]
    Zero,
}

impl FromStr for DialectId {
    type Err = DialectIdParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let raw: u16 = s.trim().parse()?;
        DialectId::new(raw).ok_or(DialectIdParseError::Zero)
    }
}
