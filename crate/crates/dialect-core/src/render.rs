//! Rendering of response messages from a request context, for both the
//! found and not-found outcomes of a file request.

use crate::parse::WireMessage;
use crate::registry::Dialect;
use crate::schema::FieldSemantic;

/// The pieces of a client request a server needs to phrase its reply.
///
/// `file_size` is `None` on endpoints that cannot know it up front (a
/// client verifying a reply about a file it has never seen); rendering a
/// found-file response requires it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestContext {
    pub command: String,
    pub filename: String,
    pub file_size: Option<u64>,
}

impl RequestContext {
    pub fn new(
        command: impl Into<String>,
        filename: impl Into<String>,
        file_size: Option<u64>,
    ) -> Self {
        Self {
            command: command.into(),
            filename: filename.into(),
            file_size,
        }
    }
}

/// Errors from response rendering.
#[derive(Debug, PartialEq, thiserror::Error)]
pub enum RenderError {
    #[error("file size required to render a found-file response")]
    MissingFileSize,
    #[error("invalid request context: {0}")]
    InvalidContext(&'static str),
}

/// Checks the context invariants every dialect relies on for type-stable
/// rendering: commands are alphabetic, filenames are plain tokens with at
/// least one non-digit (so an echoed filename can never read as an
/// integer), and neither can smuggle field or line separators.
pub(crate) fn validate_context(ctx: &RequestContext) -> Result<(), RenderError> {
    if ctx.command.is_empty() || !ctx.command.bytes().all(|b| b.is_ascii_alphabetic()) {
        return Err(RenderError::InvalidContext("command must be alphabetic"));
    }
    let name_ok = !ctx.filename.is_empty()
        && ctx
            .filename
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'.' | b'_' | b'-'))
        && !ctx.filename.bytes().all(|b| b.is_ascii_digit());
    if !name_ok {
        return Err(RenderError::InvalidContext(
            "filename must be a plain token with at least one non-digit",
        ));
    }
    Ok(())
}

impl Dialect {
    /// Renders this dialect's reply for a request that names an existing
    /// file of `ctx.file_size` bytes. One `WireMessage` per response packet.
    pub fn render_response(&self, ctx: &RequestContext) -> Result<Vec<WireMessage>, RenderError> {
        validate_context(ctx)?;
        let size = ctx.file_size.ok_or(RenderError::MissingFileSize)?;
        Ok(self.render_fields(ctx, Outcome::Found(size)))
    }

    /// Renders this dialect's reply for a request that names a missing
    /// file. Same shape as the found reply — size-bearing fields carry
    /// sign-flipped sentinels instead, so the schema stays type-stable and
    /// the outcome remains unambiguous to the verifying peer.
    pub fn render_not_found(&self, ctx: &RequestContext) -> Result<Vec<WireMessage>, RenderError> {
        validate_context(ctx)?;
        Ok(self.render_fields(ctx, Outcome::NotFound))
    }

    fn render_fields(&self, ctx: &RequestContext, outcome: Outcome) -> Vec<WireMessage> {
        self.schema()
            .packets()
            .iter()
            .map(|packet| {
                let line = packet
                    .fields()
                    .iter()
                    .map(|&f| render_field(f, ctx, outcome))
                    .collect::<Vec<_>>()
                    .join(",");
                WireMessage::new(line).expect("rendered fields are single-line")
            })
            .collect()
    }
}

#[derive(Clone, Copy)]
enum Outcome {
    Found(u64),
    NotFound,
}

fn render_field(semantic: FieldSemantic, ctx: &RequestContext, outcome: Outcome) -> String {
    use FieldSemantic::*;

    match (semantic, outcome) {
        (ExistsText, Outcome::Found(_)) => "File exists".to_owned(),
        (ExistsText, Outcome::NotFound) => "File does not exist".to_owned(),
        // Inverse-speaking dialect: polarity of the prose is flipped.
        (ExistsTextInverse, Outcome::Found(_)) => "File does not exist".to_owned(),
        (ExistsTextInverse, Outcome::NotFound) => "File exists".to_owned(),
        (ExistsNumeral, Outcome::Found(_)) => "1".to_owned(),
        (ExistsNumeral, Outcome::NotFound) => "0".to_owned(),
        (FileSize, Outcome::Found(size)) => size.to_string(),
        (FileSizeNegated, Outcome::Found(size)) => (-(size as i128)).to_string(),
        (FileSizeHalf, Outcome::Found(size)) => (size / 2).to_string(),
        (FileSizeRemainder, Outcome::Found(size)) => (size - size / 2).to_string(),
        // Sentinels for a missing file: plain size fields go negative, the
        // negated field goes positive. Zero-size files keep both outcomes
        // distinguishable because the sentinels are never 0.
        (FileSize | FileSizeHalf | FileSizeRemainder, Outcome::NotFound) => "-1".to_owned(),
        (FileSizeNegated, Outcome::NotFound) => "1".to_owned(),
        (FilenameText, _) => ctx.filename.clone(),
        (CommandText, _) => ctx.command.clone(),
        (FilenameLen, _) => ctx.filename.len().to_string(),
        (CommandLen, _) => ctx.command.len().to_string(),
        (ClosedNotice, _) => "Connection Closed".to_owned(),
    }
}
