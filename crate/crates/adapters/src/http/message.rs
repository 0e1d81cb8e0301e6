//! Minimal HTTP/1.1 message framing.
//!
//! A response message is a status line, an optional `Content-Length`
//! header, a blank line, and exactly that many body bytes. "No response
//! body" means the header is absent entirely — distinct from a present
//! but zero-length body, and that distinction is structural: it is how
//! the field-shifting dialect's empty trailer differs from an empty
//! segment.

use std::io::{self, BufRead, Write};

use crate::AdapterError;

/// One response message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpMessage {
    pub status: u16,
    /// `Some` when the message declares a body (possibly empty); `None`
    /// when it has no body section at all.
    pub body: Option<Vec<u8>>,
}

impl HttpMessage {
    pub fn ok(body: impl Into<Vec<u8>>) -> Self {
        Self {
            status: 200,
            body: Some(body.into()),
        }
    }

    pub fn without_body(status: u16) -> Self {
        Self { status, body: None }
    }

    pub fn write_to(&self, writer: &mut impl Write) -> io::Result<()> {
        let reason = reason_phrase(self.status);
        match &self.body {
            Some(body) => {
                write!(
                    writer,
                    "HTTP/1.1 {} {}\r\nContent-Length: {}\r\n\r\n",
                    self.status,
                    reason,
                    body.len()
                )?;
                writer.write_all(body)?;
            }
            None => write!(writer, "HTTP/1.1 {} {}\r\n\r\n", self.status, reason)?,
        }
        writer.flush()
    }

    /// Reads one message. `Ok(None)` means the peer closed before a
    /// status line started; any malformation is `InvalidData`.
    pub fn read_from(reader: &mut impl BufRead) -> io::Result<Option<Self>> {
        let Some(status_line) = read_crlf_line(reader)? else {
            return Ok(None);
        };
        let status = parse_status_line(&status_line)
            .ok_or_else(|| invalid(format!("bad status line {status_line:?}")))?;

        let mut content_length: Option<usize> = None;
        loop {
            let line = read_crlf_line(reader)?
                .ok_or_else(|| invalid("connection closed inside headers".into()))?;
            if line.is_empty() {
                break;
            }
            if let Some((name, value)) = line.split_once(':') {
                if name.eq_ignore_ascii_case("content-length") {
                    let parsed = value
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| invalid(format!("bad content length {value:?}")))?;
                    content_length = Some(parsed);
                }
            }
        }
        let body = match content_length {
            Some(len) => {
                let mut body = vec![0u8; len];
                reader.read_exact(&mut body)?;
                Some(body)
            }
            None => None,
        };
        Ok(Some(Self { status, body }))
    }
}

fn reason_phrase(status: u16) -> &'static str {
    match status {
        200 => "OK",
        400 => "Bad Request",
        404 => "Not Found",
        _ => "Unspecified",
    }
}

fn parse_status_line(line: &str) -> Option<u16> {
    let rest = line.strip_prefix("HTTP/1.1 ")?;
    let code = rest.split(' ').next()?;
    code.parse().ok()
}

fn invalid(message: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, message)
}

/// Reads one CRLF-terminated line, without the terminator. `Ok(None)` on
/// clean EOF before any byte.
pub(crate) fn read_crlf_line(reader: &mut impl BufRead) -> io::Result<Option<String>> {
    let mut raw = Vec::new();
    let n = reader.read_until(b'\n', &mut raw)?;
    if n == 0 {
        return Ok(None);
    }
    if raw.last() == Some(&b'\n') {
        raw.pop();
        if raw.last() == Some(&b'\r') {
            raw.pop();
        }
    }
    String::from_utf8(raw)
        .map(Some)
        .map_err(|_| invalid("line is not UTF-8".into()))
}

/// Validates a request path: a bare filename, no separators, no blanks.
pub(crate) fn validate_path(path: &str) -> Result<(), AdapterError> {
    if path.is_empty() || path.contains(['/', '\\', ' ']) {
        return Err(AdapterError::MalformedRequest(path.to_string()));
    }
    Ok(())
}

/// Extracts the path from a `GET <path> HTTP/1.1` request line.
pub fn parse_request_line(line: &str) -> Result<&str, AdapterError> {
    let bad = || AdapterError::MalformedRequest(line.to_string());
    let rest = line.strip_prefix("GET ").ok_or_else(bad)?;
    let path = rest.strip_suffix(" HTTP/1.1").ok_or_else(bad)?;
    validate_path(path)?;
    Ok(path)
}

/// Sends `GET <path> HTTP/1.1` with an empty header section.
pub(crate) fn write_request(writer: &mut impl Write, request_line: &str) -> io::Result<()> {
    write!(writer, "{request_line}\r\n\r\n")?;
    writer.flush()
}

/// Reads a request line, consuming any headers up to the blank line.
/// `Ok(None)` on clean EOF.
pub(crate) fn read_request(reader: &mut impl BufRead) -> io::Result<Option<String>> {
    let Some(request_line) = read_crlf_line(reader)? else {
        return Ok(None);
    };
    loop {
        let line = read_crlf_line(reader)?
            .ok_or_else(|| invalid("connection closed inside request headers".into()))?;
        if line.is_empty() {
            return Ok(Some(request_line));
        }
    }
}
