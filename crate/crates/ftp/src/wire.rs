//! Line framing shared by both endpoints: CRLF-terminated control lines.

use std::io::{self, BufRead, BufReader, Read, Write};

pub(crate) fn send_line<W: Write>(writer: &mut W, line: &str) -> io::Result<()> {
    debug_assert!(!line.contains(['\r', '\n']));
    writer.write_all(line.as_bytes())?;
    writer.write_all(b"\r\n")?;
    writer.flush()
}

/// Reads one line, stripping the terminator. `Ok(None)` means the peer
/// closed the connection. Read-timeout errors pass through as `Err` with
/// kind `WouldBlock`/`TimedOut` for the caller to classify.
pub(crate) fn read_line<R: Read>(reader: &mut BufReader<R>) -> io::Result<Option<String>> {
    let mut line = String::new();
    let read = reader.read_line(&mut line)?;
    if read == 0 {
        return Ok(None);
    }
    while line.ends_with(['\r', '\n']) {
        line.pop();
    }
    Ok(Some(line))
}

pub(crate) fn is_timeout(error: &io::Error) -> bool {
    matches!(
        error.kind(),
        io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut
    )
}
