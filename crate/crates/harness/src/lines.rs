//! Minimal CRLF line transport for the attacker endpoints.
//!
//! The attackers deliberately do not link against the genuine server's
//! internals; they speak the base protocol with their own few lines of
//! socket code, like any outside party would.

use std::io::{self, BufRead, BufReader, Write};
use std::net::TcpStream;

pub(crate) fn send_line(stream: &mut TcpStream, line: &str) -> io::Result<()> {
    stream.write_all(line.as_bytes())?;
    stream.write_all(b"\r\n")
}

/// One line without its terminator; `None` on clean EOF.
pub(crate) fn read_line(reader: &mut BufReader<TcpStream>) -> io::Result<Option<String>> {
    let mut line = String::new();
    if reader.read_line(&mut line)? == 0 {
        return Ok(None);
    }
    while line.ends_with('\n') || line.ends_with('\r') {
        line.pop();
    }
    Ok(Some(line))
}
