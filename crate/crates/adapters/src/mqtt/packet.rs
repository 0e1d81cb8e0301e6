//! Publish-packet wire format.
//!
//! A dialected publish is a PUBLISH fixed header (control byte, then the
//! standard variable-length remaining-length encoding) whose body is a
//! sequence of length-prefixed fields: 2 big-endian bytes of length, then
//! that many bytes of UTF-8. The fields must cover the declared remaining
//! length exactly. How many fields a packet carries — and which slot
//! holds the topic — is the dialect layer's business.
//!
//! The *plain* (undialected) publish keeps the length prefix only on the
//! topic; the payload is simply the rest of the packet, as in stock MQTT.
//! Only the dialected form is parseable by the broker's field scanner,
//! which is precisely what makes undialected floods rejectable on shape
//! alone.

use std::io::{self, Read};

use crate::AdapterError;

/// PUBLISH control byte (packet type 3, flags clear).
pub const PUBLISH_CONTROL: u8 = 0x30;

/// A minimal publish acknowledgement: PUBACK control byte, remaining
/// length 2, and a zero packet identifier.
pub const PUBACK_BYTES: [u8; 4] = [0x40, 0x02, 0x00, 0x00];

/// Largest value a 2-byte length prefix can declare.
const MAX_FIELD_LEN: usize = u16::MAX as usize;

/// One publish packet as a sequence of string fields. Slot meaning is
/// dialect-dependent; the packet layer only guarantees framing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MqttPublish {
    fields: Vec<String>,
}

impl MqttPublish {
    /// Builds a packet, rejecting fields too long for the length prefix.
    pub fn from_fields(fields: Vec<String>) -> Result<Self, AdapterError> {
        if fields.is_empty() {
            return Err(AdapterError::MalformedPacket(
                "a publish packet needs at least one field".into(),
            ));
        }
        for field in &fields {
            if field.len() > MAX_FIELD_LEN {
                return Err(AdapterError::OversizedField { len: field.len() });
            }
        }
        Ok(Self { fields })
    }

    pub fn fields(&self) -> &[String] {
        &self.fields
    }

    /// Full wire form: control byte, remaining length, prefixed fields.
    pub fn to_bytes(&self) -> Vec<u8> {
        let body_len: usize = self.fields.iter().map(|f| 2 + f.len()).sum();
        let mut out = Vec::with_capacity(2 + body_len);
        out.push(PUBLISH_CONTROL);
        encode_remaining_length(body_len, &mut out);
        for field in &self.fields {
            out.extend_from_slice(&(field.len() as u16).to_be_bytes());
            out.extend_from_slice(field.as_bytes());
        }
        out
    }

    /// Parses a full packet. The declared remaining length must match the
    /// bytes given, and the fields must cover it exactly.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AdapterError> {
        let (&control, rest) = bytes
            .split_first()
            .ok_or_else(|| AdapterError::MalformedPacket("empty packet".into()))?;
        if control != PUBLISH_CONTROL {
            return Err(AdapterError::MalformedPacket(format!(
                "control byte {control:#04x} is not PUBLISH"
            )));
        }
        let (declared, header_len) = decode_remaining_length(rest)?;
        let body = &rest[header_len..];
        if body.len() != declared {
            return Err(AdapterError::MalformedPacket(format!(
                "remaining length declares {declared} bytes, got {}",
                body.len()
            )));
        }
        Self::decode_body(body)
    }

    /// Parses a packet body (after control byte and remaining length)
    /// into fields that must cover it exactly.
    pub(crate) fn decode_body(body: &[u8]) -> Result<Self, AdapterError> {
        let mut fields = Vec::new();
        let mut at = 0;
        while at < body.len() {
            let Some(prefix) = body.get(at..at + 2) else {
                return Err(AdapterError::MalformedPacket(
                    "truncated field length prefix".into(),
                ));
            };
            let len = usize::from(u16::from_be_bytes([prefix[0], prefix[1]]));
            at += 2;
            let Some(raw) = body.get(at..at + len) else {
                return Err(AdapterError::MalformedPacket(format!(
                    "field declares {len} bytes, only {} remain",
                    body.len() - at
                )));
            };
            at += len;
            let text = std::str::from_utf8(raw)
                .map_err(|_| AdapterError::MalformedPacket("field is not UTF-8".into()))?;
            fields.push(text.to_string());
        }
        Self::from_fields(fields)
    }
}

/// A stock (undialected) publish: prefixed topic, raw payload.
pub fn encode_plain_publish(topic: &str, message: &str) -> Result<Vec<u8>, AdapterError> {
    if topic.len() > MAX_FIELD_LEN {
        return Err(AdapterError::OversizedField { len: topic.len() });
    }
    let body_len = 2 + topic.len() + message.len();
    let mut out = Vec::with_capacity(2 + body_len);
    out.push(PUBLISH_CONTROL);
    encode_remaining_length(body_len, &mut out);
    out.extend_from_slice(&(topic.len() as u16).to_be_bytes());
    out.extend_from_slice(topic.as_bytes());
    out.extend_from_slice(message.as_bytes());
    Ok(out)
}

/// Parses a stock publish body into (topic, payload-as-UTF-8).
pub(crate) fn decode_plain_body(body: &[u8]) -> Result<(String, String), AdapterError> {
    let Some(prefix) = body.get(..2) else {
        return Err(AdapterError::MalformedPacket(
            "missing topic length prefix".into(),
        ));
    };
    let len = usize::from(u16::from_be_bytes([prefix[0], prefix[1]]));
    let Some(raw_topic) = body.get(2..2 + len) else {
        return Err(AdapterError::MalformedPacket(
            "topic longer than packet".into(),
        ));
    };
    let topic = std::str::from_utf8(raw_topic)
        .map_err(|_| AdapterError::MalformedPacket("topic is not UTF-8".into()))?;
    let message = std::str::from_utf8(&body[2 + len..])
        .map_err(|_| AdapterError::MalformedPacket("payload is not UTF-8".into()))?;
    Ok((topic.to_string(), message.to_string()))
}

/// Standard remaining-length encoding: 7 bits per byte, low bits first,
/// high bit marks continuation.
fn encode_remaining_length(mut n: usize, out: &mut Vec<u8>) {
    loop {
        let mut byte = (n % 128) as u8;
        n /= 128;
        if n > 0 {
            byte |= 0x80;
        }
        out.push(byte);
        if n == 0 {
            return;
        }
    }
}

/// Decodes a remaining length from the head of `bytes`. Returns the value
/// and how many bytes the encoding used.
fn decode_remaining_length(bytes: &[u8]) -> Result<(usize, usize), AdapterError> {
    let mut value = 0usize;
    for (i, &byte) in bytes.iter().enumerate().take(4) {
        value += usize::from(byte & 0x7f) << (7 * i);
        if byte & 0x80 == 0 {
            return Ok((value, i + 1));
        }
    }
    Err(AdapterError::MalformedPacket(
        "unterminated remaining-length encoding".into(),
    ))
}

/// Reads one packet (any control byte) off a stream. `Ok(None)` means the
/// peer closed before a packet started.
pub(crate) fn read_raw_packet(reader: &mut impl Read) -> io::Result<Option<(u8, Vec<u8>)>> {
    let mut control = [0u8; 1];
    match reader.read_exact(&mut control) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let mut length = 0usize;
    for i in 0..4 {
        let mut byte = [0u8; 1];
        reader.read_exact(&mut byte)?;
        length += usize::from(byte[0] & 0x7f) << (7 * i);
        if byte[0] & 0x80 == 0 {
            let mut body = vec![0u8; length];
            reader.read_exact(&mut body)?;
            return Ok(Some((control[0], body)));
        }
    }
    Err(io::Error::new(
        io::ErrorKind::InvalidData,
        "unterminated remaining-length encoding",
    ))
}
