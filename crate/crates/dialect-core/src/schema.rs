//! Response schemas: the per-dialect description of what a server reply
//! looks like on the wire, independent of any concrete request.

use std::fmt;

/// Syntactic type of one rendered field.
///
/// Typing is purely syntactic: a field is an integer exactly when the whole
/// token is an optionally negated run of ASCII digits. Everything else,
/// including the empty string, is a string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldType {
    Str,
    Int,
}

impl FieldType {
    /// One-letter code used in schema signatures.
    pub fn code(self) -> char {
        match self {
            FieldType::Str => 's',
            FieldType::Int => 'i',
        }
    }

    /// Classifies a raw field token.
    pub fn classify(token: &str) -> Self {
        let digits = token.strip_prefix('-').unwrap_or(token);
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            FieldType::Int
        } else {
            FieldType::Str
        }
    }
}

/// What a response field carries. Semantics drive both rendering and the
/// client-side content checks; the syntactic type is derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldSemantic {
    /// Prose outcome: `File exists` / `File does not exist`.
    ExistsText,
    /// Prose outcome with inverted polarity: a found file renders as
    /// `File does not exist`, and vice versa.
    ExistsTextInverse,
    /// Numeric outcome: `1` when the file exists, `0` otherwise.
    ExistsNumeral,
    /// File size in bytes.
    FileSize,
    /// File size negated: `-(size)`.
    FileSizeNegated,
    /// First half of a file size split in two: `floor(size / 2)`.
    FileSizeHalf,
    /// Second half of a split size: `size - floor(size / 2)`.
    FileSizeRemainder,
    /// The requested filename echoed back.
    FilenameText,
    /// The request command echoed back.
    CommandText,
    /// Length of the requested filename in bytes.
    FilenameLen,
    /// Length of the request command in bytes.
    CommandLen,
    /// Literal `Connection Closed` notice.
    ClosedNotice,
}

impl FieldSemantic {
    /// Syntactic type this field renders as.
    pub fn field_type(self) -> FieldType {
        match self {
            FieldSemantic::ExistsText
            | FieldSemantic::ExistsTextInverse
            | FieldSemantic::FilenameText
            | FieldSemantic::CommandText
            | FieldSemantic::ClosedNotice => FieldType::Str,
            FieldSemantic::ExistsNumeral
            | FieldSemantic::FileSize
            | FieldSemantic::FileSizeNegated
            | FieldSemantic::FileSizeHalf
            | FieldSemantic::FileSizeRemainder
            | FieldSemantic::FilenameLen
            | FieldSemantic::CommandLen => FieldType::Int,
        }
    }
}

/// Fields of a single response message, in wire order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketSchema {
    fields: Vec<FieldSemantic>,
}

impl PacketSchema {
    pub fn new(fields: Vec<FieldSemantic>) -> Self {
        assert!(!fields.is_empty(), "a response packet carries at least one field");
        Self { fields }
    }

    pub fn fields(&self) -> &[FieldSemantic] {
        &self.fields
    }
}

/// Shape of a dialect's full reply: one `PacketSchema` per response message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseSchema {
    packets: Vec<PacketSchema>,
}

impl ResponseSchema {
    pub fn new(packets: Vec<PacketSchema>) -> Self {
        assert!(!packets.is_empty(), "a dialect sends at least one response message");
        Self { packets }
    }

    pub fn packets(&self) -> &[PacketSchema] {
        &self.packets
    }

    pub fn packet_count(&self) -> usize {
        self.packets.len()
    }

    /// Canonical signature: per-packet field type codes joined with `,`,
    /// packets joined with `/`. Example: `s,i/s`.
    pub fn signature(&self) -> String {
        signature_of(
            self.packets
                .iter()
                .map(|p| p.fields.iter().map(|f| f.field_type())),
        )
    }
}

impl fmt::Display for ResponseSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.signature())
    }
}

/// Shared signature builder so parsed structures and schemas can never
/// drift apart in formatting.
pub(crate) fn signature_of<P, F>(packets: P) -> String
where
    P: Iterator<Item = F>,
    F: Iterator<Item = FieldType>,
{
    let mut out = String::new();
    for (pi, fields) in packets.enumerate() {
        if pi > 0 {
            out.push('/');
        }
        for (fi, field) in fields.enumerate() {
            if fi > 0 {
                out.push(',');
            }
            out.push(field.code());
        }
    }
    out
}
