//! The dialect registry: construction of the built-in FTP dialect set and
//! lookup/audit helpers.

use std::fmt::Write as _;
use std::time::Duration;

use crate::schema::{FieldSemantic, PacketSchema, ResponseSchema};
use crate::DialectId;

/// One registered dialect: a response shape plus bookkeeping used by the
/// decision model (cost) and the transport (artificial delay).
#[derive(Debug, Clone)]
pub struct Dialect {
    id: DialectId,
    schema: ResponseSchema,
    cost: f64,
    response_delay: Duration,
}

impl Dialect {
    pub fn id(&self) -> DialectId {
        self.id
    }

    pub fn schema(&self) -> &ResponseSchema {
        &self.schema
    }

    /// Selection cost fed to the decision model. By construction this is
    /// `1000` per response message, unless overridden for an experiment.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// Total artificial delay a server spreads across this dialect's
    /// response messages. Zero for all but the deliberately slow dialect.
    pub fn response_delay(&self) -> Duration {
        self.response_delay
    }

    /// Steps in a full handshake: the two fixed client requests (`get` and
    /// `PORT`) plus one step per response message.
    pub fn handshake_steps(&self) -> usize {
        2 + self.schema.packet_count()
    }
}

/// Errors from registry lookups and edits.
#[derive(Debug, PartialEq, thiserror::Error)]
pub enum RegistryError {
    #[error("unknown dialect id {0}")]
    UnknownDialect(DialectId),
    #[error("dialect cost must be positive, got {0}")]
    NonPositiveCost(f64),
}

/// An ordered set of dialects with dense 1-based ids.
#[derive(Debug, Clone)]
pub struct DialectRegistry {
    dialects: Vec<Dialect>,
}

impl DialectRegistry {
    pub fn len(&self) -> usize {
        self.dialects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dialects.is_empty()
    }

    pub fn get(&self, id: DialectId) -> Result<&Dialect, RegistryError> {
        self.dialects
            .get(id.index())
            .ok_or(RegistryError::UnknownDialect(id))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Dialect> {
        self.dialects.iter()
    }

    /// Per-dialect costs in id order, as consumed by model training.
    pub fn costs(&self) -> Vec<f64> {
        self.dialects.iter().map(|d| d.cost).collect()
    }

    /// Overrides one dialect's selection cost (experiments weigh dialects
    /// by measured execution time instead of message count).
    pub fn set_cost(&mut self, id: DialectId, cost: f64) -> Result<(), RegistryError> {
        if !(cost > 0.0) {
            return Err(RegistryError::NonPositiveCost(cost));
        }
        let index = id.index();
        let dialect = self
            .dialects
            .get_mut(index)
            .ok_or(RegistryError::UnknownDialect(id))?;
        dialect.cost = cost;
        Ok(())
    }

    /// Finds the dialect whose schema signature matches `signature`.
    /// Signatures are unique within a registry, so at most one id matches.
    pub fn find_by_signature(&self, signature: &str) -> Option<DialectId> {
        self.dialects
            .iter()
            .find(|d| d.schema.signature() == signature)
            .map(|d| d.id)
    }

    /// Line-oriented audit manifest: a header line, then one tab-separated
    /// line per dialect with id, cost, schema signature, and handshake step
    /// count. The exact bytes are frozen by a golden-file test.
    pub fn manifest(&self) -> String {
        let mut out = String::from("id\tcost\tschema\tsteps\n");
        for d in &self.dialects {
            let _ = write!(out, "{}\t", d.id);
            if d.cost.fract() == 0.0 {
                let _ = write!(out, "{}", d.cost as i64);
            } else {
                let _ = write!(out, "{}", d.cost);
            }
            let _ = writeln!(out, "\t{}\t{}", d.schema.signature(), d.handshake_steps());
        }
        out
    }
}

/// Builds the registry of the fifteen built-in FTP dialects.
///
/// Every dialect answers the same two client requests (`get <filename>`
/// and `PORT <port>`) with a different response shape. Costs default to
/// 1000 per response message. Dialect 7 pads its handshake with four
/// seconds of artificial delay; everything else answers immediately.
pub fn register_ftp_dialects() -> DialectRegistry {
    use FieldSemantic::*;

    let slow_handshake = Duration::from_secs(4);
    let table: Vec<(Vec<Vec<FieldSemantic>>, Duration)> = vec![
        // 1: File exists, file size
        (vec![vec![ExistsText, FileSize]], Duration::ZERO),
        // 2: file size twice, then a close notice
        (vec![vec![FileSize, FileSize], vec![ClosedNotice]], Duration::ZERO),
        // 3: File exists, file size, file name
        (vec![vec![ExistsText, FileSize, FilenameText]], Duration::ZERO),
        // 4: size split across two messages
        (vec![vec![FileSizeHalf], vec![FileSizeRemainder]], Duration::ZERO),
        // 5: numerals only: 1 (exists), lengths, then size
        (vec![vec![ExistsNumeral, FilenameLen, CommandLen], vec![FileSize]], Duration::ZERO),
        // 6: File exists / lengths / size
        (vec![vec![ExistsText], vec![FilenameLen, CommandLen], vec![FileSize]], Duration::ZERO),
        // 7: File exists / filename length / command length, slowed down
        (vec![vec![ExistsText], vec![FilenameLen], vec![CommandLen]], slow_handshake),
        // 8: everything in one message
        (vec![vec![ExistsText, FileSize, FilenameText, CommandText]], Duration::ZERO),
        // 9: outcome and size, then the echoed request
        (vec![vec![ExistsText, FileSize], vec![FilenameText, CommandText]], Duration::ZERO),
        // 10: File exists / size, filename, command
        (vec![vec![ExistsText], vec![FileSize, FilenameText, CommandText]], Duration::ZERO),
        // 11: one message per item, echoes paired with their lengths
        (
            vec![
                vec![ExistsText],
                vec![FileSize],
                vec![FilenameText, FilenameLen],
                vec![CommandText, CommandLen],
            ],
            Duration::ZERO,
        ),
        // 12: just the size
        (vec![vec![FileSize]], Duration::ZERO),
        // 13: prose echo first, then the filename length
        (vec![vec![ExistsText, FilenameText, CommandText], vec![FilenameLen]], Duration::ZERO),
        // 14: inverse polarity: "File does not exist" and a negated size
        (vec![vec![ExistsTextInverse], vec![FileSizeNegated]], Duration::ZERO),
        // 15: fully unrolled
        (
            vec![
                vec![ExistsText],
                vec![FileSize],
                vec![FilenameText],
                vec![CommandText],
                vec![CommandLen],
            ],
            Duration::ZERO,
        ),
    ];

    let dialects: Vec<Dialect> = table
        .into_iter()
        .enumerate()
        .map(|(index, (packets, response_delay))| {
            let schema = ResponseSchema::new(packets.into_iter().map(PacketSchema::new).collect());
            Dialect {
                id: DialectId::from_index(index),
                cost: schema.packet_count() as f64 * 1000.0,
                schema,
                response_delay,
            }
        })
        .collect();

    let registry = DialectRegistry { dialects };
    debug_assert!(signatures_unique(&registry), "dialect signatures must be pairwise distinct");
    registry
}

fn signatures_unique(registry: &DialectRegistry) -> bool {
    let mut seen: Vec<String> = registry.iter().map(|d| d.schema().signature()).collect();
    seen.sort();
    seen.windows(2).all(|w| w[0] != w[1])
}
