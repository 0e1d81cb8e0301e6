//! Seeded synthetic data generation.
//!
//! Two generators: an unlabeled request corpus ("<command> <word><ext>")
//! for training the dialect decision model, and a labeled
//! response-structure dataset (31 features + dialect id) for training the
//! response verifier. Both are deterministic under a seed.

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::distributions::{Alphanumeric, DistString};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;
use vp_dialect::{
    parse_response, Dialect, DialectId, DialectRegistry, FieldType, ResponseStructure, WireMessage,
};
use vp_srv::{extract_features, StructureFeatures, FEATURE_COUNT};

/// A common-English word list compiled into the binary, so corpus
/// generation needs no network or system dictionaries.
const BUNDLED_WORDS: &str = include_str!("../data/words.txt");

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("word source unavailable: {0}")]
    MissingWordSource(String),
    #[error("corpus size must be at least 1")]
    EmptyCorpus,
    #[error("dataset line {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },
}

/// Where request words come from.
#[derive(Debug, Clone, Default)]
pub enum WordSource {
    #[default]
    Bundled,
    File(PathBuf),
}

/// Configuration for the request corpus generator.
#[derive(Debug, Clone)]
pub struct CorpusConfig {
    pub size: usize,
    pub seed: u64,
    pub word_source: WordSource,
    pub extensions: Vec<String>,
    pub command: String,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            size: 150_000,
            seed: 0,
            word_source: WordSource::Bundled,
            extensions: [".txt", ".html", ".pdf", ".csv", ".log"]
                .into_iter()
                .map(String::from)
                .collect(),
            command: "get".into(),
        }
    }
}

/// Generates `config.size` requests of the form `<command> <word><ext>`,
/// drawing words and extensions uniformly. Duplicates are allowed.
pub fn gen_request_corpus(config: &CorpusConfig) -> Result<Vec<String>, DatasetError> {
    if config.size == 0 {
        return Err(DatasetError::EmptyCorpus);
    }
    let words = load_words(&config.word_source)?;
    if config.extensions.is_empty() {
        return Err(DatasetError::MissingWordSource(
            "extension list is empty".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    Ok((0..config.size)
        .map(|_| {
            let word = &words[rng.gen_range(0..words.len())];
            let ext = &config.extensions[rng.gen_range(0..config.extensions.len())];
            format!("{} {word}{ext}", config.command)
        })
        .collect())
}

/// Loads the word pool behind the request generators: one word per line,
/// blank lines skipped.
pub fn load_words(source: &WordSource) -> Result<Vec<String>, DatasetError> {
    let raw = match source {
        WordSource::Bundled => BUNDLED_WORDS.to_string(),
        WordSource::File(path) => std::fs::read_to_string(path)
            .map_err(|e| DatasetError::MissingWordSource(format!("{}: {e}", path.display())))?,
    };
    let words: Vec<String> = raw
        .lines()
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .map(String::from)
        .collect();
    if words.is_empty() {
        return Err(DatasetError::MissingWordSource(
            "word list has no entries".into(),
        ));
    }
    Ok(words)
}

/// One labeled sample for the response verifier.
pub type SrvSample = (StructureFeatures, DialectId);

/// Generates `size` labeled structure samples, assigning dialects
/// round-robin for exact class balance. Each sample synthesizes a
/// response matching the dialect's schema — random strings (length 1–20)
/// for string fields, random integers in `0..=10^6` for integer fields —
/// then parses it and extracts features.
///
/// Requires `size >= registry.len()` so every class appears.
pub fn gen_srv_dataset(registry: &DialectRegistry, size: usize, seed: u64) -> Vec<SrvSample> {
    assert!(
        size >= registry.len(),
        "dataset size {size} cannot cover {} dialects",
        registry.len()
    );
    let dialects: Vec<&Dialect> = registry.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size)
        .map(|i| {
            let dialect = dialects[i % dialects.len()];
            let structure = synthesize_response(dialect, &mut rng);
            let features = extract_features(&structure)
                .expect("registered schemas fit the feature envelope");
            (features, dialect.id())
        })
        .collect()
}

/// Builds a parsed response whose field types follow `dialect`'s schema
/// but whose contents are random.
pub fn synthesize_response(dialect: &Dialect, rng: &mut impl Rng) -> ResponseStructure {
    let messages: Vec<WireMessage> = dialect
        .schema()
        .packets()
        .iter()
        .map(|packet| {
            let fields: Vec<String> = packet
                .fields()
                .iter()
                .map(|semantic| match semantic.field_type() {
                    FieldType::Int => rng.gen_range(0..=1_000_000u32).to_string(),
                    FieldType::Str => random_string_token(rng),
                })
                .collect();
            WireMessage::new(fields.join(",")).expect("alphanumeric content")
        })
        .collect();
    parse_response(&messages).expect("schemas have at least one packet")
}

/// Random alphanumeric string of length 1–20 that cannot be mistaken for
/// an integer (first character is alphabetic).
fn random_string_token(rng: &mut impl Rng) -> String {
    let first = char::from(rng.gen_range(b'a'..=b'z'));
    let rest_len = rng.gen_range(0..20usize);
    let mut token = String::with_capacity(rest_len + 1);
    token.push(first);
    Alphanumeric.append_string(rng, &mut token, rest_len);
    token
}

/// Renders an SRV dataset as CSV: a header, then 31 feature columns and a
/// `label` column per row.
pub fn srv_dataset_to_csv(samples: &[SrvSample]) -> String {
    let mut out = String::new();
    for i in 0..FEATURE_COUNT {
        let _ = write!(out, "f{i},");
    }
    out.push_str("label\n");
    for (features, label) in samples {
        for value in &features.0 {
            let _ = write!(out, "{value},");
        }
        let _ = writeln!(out, "{label}");
    }
    out
}

/// Parses the CSV produced by [`srv_dataset_to_csv`].
pub fn srv_dataset_from_csv(text: &str) -> Result<Vec<SrvSample>, DatasetError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(DatasetError::MalformedCsv {
        line: 1,
        reason: "missing header".into(),
    })?;
    if header.split(',').count() != FEATURE_COUNT + 1 {
        return Err(DatasetError::MalformedCsv {
            line: 1,
            reason: format!("expected {} columns", FEATURE_COUNT + 1),
        });
    }
    let mut samples = Vec::new();
    for (index, row) in lines {
        let line = index + 1;
        if row.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != FEATURE_COUNT + 1 {
            return Err(DatasetError::MalformedCsv {
                line,
                reason: format!("expected {} columns, found {}", FEATURE_COUNT + 1, cells.len()),
            });
        }
        let mut features = [0.0f32; FEATURE_COUNT];
        for (slot, cell) in features.iter_mut().zip(&cells) {
            *slot = cell.parse().map_err(|e| DatasetError::MalformedCsv {
                line,
                reason: format!("bad feature value {cell:?}: {e}"),
            })?;
        }
        let label: DialectId = cells[FEATURE_COUNT]
            .parse()
            .map_err(|e| DatasetError::MalformedCsv {
                line,
                reason: format!("bad label {:?}: {e}", cells[FEATURE_COUNT]),
            })?;
        samples.push((StructureFeatures(features), label));
    }
    Ok(samples)
}
