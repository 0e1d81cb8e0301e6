//! Request corpora for the adapter protocols' decision models.
//!
//! Each protocol trains on its own input convention: MQTT models see the
//! topic alone, HTTP models see the full request line.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vp_datasets::{gen_request_corpus, load_words, CorpusConfig, DatasetError, WordSource};

/// Seeded topic corpus: two bundled words joined by a level separator,
/// e.g. `kitchen/humidity`.
pub fn mqtt_topic_corpus(size: usize, seed: u64) -> Result<Vec<String>, DatasetError> {
    let words = load_words(&WordSource::Bundled)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..size)
        .map(|_| {
            let first = &words[rng.gen_range(0..words.len())];
            let second = &words[rng.gen_range(0..words.len())];
            format!("{first}/{second}")
        })
        .collect())
}

/// Seeded GET-request corpus: full request lines over bundled words with
/// the web page extension, e.g. `GET kitchen.html HTTP/1.1`.
pub fn http_request_corpus(size: usize, seed: u64) -> Result<Vec<String>, DatasetError> {
    let config = CorpusConfig {
        size,
        seed,
        extensions: vec![".html".into()],
        command: "GET".into(),
        ..CorpusConfig::default()
    };
    Ok(gen_request_corpus(&config)?
        .into_iter()
        .map(|request| format!("{request} HTTP/1.1"))
        .collect())
}
