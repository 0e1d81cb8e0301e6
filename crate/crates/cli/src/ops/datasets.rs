//! Synthetic dataset generation: request corpora for decision-model
//! training and labeled structure datasets for verifier training.

use std::fmt;
use std::path::PathBuf;

use anyhow::Context;
use serde::Serialize;
use vp_adapters::{http_request_corpus, mqtt_topic_corpus};
use vp_datasets::{gen_request_corpus, gen_srv_dataset, srv_dataset_to_csv, CorpusConfig};
use vp_dialect::register_ftp_dialects;

use crate::artifacts::{save_lines, write_atomic};

/// What to generate and where to put it.
#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub out_dir: PathBuf,
    /// File-transfer request corpus size (`requests.txt`).
    pub request_count: usize,
    /// Labeled structure dataset size (`structures.csv`).
    pub structure_count: usize,
    /// HTTP request-line corpus size; 0 skips the file.
    pub http_count: usize,
    /// MQTT topic corpus size; 0 skips the file.
    pub mqtt_count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WrittenFile {
    pub path: PathBuf,
    pub entries: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetReport {
    pub files: Vec<WrittenFile>,
}

impl fmt::Display for DatasetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for file in &self.files {
            writeln!(f, "wrote {} ({} entries)", file.path.display(), file.entries)?;
        }
        Ok(())
    }
}

/// Generates the requested corpora and datasets, all seeded, all written
/// atomically.
pub fn cmd_gen_datasets(spec: &DatasetSpec) -> anyhow::Result<DatasetReport> {
    let mut files = Vec::new();

    let requests = gen_request_corpus(&CorpusConfig {
        size: spec.request_count,
        seed: spec.seed,
        ..CorpusConfig::default()
    })
    .context("request corpus")?;
    let path = spec.out_dir.join("requests.txt");
    save_lines(&path, &requests)?;
    files.push(WrittenFile {
        path,
        entries: requests.len(),
    });

    let registry = register_ftp_dialects();
    anyhow::ensure!(
        spec.structure_count >= registry.len(),
        "structure dataset needs at least {} samples so every dialect appears",
        registry.len()
    );
    let samples = gen_srv_dataset(&registry, spec.structure_count, spec.seed);
    let path = spec.out_dir.join("structures.csv");
    write_atomic(&path, srv_dataset_to_csv(&samples).as_bytes())
        .with_context(|| format!("writing {}", path.display()))?;
    files.push(WrittenFile {
        path,
        entries: samples.len(),
    });

    if spec.http_count > 0 {
        let lines = http_request_corpus(spec.http_count, spec.seed).context("http corpus")?;
        let path = spec.out_dir.join("http-requests.txt");
        save_lines(&path, &lines)?;
        files.push(WrittenFile {
            path,
            entries: lines.len(),
        });
    }

    if spec.mqtt_count > 0 {
        let lines = mqtt_topic_corpus(spec.mqtt_count, spec.seed).context("mqtt corpus")?;
        let path = spec.out_dir.join("mqtt-topics.txt");
        save_lines(&path, &lines)?;
        files.push(WrittenFile {
            path,
            entries: lines.len(),
        });
    }

    Ok(DatasetReport { files })
}
