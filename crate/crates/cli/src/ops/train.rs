//! Training subcommands: the request-to-dialect decision model and the
//! response-structure verifier tree.

use std::fmt;
use std::path::PathBuf;

use anyhow::Context;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use vp_adapters::http::HttpDialect;
use vp_adapters::mqtt::MqttDialect;
use vp_adapters::{http_request_corpus, mqtt_topic_corpus};
use vp_datasets::{
    gen_request_corpus, gen_srv_dataset, srv_dataset_from_csv, CorpusConfig, SrvSample,
};
use vp_ddm::{train, TrainingConfig};
use vp_dialect::register_ftp_dialects;
use vp_srv::{accuracy, train_tree, TrainParams};

use crate::artifacts::{load_lines, save_model, save_tree};
use crate::config::Settings;
use crate::ops::Protocol;

/// Cost of one message on the wire, the unit dialect costs are quoted in.
const COST_PER_MESSAGE: f64 = 1000.0;

/// The per-dialect cost table for a protocol — message count times the
/// per-message quantum — with any configured overrides applied.
pub fn dialect_costs(protocol: Protocol, settings: &Settings) -> Vec<f64> {
    let mut costs = match protocol {
        Protocol::Ftp => register_ftp_dialects().iter().map(|d| d.cost()).collect(),
        Protocol::Http => HttpDialect::ALL
            .iter()
            .map(|d| d.message_count() as f64 * COST_PER_MESSAGE)
            .collect(),
        Protocol::Mqtt => MqttDialect::ALL
            .iter()
            .map(|d| d.packet_count() as f64 * COST_PER_MESSAGE)
            .collect::<Vec<f64>>(),
    };
    settings.apply_overrides(&mut costs);
    costs
}

#[derive(Debug, Clone)]
pub struct TrainDdmSpec {
    pub protocol: Protocol,
    /// Pre-generated corpus file; generated in-process when absent.
    pub corpus: Option<PathBuf>,
    /// Corpus size when generating.
    pub size: usize,
    pub trade_off: f64,
    /// Overrides the per-objective epoch schedule.
    pub epochs: Option<usize>,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainDdmReport {
    pub out: PathBuf,
    pub protocol: String,
    pub classes: usize,
    pub requests: usize,
    pub epochs: usize,
    pub first_objective: f64,
    pub final_objective: f64,
    /// Predicted-dialect counts over the training corpus, by dialect index.
    pub histogram: Vec<usize>,
}

impl fmt::Display for TrainDdmReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "trained {} decision model on {} requests ({} epochs, objective {:.4} -> {:.4})",
            self.protocol, self.requests, self.epochs, self.first_objective, self.final_objective
        )?;
        writeln!(f, "saved to {}", self.out.display())?;
        let total: usize = self.histogram.iter().sum::<usize>().max(1);
        for (index, count) in self.histogram.iter().enumerate() {
            writeln!(
                f,
                "  dialect {:>2}: {:>8} ({:>6.2}%)",
                index + 1,
                count,
                *count as f64 / total as f64 * 100.0
            )?;
        }
        Ok(())
    }
}

/// Trains a decision model and writes it atomically to `spec.out`.
pub fn cmd_train_ddm(spec: &TrainDdmSpec, settings: &Settings) -> anyhow::Result<TrainDdmReport> {
    let requests = match &spec.corpus {
        Some(path) => load_lines(path).context("loading corpus")?,
        None => generate_corpus(spec.protocol, spec.size, spec.seed)?,
    };
    let costs = dialect_costs(spec.protocol, settings);

    let mut config = TrainingConfig::for_trade_off(spec.trade_off);
    config.seed = spec.seed;
    if let Some(epochs) = spec.epochs {
        config.epochs = epochs;
    }

    let (model, report) = train(&requests, &costs, &config).context("training")?;
    save_model(&spec.out, &model)?;

    let mut histogram = vec![0usize; costs.len()];
    for request in &requests {
        histogram[model.predict_dialect(request).index()] += 1;
    }

    Ok(TrainDdmReport {
        out: spec.out.clone(),
        protocol: spec.protocol.to_string(),
        classes: costs.len(),
        requests: requests.len(),
        epochs: config.epochs,
        first_objective: report.epoch_objectives.first().copied().unwrap_or(0.0),
        final_objective: report.epoch_objectives.last().copied().unwrap_or(0.0),
        histogram,
    })
}

/// The corpus a protocol's decision model trains on: file-transfer
/// request lines, HTTP request lines, or MQTT topics.
pub(crate) fn generate_corpus(
    protocol: Protocol,
    size: usize,
    seed: u64,
) -> anyhow::Result<Vec<String>> {
    let corpus = match protocol {
        Protocol::Ftp => gen_request_corpus(&CorpusConfig {
            size,
            seed,
            ..CorpusConfig::default()
        })?,
        Protocol::Http => http_request_corpus(size, seed)?,
        Protocol::Mqtt => mqtt_topic_corpus(size, seed)?,
    };
    Ok(corpus)
}

#[derive(Debug, Clone)]
pub struct TrainSrvSpec {
    pub protocol: Protocol,
    /// Pre-generated labeled CSV (file-transfer protocol only);
    /// generated in-process when absent.
    pub dataset: Option<PathBuf>,
    /// Total dataset size when generating.
    pub size: usize,
    /// Fraction of rows held out for the accuracy report.
    pub holdout: f64,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainSrvReport {
    pub out: PathBuf,
    pub protocol: String,
    pub train_rows: usize,
    pub holdout_rows: usize,
    pub train_accuracy: f64,
    pub holdout_accuracy: f64,
    pub node_count: usize,
}

impl fmt::Display for TrainSrvReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "trained {} verifier tree: {} nodes, train accuracy {:.4}, holdout accuracy {:.4} ({} / {} rows)",
            self.protocol,
            self.node_count,
            self.train_accuracy,
            self.holdout_accuracy,
            self.train_rows,
            self.holdout_rows
        )?;
        writeln!(f, "saved to {}", self.out.display())
    }
}

/// Trains a structure-verifier tree and writes it atomically to
/// `spec.out`.
pub fn cmd_train_srv(spec: &TrainSrvSpec, _settings: &Settings) -> anyhow::Result<TrainSrvReport> {
    anyhow::ensure!(
        (0.0..1.0).contains(&spec.holdout),
        "holdout fraction must lie in [0, 1)"
    );
    let mut rows = load_structure_rows(spec)?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rows.shuffle(&mut rng);
    let holdout_rows = (rows.len() as f64 * spec.holdout) as usize;
    let split = rows.len() - holdout_rows;
    anyhow::ensure!(split >= 1, "no rows left to train on");
    let (train_split, holdout_split) = rows.split_at(split);

    let tree = train_tree(train_split, &TrainParams::default()).context("training tree")?;
    save_tree(&spec.out, &tree)?;

    let holdout_accuracy = if holdout_split.is_empty() {
        1.0
    } else {
        accuracy(&tree, holdout_split)
    };
    Ok(TrainSrvReport {
        out: spec.out.clone(),
        protocol: spec.protocol.to_string(),
        train_rows: train_split.len(),
        holdout_rows: holdout_split.len(),
        train_accuracy: accuracy(&tree, train_split),
        holdout_accuracy,
        node_count: tree.nodes().len(),
    })
}

fn load_structure_rows(spec: &TrainSrvSpec) -> anyhow::Result<Vec<SrvSample>> {
    if let Some(path) = &spec.dataset {
        anyhow::ensure!(
            spec.protocol == Protocol::Ftp,
            "labeled CSV datasets describe the file-transfer dialects; \
             the {} verifier trains on its generated shape dataset",
            spec.protocol
        );
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        return Ok(srv_dataset_from_csv(&text)?);
    }
    let rows = match spec.protocol {
        Protocol::Ftp => {
            let registry = register_ftp_dialects();
            anyhow::ensure!(
                spec.size >= registry.len(),
                "dataset needs at least {} rows so every dialect appears",
                registry.len()
            );
            gen_srv_dataset(&registry, spec.size, spec.seed)
        }
        Protocol::Http => {
            let per_class = per_class(spec.size, vp_adapters::http::HTTP_DIALECT_COUNT)?;
            vp_adapters::http::http_shape_dataset(per_class)
        }
        Protocol::Mqtt => {
            let per_class = per_class(spec.size, vp_adapters::mqtt::MQTT_DIALECT_COUNT)?;
            vp_adapters::mqtt::mqtt_shape_dataset(per_class)
        }
    };
    Ok(rows)
}

fn per_class(total: usize, classes: usize) -> anyhow::Result<usize> {
    anyhow::ensure!(
        total >= classes,
        "dataset needs at least {classes} rows so every dialect appears"
    );
    Ok(total / classes)
}
