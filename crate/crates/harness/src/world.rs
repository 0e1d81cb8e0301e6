//! The genuine endpoints a scenario attacks or observes.

use std::path::PathBuf;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vp_adapters::mqtt::{mqtt_shape_dataset, MqttEngine};
use vp_adapters::mqtt_topic_corpus;
use vp_datasets::gen_srv_dataset;
use vp_ddm::MlpModel;
use vp_dialect::register_ftp_dialects;
use vp_ftp::DialectEngine;
use vp_srv::{train_tree, DecisionTree, TrainParams};

use crate::HarnessError;

/// Alice and Bob's shared FTP state: one decision model and dialect
/// table for both ends, the verifier tree, Bob's files, and the request
/// pool trials sample from.
#[derive(Clone)]
pub struct FtpWorld {
    pub engine: Arc<DialectEngine>,
    pub tree: Arc<DecisionTree>,
    pub file_root: PathBuf,
    /// Request lines (`get <filename>`) naming files under `file_root`.
    pub requests: Vec<String>,
}

impl FtpWorld {
    /// Builds a world around `model`: registers the dialect table,
    /// trains the verifier tree on synthetic responses, and populates
    /// `root` with `file_count` files of distinct names, lengths, and
    /// seeded random contents. File names cycle through the alphabet
    /// (`a…`, `b…`, …), so a first-letter router model spreads the pool
    /// across all dialects.
    pub fn provision(
        root: impl Into<PathBuf>,
        model: MlpModel,
        file_count: usize,
        seed: u64,
    ) -> Result<Self, HarnessError> {
        let file_root = root.into();
        if file_count == 0 {
            return Err(HarnessError::SetupFailure("a world needs at least one file".into()));
        }
        let registry = register_ftp_dialects();
        let tree = train_tree(&gen_srv_dataset(&registry, 600, seed ^ TREE_SEED_SALT), &TrainParams::default())
            .map_err(|error| HarnessError::SetupFailure(error.to_string()))?;
        let engine = Arc::new(DialectEngine { registry, model });

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut requests = Vec::with_capacity(file_count);
        for index in 0..file_count {
            let letter = (b'a' + (index % 15) as u8) as char;
            // Vary the name length too: several content laws check field
            // lengths, and identical lengths would mask violations.
            let stem: String =
                (0..3 + index / 15).map(|_| (b'a' + rng.gen_range(0..26u8)) as char).collect();
            let name = format!("{letter}{stem}{index}.txt");
            let size = 48 + 61 * index;
            let contents: Vec<u8> = (0..size).map(|_| rng.gen()).collect();
            std::fs::write(file_root.join(&name), contents)?;
            requests.push(format!("get {name}"));
        }
        Ok(Self { engine, tree: Arc::new(tree), file_root, requests })
    }
}

/// The broker-side engine, the genuine publisher's model, and the
/// (topic, message) pool genuine traffic draws from.
#[derive(Clone)]
pub struct MqttWorld {
    pub engine: Arc<MqttEngine>,
    pub publisher_model: Arc<MlpModel>,
    pub pairs: Vec<(String, String)>,
}

impl MqttWorld {
    /// Builds a world around `model`: trains the structure verifier on
    /// the publish shapes and derives a deterministic topic pool.
    pub fn provision(model: MlpModel, pair_count: usize, seed: u64) -> Result<Self, HarnessError> {
        if pair_count == 0 {
            return Err(HarnessError::SetupFailure("a world needs at least one topic".into()));
        }
        let tree = train_tree(&mqtt_shape_dataset(20), &TrainParams::default())
            .map_err(|error| HarnessError::SetupFailure(error.to_string()))?;
        let topics = mqtt_topic_corpus(pair_count, seed)
            .map_err(|error| HarnessError::SetupFailure(error.to_string()))?;
        let pairs = topics
            .into_iter()
            .enumerate()
            .map(|(index, topic)| (topic, format!("reading {index}")))
            .collect();
        let publisher_model = Arc::new(model.clone());
        let engine = Arc::new(MqttEngine { model, tree });
        Ok(Self { engine, publisher_model, pairs })
    }
}

/// Decouples the tree-training stream from request sampling.
const TREE_SEED_SALT: u64 = 0x5eed_02ee;
