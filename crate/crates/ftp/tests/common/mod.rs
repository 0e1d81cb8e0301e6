//! Shared fixtures: a deterministic first-letter router model (filename
//! 'a…' → dialect 1, 'b…' → dialect 2, … 'o…' → dialect 15), a verifier
//! tree trained on synthetic structures, and a populated file root.

use std::sync::Arc;

use tempfile::TempDir;
use vp_datasets::gen_srv_dataset;
use vp_ddm::MlpModel;
use vp_dialect::{register_ftp_dialects, DialectRegistry};
use vp_ftp::{ClientConfig, DialectEngine, FtpClient, ServerConfig, ServerHandle};
use vp_srv::{train_tree, DecisionTree, TrainParams};

/// Builds a single-layer model over the 100-byte input whose argmax
/// depends only on byte 4 (the filename's first character): 'a' + k maps
/// to class k. Classes win on consecutive byte intervals by giving class
/// k slope k in x[4] with crossovers at the half-letter boundaries.
pub fn router_model(classes: usize) -> MlpModel {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"VPDM");
    bytes.extend_from_slice(&1u32.to_le_bytes());
    bytes.extend_from_slice(&2u32.to_le_bytes());
    bytes.extend_from_slice(&100u32.to_le_bytes());
    bytes.extend_from_slice(&(classes as u32).to_le_bytes());
    let mut bias = 0.0f32;
    let mut biases = Vec::with_capacity(classes);
    for class in 0..classes {
        if class > 0 {
            // Crossover with the previous class at byte value 96.5 + class.
            bias -= 96.5 + class as f32;
        }
        biases.push(bias);
        for input in 0..100u32 {
            let weight = if input == 4 { 255.0 * class as f32 } else { 0.0 };
            bytes.extend_from_slice(&weight.to_le_bytes());
        }
    }
    for b in biases {
        bytes.extend_from_slice(&b.to_le_bytes());
    }
    MlpModel::from_bytes(&bytes).expect("well-formed model bytes")
}

/// A model that maps every request to the same dialect.
pub fn constant_model(classes: usize, winner_index: usize) -> MlpModel {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"VPDM");
    bytes.extend_from_slice(&1u32.to_le_bytes());
    bytes.extend_from_slice(&2u32.to_le_bytes());
    bytes.extend_from_slice(&100u32.to_le_bytes());
    bytes.extend_from_slice(&(classes as u32).to_le_bytes());
    for _ in 0..classes * 100 {
        bytes.extend_from_slice(&0.0f32.to_le_bytes());
    }
    for class in 0..classes {
        let bias: f32 = if class == winner_index { 1.0 } else { 0.0 };
        bytes.extend_from_slice(&bias.to_le_bytes());
    }
    MlpModel::from_bytes(&bytes).expect("well-formed model bytes")
}

pub fn verifier_tree(registry: &DialectRegistry) -> DecisionTree {
    let dataset = gen_srv_dataset(registry, 600, 7);
    train_tree(&dataset, &TrainParams::default()).expect("non-empty dataset")
}

pub struct Fixture {
    pub engine: Arc<DialectEngine>,
    pub tree: Arc<DecisionTree>,
    pub file_root: TempDir,
}

impl Fixture {
    pub fn new() -> Self {
        Self::with_model(router_model(15))
    }

    pub fn with_model(model: MlpModel) -> Self {
        let registry = register_ftp_dialects();
        let tree = Arc::new(verifier_tree(&registry));
        let engine = Arc::new(DialectEngine { registry, model });
        let file_root = TempDir::new().expect("tempdir");
        // One file per routing letter, plus the canonical 20-byte file.
        for letter in b'a'..=b'o' {
            let name = format!("{}file.txt", letter as char);
            let content = format!("contents of {name} for transfer tests");
            std::fs::write(file_root.path().join(name), content).unwrap();
        }
        std::fs::write(file_root.path().join("hello.txt"), b"hello from verifypro").unwrap();
        Self {
            engine,
            tree,
            file_root,
        }
    }

    pub fn server_config(&self) -> ServerConfig {
        ServerConfig::new(self.file_root.path())
    }

    pub fn spawn(&self, config: ServerConfig) -> ServerHandle {
        vp_ftp::spawn_server(config, Arc::clone(&self.engine)).expect("bind loopback")
    }

    pub fn client(&self, server: &ServerHandle, config: ClientConfig) -> FtpClient {
        FtpClient::connect(
            server.addr(),
            config,
            Arc::clone(&self.engine),
            Arc::clone(&self.tree),
        )
        .expect("connect to loopback server")
    }
}
