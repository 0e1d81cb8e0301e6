//! The attack subcommand: drives the local attack harness with a trained
//! decision model and reports detection statistics.

use std::path::PathBuf;

use anyhow::Context;
use vp_ddm::{train, MlpModel, TrainingConfig};
use vp_harness::{
    run_flood, run_passive_observe, run_replay, run_reroute, AttackKind, AttackScenario,
    DetectionReport, FtpWorld, MalloryStrategy, MqttWorld,
};

use crate::artifacts::{load_model, write_atomic};
use crate::config::Settings;
use crate::ops::train::generate_corpus;
use crate::ops::Protocol;

/// Corpus size for the fallback model trained when no artifact exists.
const QUICK_TRAIN_SIZE: usize = 2_000;
/// Epoch budget for the fallback model; detection quality does not
/// depend on how well-shaped the dialect distribution is.
const QUICK_TRAIN_EPOCHS: usize = 30;

#[derive(Debug, Clone)]
pub struct AttackCmdSpec {
    pub kind: AttackKind,
    pub trials: usize,
    pub seed: u64,
    pub strategy: MalloryStrategy,
    /// Run the genuine-server control arm instead of the attack arm.
    pub control: bool,
    /// Interleave a genuine client action every n-th trial.
    pub interleave: Option<usize>,
    /// Decision-model artifact; falls back to the settings path, then to
    /// a small model trained on the spot.
    pub model: Option<PathBuf>,
    /// Served files (topic/message pairs for the flood) in the
    /// provisioned world.
    pub world_size: usize,
    /// Also write the full report as JSON.
    pub json_out: Option<PathBuf>,
}

/// Parses an attacker strategy name as used on the command line.
pub fn parse_strategy(s: &str) -> Result<MalloryStrategy, String> {
    match s {
        "fixed-malformed" => Ok(MalloryStrategy::FixedMalformed),
        "random-schema-guess" => Ok(MalloryStrategy::RandomSchemaGuess),
        "random-dialect-guess" => Ok(MalloryStrategy::RandomDialectGuess),
        other => Err(format!(
            "unknown strategy {other:?}; expected fixed-malformed, \
             random-schema-guess, or random-dialect-guess"
        )),
    }
}

/// Runs one attack scenario end to end and returns its report.
pub fn cmd_attack(spec: &AttackCmdSpec, settings: &Settings) -> anyhow::Result<DetectionReport> {
    let mut scenario = AttackScenario::new(spec.kind, spec.trials, spec.seed);
    scenario.mallory_strategy = spec.strategy;
    scenario.control_arm = spec.control;
    scenario.genuine_interleave = spec.interleave;

    let report = match spec.kind {
        AttackKind::FloodPublish => {
            let model = resolve_model(spec, settings, Protocol::Mqtt)?;
            let world = MqttWorld::provision(model, spec.world_size, spec.seed)?;
            run_flood(&scenario, &world)?
        }
        kind => {
            let model = resolve_model(spec, settings, Protocol::Ftp)?;
            let dir = tempfile::tempdir().context("attack workspace")?;
            let world = FtpWorld::provision(dir.path(), model, spec.world_size, spec.seed)?;
            match kind {
                AttackKind::Reroute => run_reroute(&scenario, &world)?,
                AttackKind::Replay => run_replay(&scenario, &world)?,
                AttackKind::PassiveObserve => run_passive_observe(&scenario, &world)?,
                AttackKind::FloodPublish => unreachable!("handled above"),
            }
        }
    };

    if let Some(path) = &spec.json_out {
        write_atomic(path, report.to_json().as_bytes())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report)
}

/// The decision model the scenario's honest endpoints share: an explicit
/// artifact, the configured one, or a small model trained on the spot.
fn resolve_model(
    spec: &AttackCmdSpec,
    settings: &Settings,
    protocol: Protocol,
) -> anyhow::Result<MlpModel> {
    let configured = match protocol {
        Protocol::Ftp => &settings.ftp_model,
        Protocol::Http => &settings.http_model,
        Protocol::Mqtt => &settings.mqtt_model,
    };
    let model = if let Some(path) = &spec.model {
        load_model(path)?
    } else if configured.exists() {
        load_model(configured)?
    } else {
        log::info!(
            "no {protocol} model artifact at {}; training a small one in-process",
            configured.display()
        );
        quick_train(protocol, spec.seed)?
    };
    anyhow::ensure!(
        model.output_dim() == protocol.dialect_count(),
        "model has {} classes but the {protocol} dialect table has {}",
        model.output_dim(),
        protocol.dialect_count()
    );
    Ok(model)
}

fn quick_train(protocol: Protocol, seed: u64) -> anyhow::Result<MlpModel> {
    let corpus = generate_corpus(protocol, QUICK_TRAIN_SIZE, seed)?;
    let costs = vec![1000.0; protocol.dialect_count()];
    let mut config = TrainingConfig::for_trade_off(0.0);
    config.seed = seed;
    config.epochs = QUICK_TRAIN_EPOCHS;
    let (model, _) = train(&corpus, &costs, &config).context("fallback training")?;
    Ok(model)
}
