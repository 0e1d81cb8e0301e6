//! Overhead benchmark: repeated small transfers through each dialect
//! against the plain-protocol baseline, on loopback endpoints spawned
//! in-process.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use vp_adapters::http::{
    spawn_http_server, HttpClient, HttpClientConfig, HttpServerConfig, HttpTransferResult,
    HTTP_DIALECT_COUNT,
};
use vp_adapters::mqtt::{
    spawn_mqtt_broker, BrokerConfig, MqttClient, MqttClientConfig, MqttEngine, PublishOutcome,
    MQTT_DIALECT_COUNT,
};
use vp_adapters::EndpointMode;
use vp_datasets::gen_srv_dataset;
use vp_ddm::MlpModel;
use vp_dialect::{register_ftp_dialects, TimingReport};
use vp_ftp::{
    spawn_server, ClientConfig, DialectEngine, FtpClient, ServerConfig, ServerMode, TransferResult,
};
use vp_harness::models::constant_model;
use vp_srv::{train_tree, DecisionTree, TrainParams};

use crate::ops::Protocol;

/// Seeds the structure dataset the benchmark's verifier tree trains on.
const TREE_SEED: u64 = 0xbe_5eed;

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub protocol: Protocol,
    /// 1-based dialect id; `None` benchmarks every dialect.
    pub dialect: Option<u16>,
    pub repetitions: usize,
    /// Transferred payload size in bytes.
    pub payload: usize,
}

/// Mean per-session times for one dialect (or the plain baseline).
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub label: String,
    pub ddm_ms: f64,
    pub srv_ms: f64,
    pub handshake_ms: f64,
    pub total_ms: f64,
    /// Relative end-to-end overhead against the plain baseline;
    /// `None` on the baseline row itself.
    pub overhead_pct: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingTable {
    pub protocol: String,
    pub repetitions: usize,
    pub payload_bytes: usize,
    /// Baseline first, then one row per benchmarked dialect.
    pub rows: Vec<BenchRow>,
}

impl TimingTable {
    pub fn row(&self, label: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|row| row.label == label)
    }
}

impl fmt::Display for TimingTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} benchmark: {} repetitions, {}-byte payload",
            self.protocol, self.repetitions, self.payload_bytes
        )?;
        writeln!(
            f,
            "{:<12} {:>10} {:>10} {:>13} {:>10} {:>10}",
            "endpoint", "ddm ms", "srv ms", "handshake ms", "total ms", "overhead"
        )?;
        for row in &self.rows {
            let overhead = match row.overhead_pct {
                Some(pct) => format!("{pct:>9.2}%"),
                None => format!("{:>10}", "-"),
            };
            writeln!(
                f,
                "{:<12} {:>10.4} {:>10.4} {:>13.4} {:>10.4} {overhead}",
                row.label, row.ddm_ms, row.srv_ms, row.handshake_ms, row.total_ms
            )?;
        }
        Ok(())
    }
}

/// Runs the benchmark for one protocol. Sessions use a fresh connection
/// per repetition; per-dialect artificial response delays stay on, since
/// they are part of the dialect being measured.
pub fn cmd_bench(spec: &BenchSpec) -> anyhow::Result<TimingTable> {
    anyhow::ensure!(spec.repetitions >= 1, "need at least one repetition");
    anyhow::ensure!(spec.payload >= 1, "need at least one payload byte");
    let classes = spec.protocol.dialect_count();
    let targets: Vec<usize> = match spec.dialect {
        Some(id) => {
            anyhow::ensure!(
                (1..=classes as u16).contains(&id),
                "dialect id must lie in 1..={classes}"
            );
            vec![usize::from(id) - 1]
        }
        None => (0..classes).collect(),
    };
    match spec.protocol {
        Protocol::Ftp => bench_ftp(spec, &targets),
        Protocol::Http => bench_http(spec, &targets),
        Protocol::Mqtt => bench_mqtt(spec, &targets),
    }
}

/// Deterministic, compressible-but-not-degenerate payload bytes.
fn payload_bytes(len: usize) -> Vec<u8> {
    (0..len).map(|i| b'a' + (i % 26) as u8).collect()
}

fn mean(samples: &[TimingReport], field: fn(&TimingReport) -> f64) -> f64 {
    samples.iter().map(field).sum::<f64>() / samples.len() as f64
}

fn row_from(label: String, samples: &[TimingReport], baseline_total: Option<f64>) -> BenchRow {
    let total_ms = mean(samples, |t| t.total_ms);
    BenchRow {
        label,
        ddm_ms: mean(samples, |t| t.ddm_ms),
        srv_ms: mean(samples, |t| t.srv_ms),
        handshake_ms: mean(samples, |t| t.handshake_ms),
        total_ms,
        overhead_pct: baseline_total.map(|base| (total_ms - base) / base * 100.0),
    }
}

fn verifier_tree() -> anyhow::Result<DecisionTree> {
    let registry = register_ftp_dialects();
    let rows = gen_srv_dataset(&registry, 600, TREE_SEED);
    Ok(train_tree(&rows, &TrainParams::default())?)
}

fn bench_ftp(spec: &BenchSpec, targets: &[usize]) -> anyhow::Result<TimingTable> {
    let registry = register_ftp_dialects();
    let tree = Arc::new(verifier_tree()?);
    let dir = tempfile::tempdir().context("bench workspace")?;
    std::fs::write(dir.path().join("bench.txt"), payload_bytes(spec.payload))?;
    let request = "get bench.txt";

    let placeholder = Arc::new(DialectEngine {
        registry: registry.clone(),
        model: constant_model(registry.len(), 0),
    });

    // Baseline: plain server, plain client operation.
    let plain_config = ServerConfig {
        mode: ServerMode::Plain,
        ..ServerConfig::new(dir.path())
    };
    let server = spawn_server(plain_config, Arc::clone(&placeholder))?;
    let mut samples = Vec::with_capacity(spec.repetitions);
    for _ in 0..spec.repetitions {
        let mut client = FtpClient::connect(
            server.addr(),
            ClientConfig::default(),
            Arc::clone(&placeholder),
            Arc::clone(&tree),
        )?;
        let (result, timing) = client.get_plain(request);
        expect_ftp_bytes(&result, spec.payload, "plain")?;
        samples.push(timing);
        let _ = client.quit();
    }
    drop(server);
    let baseline = row_from("plain".into(), &samples, None);
    let baseline_total = baseline.total_ms;
    let mut rows = vec![baseline];

    for &index in targets {
        let engine = Arc::new(DialectEngine {
            registry: registry.clone(),
            model: constant_model(registry.len(), index),
        });
        let server = spawn_server(ServerConfig::new(dir.path()), Arc::clone(&engine))?;
        let mut samples = Vec::with_capacity(spec.repetitions);
        for _ in 0..spec.repetitions {
            let mut client = FtpClient::connect(
                server.addr(),
                ClientConfig::default(),
                Arc::clone(&engine),
                Arc::clone(&tree),
            )?;
            let (result, timing) = client.get(request);
            expect_ftp_bytes(&result, spec.payload, &format!("dialect {}", index + 1))?;
            samples.push(timing);
            let _ = client.quit();
        }
        rows.push(row_from(
            format!("dialect {}", index + 1),
            &samples,
            Some(baseline_total),
        ));
    }

    Ok(TimingTable {
        protocol: spec.protocol.to_string(),
        repetitions: spec.repetitions,
        payload_bytes: spec.payload,
        rows,
    })
}

fn expect_ftp_bytes(result: &TransferResult, want: usize, label: &str) -> anyhow::Result<()> {
    match result {
        TransferResult::Bytes(bytes) if bytes.len() == want => Ok(()),
        other => anyhow::bail!("{label} benchmark transfer failed: {other:?}"),
    }
}

fn bench_http(spec: &BenchSpec, targets: &[usize]) -> anyhow::Result<TimingTable> {
    let tree = Arc::new(train_tree(
        &vp_adapters::http::http_shape_dataset(40),
        &TrainParams::default(),
    )?);
    let dir = tempfile::tempdir().context("bench workspace")?;
    std::fs::write(dir.path().join("bench.html"), payload_bytes(spec.payload))?;
    let path = "/bench.html";

    let run = |mode: EndpointMode,
               model: Arc<MlpModel>,
               label: String,
               baseline_total: Option<f64>|
     -> anyhow::Result<BenchRow> {
        let config = HttpServerConfig {
            mode,
            ..HttpServerConfig::new(dir.path())
        };
        let server = spawn_http_server(config, Arc::clone(&model))?;
        let mut samples = Vec::with_capacity(spec.repetitions);
        for _ in 0..spec.repetitions {
            let mut client = HttpClient::connect(
                server.addr(),
                Arc::clone(&model),
                Arc::clone(&tree),
                HttpClientConfig::default(),
            )?;
            let (result, timing) = match mode {
                EndpointMode::Dialected => client.get(path)?,
                EndpointMode::Plain => client.get_plain(path)?,
            };
            match result {
                HttpTransferResult::Body(body) if body.len() == spec.payload => {}
                other => anyhow::bail!("{label} benchmark transfer failed: {other:?}"),
            }
            samples.push(timing);
        }
        Ok(row_from(label, &samples, baseline_total))
    };

    let placeholder = Arc::new(constant_model(HTTP_DIALECT_COUNT, 0));
    let baseline = run(EndpointMode::Plain, placeholder, "plain".into(), None)?;
    let baseline_total = baseline.total_ms;
    let mut rows = vec![baseline];
    for &index in targets {
        let model = Arc::new(constant_model(HTTP_DIALECT_COUNT, index));
        rows.push(run(
            EndpointMode::Dialected,
            model,
            format!("dialect {}", index + 1),
            Some(baseline_total),
        )?);
    }

    Ok(TimingTable {
        protocol: spec.protocol.to_string(),
        repetitions: spec.repetitions,
        payload_bytes: spec.payload,
        rows,
    })
}

fn bench_mqtt(spec: &BenchSpec, targets: &[usize]) -> anyhow::Result<TimingTable> {
    let tree = train_tree(
        &vp_adapters::mqtt::mqtt_shape_dataset(20),
        &TrainParams::default(),
    )?;
    let topic = "bench/telemetry";
    let message = String::from_utf8(payload_bytes(spec.payload)).expect("ascii payload");

    // Baseline: plain broker, stock publish. The client API reports no
    // timing breakdown on the plain path, so the wall clock around the
    // call is the total.
    let placeholder = Arc::new(MqttEngine {
        model: constant_model(MQTT_DIALECT_COUNT, 0),
        tree: tree.clone(),
    });
    let broker = spawn_mqtt_broker(
        BrokerConfig {
            mode: EndpointMode::Plain,
            ..BrokerConfig::default()
        },
        Arc::clone(&placeholder),
    )?;
    let mut samples = Vec::with_capacity(spec.repetitions);
    for _ in 0..spec.repetitions {
        let mut client = MqttClient::connect(
            broker.addr(),
            Arc::new(constant_model(MQTT_DIALECT_COUNT, 0)),
            MqttClientConfig::default(),
        )?;
        let start = Instant::now();
        let outcome = client.publish_plain(topic, &message)?;
        let total_ms = start.elapsed().as_secs_f64() * 1e3;
        anyhow::ensure!(
            outcome == PublishOutcome::Accepted,
            "plain benchmark publish rejected"
        );
        samples.push(TimingReport {
            total_ms,
            handshake_ms: total_ms,
            ..TimingReport::default()
        });
    }
    broker.shutdown();
    let baseline = row_from("plain".into(), &samples, None);
    let baseline_total = baseline.total_ms;
    let mut rows = vec![baseline];

    for &index in targets {
        let model = Arc::new(constant_model(MQTT_DIALECT_COUNT, index));
        let engine = Arc::new(MqttEngine {
            model: constant_model(MQTT_DIALECT_COUNT, index),
            tree: tree.clone(),
        });
        let broker = spawn_mqtt_broker(BrokerConfig::default(), engine)?;
        let mut samples = Vec::with_capacity(spec.repetitions);
        for _ in 0..spec.repetitions {
            let mut client = MqttClient::connect(
                broker.addr(),
                Arc::clone(&model),
                MqttClientConfig::default(),
            )?;
            let (outcome, timing) = client.publish(topic, &message)?;
            anyhow::ensure!(
                outcome == PublishOutcome::Accepted,
                "dialect {} benchmark publish rejected",
                index + 1
            );
            samples.push(timing);
        }
        broker.shutdown();
        rows.push(row_from(
            format!("dialect {}", index + 1),
            &samples,
            Some(baseline_total),
        ));
    }

    Ok(TimingTable {
        protocol: spec.protocol.to_string(),
        repetitions: spec.repetitions,
        payload_bytes: spec.payload,
        rows,
    })
}
