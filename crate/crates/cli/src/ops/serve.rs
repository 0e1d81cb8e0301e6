//! Serving endpoints and one-shot client operations for the three
//! protocols.
//!
//! Dialected endpoints need trained artifacts (a decision model, and a
//! verifier tree on the verifying side) and refuse to start without
//! them; plain endpoints never consult the artifacts, so they run with
//! built-in placeholders.

use std::fmt;
use std::net::{SocketAddr, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use vp_adapters::http::{
    spawn_http_server, HttpClient, HttpClientConfig, HttpServerConfig, HttpServerHandle,
    HttpTransferResult, HTTP_DIALECT_COUNT,
};
use vp_adapters::mqtt::{
    spawn_mqtt_broker, BrokerConfig, BrokerHandle, MqttClient, MqttClientConfig, MqttEngine,
    PublishOutcome, MQTT_DIALECT_COUNT,
};
use vp_adapters::EndpointMode;
use vp_ddm::MlpModel;
use vp_dialect::register_ftp_dialects;
use vp_ftp::{
    spawn_server, ClientConfig, DialectEngine, FtpClient, ServerConfig, ServerHandle, ServerMode,
    TransferResult,
};
use vp_harness::models::constant_model;
use vp_srv::{train_tree, DecisionTree, TrainParams};

use crate::artifacts::{load_model, load_tree};
use crate::config::Settings;
use crate::ops::Protocol;

/// How a serving endpoint is started.
#[derive(Debug, Clone)]
pub struct ServeSpec {
    /// Directory the served resources live in (file-transfer and HTTP).
    pub root: PathBuf,
    /// Overrides the configured port; 0 binds an ephemeral port.
    pub port: Option<u16>,
    /// Speak the plain baseline protocol instead of dialects.
    pub plain: bool,
    /// Honor per-dialect artificial response delays (file transfer).
    pub delays: bool,
}

fn require_model(path: &Path, protocol: Protocol) -> anyhow::Result<MlpModel> {
    let model = load_model(path).with_context(|| {
        format!(
            "no decision model at {}; run `verify-pro train-ddm --protocol {}` \
             or point the settings file at an existing artifact",
            path.display(),
            protocol
        )
    })?;
    anyhow::ensure!(
        model.output_dim() == protocol.dialect_count(),
        "model at {} has {} classes but the {protocol} dialect table has {}",
        path.display(),
        model.output_dim(),
        protocol.dialect_count()
    );
    Ok(model)
}

fn require_tree(path: &Path, protocol: Protocol) -> anyhow::Result<DecisionTree> {
    load_tree(path).with_context(|| {
        format!(
            "no verifier tree at {}; run `verify-pro train-srv --protocol {}` \
             or point the settings file at an existing artifact",
            path.display(),
            protocol
        )
    })
}

/// Starts the file-transfer server; the caller owns the handle.
pub fn start_ftp_server(spec: &ServeSpec, settings: &Settings) -> anyhow::Result<ServerHandle> {
    let registry = register_ftp_dialects();
    let model = if spec.plain {
        constant_model(registry.len(), 0)
    } else {
        require_model(&settings.ftp_model, Protocol::Ftp)?
    };
    let config = ServerConfig {
        bind_addr: settings.bind_addr.clone(),
        port: spec.port.unwrap_or(settings.ftp_port),
        credentials: settings.credentials.clone(),
        mode: if spec.plain {
            ServerMode::Plain
        } else {
            ServerMode::Dialected
        },
        apply_template_delays: spec.delays,
        ..ServerConfig::new(&spec.root)
    };
    let engine = Arc::new(DialectEngine { registry, model });
    Ok(spawn_server(config, engine)?)
}

/// Starts the HTTP server; the caller owns the handle.
pub fn start_http_server(
    spec: &ServeSpec,
    settings: &Settings,
) -> anyhow::Result<HttpServerHandle> {
    let model = if spec.plain {
        constant_model(HTTP_DIALECT_COUNT, 0)
    } else {
        require_model(&settings.http_model, Protocol::Http)?
    };
    let config = HttpServerConfig {
        bind_addr: settings.bind_addr.clone(),
        port: spec.port.unwrap_or(settings.http_port),
        mode: if spec.plain {
            EndpointMode::Plain
        } else {
            EndpointMode::Dialected
        },
        ..HttpServerConfig::new(&spec.root)
    };
    Ok(spawn_http_server(config, Arc::new(model))?)
}

/// Starts the MQTT broker; the caller owns the handle.
pub fn start_mqtt_broker(spec: &ServeSpec, settings: &Settings) -> anyhow::Result<BrokerHandle> {
    let (model, tree) = if spec.plain {
        (
            constant_model(MQTT_DIALECT_COUNT, 0),
            train_tree(
                &vp_adapters::mqtt::mqtt_shape_dataset(4),
                &TrainParams::default(),
            )?,
        )
    } else {
        (
            require_model(&settings.mqtt_model, Protocol::Mqtt)?,
            require_tree(&settings.mqtt_tree, Protocol::Mqtt)?,
        )
    };
    let config = BrokerConfig {
        bind_addr: settings.bind_addr.clone(),
        port: spec.port.unwrap_or(settings.mqtt_port),
        mode: if spec.plain {
            EndpointMode::Plain
        } else {
            EndpointMode::Dialected
        },
        ..BrokerConfig::default()
    };
    Ok(spawn_mqtt_broker(config, Arc::new(MqttEngine { model, tree }))?)
}

/// One client action and how it went.
#[derive(Debug, Clone, Serialize)]
pub struct TransferRow {
    pub request: String,
    pub outcome: String,
    pub ok: bool,
    pub bytes: usize,
    pub ddm_ms: f64,
    pub srv_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferSummary {
    pub rows: Vec<TransferRow>,
    pub failures: usize,
}

impl fmt::Display for TransferSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            writeln!(
                f,
                "{:<40} {:<28} {:>8} bytes  ddm {:>7.3} ms  srv {:>7.3} ms  total {:>8.3} ms",
                row.request, row.outcome, row.bytes, row.ddm_ms, row.srv_ms, row.total_ms
            )?;
        }
        if self.failures > 0 {
            writeln!(f, "{} of {} actions failed", self.failures, self.rows.len())?;
        }
        Ok(())
    }
}

impl TransferSummary {
    fn from_rows(rows: Vec<TransferRow>) -> Self {
        let failures = rows.iter().filter(|row| !row.ok).count();
        Self { rows, failures }
    }
}

fn resolve_addr(explicit: &Option<String>, host: &str, port: u16) -> anyhow::Result<SocketAddr> {
    let text = match explicit {
        Some(addr) => addr.clone(),
        None => format!("{host}:{port}"),
    };
    text.to_socket_addrs()
        .with_context(|| format!("resolving {text}"))?
        .next()
        .with_context(|| format!("{text} resolved to no address"))
}

#[derive(Debug, Clone)]
pub struct FtpGetSpec {
    /// `host:port`; defaults to the configured endpoint.
    pub addr: Option<String>,
    /// Request lines, e.g. `get report.txt`.
    pub requests: Vec<String>,
    pub plain: bool,
}

/// Fetches files over one file-transfer session, verifying each
/// response unless `plain`.
pub fn cmd_ftp_get(spec: &FtpGetSpec, settings: &Settings) -> anyhow::Result<TransferSummary> {
    anyhow::ensure!(!spec.requests.is_empty(), "no requests given");
    let registry = register_ftp_dialects();
    let (model, tree) = if spec.plain {
        // The plain path never consults the dialect layer.
        (
            constant_model(registry.len(), 0),
            train_tree(
                &vp_datasets::gen_srv_dataset(&registry, registry.len(), 0),
                &TrainParams::default(),
            )?,
        )
    } else {
        (
            require_model(&settings.ftp_model, Protocol::Ftp)?,
            require_tree(&settings.ftp_tree, Protocol::Ftp)?,
        )
    };
    let engine = Arc::new(DialectEngine { registry, model });
    let addr = resolve_addr(&spec.addr, &settings.bind_addr, settings.ftp_port)?;
    let config = ClientConfig {
        credentials: settings.credentials.clone(),
        ..ClientConfig::default()
    };
    let mut client = FtpClient::connect(addr, config, engine, Arc::new(tree))
        .with_context(|| format!("connecting to {addr}"))?;

    let mut rows = Vec::with_capacity(spec.requests.len());
    let mut terminated = false;
    for request in &spec.requests {
        if terminated {
            rows.push(TransferRow {
                request: request.clone(),
                outcome: "skipped: session already terminated".into(),
                ok: false,
                bytes: 0,
                ddm_ms: 0.0,
                srv_ms: 0.0,
                total_ms: 0.0,
            });
            continue;
        }
        let (result, timing) = if spec.plain {
            client.get_plain(request)
        } else {
            client.get(request)
        };
        let (outcome, ok, bytes) = match &result {
            TransferResult::Bytes(data) => ("transferred".to_string(), true, data.len()),
            TransferResult::NotFound => ("no such file".to_string(), false, 0),
            TransferResult::Terminated(reason) => {
                terminated = true;
                (format!("terminated: {reason:?}"), false, 0)
            }
        };
        rows.push(TransferRow {
            request: request.clone(),
            outcome,
            ok,
            bytes,
            ddm_ms: timing.ddm_ms,
            srv_ms: timing.srv_ms,
            total_ms: timing.total_ms,
        });
    }
    if !terminated {
        let _ = client.quit();
    }
    Ok(TransferSummary::from_rows(rows))
}

#[derive(Debug, Clone)]
pub struct HttpGetSpec {
    pub addr: Option<String>,
    /// Resource paths, e.g. `/index.html`.
    pub paths: Vec<String>,
    pub plain: bool,
}

/// Fetches resources over one HTTP connection, verifying each response
/// unless `plain`.
pub fn cmd_http_get(spec: &HttpGetSpec, settings: &Settings) -> anyhow::Result<TransferSummary> {
    anyhow::ensure!(!spec.paths.is_empty(), "no paths given");
    let (model, tree) = if spec.plain {
        (
            constant_model(HTTP_DIALECT_COUNT, 0),
            train_tree(
                &vp_adapters::http::http_shape_dataset(4),
                &TrainParams::default(),
            )?,
        )
    } else {
        (
            require_model(&settings.http_model, Protocol::Http)?,
            require_tree(&settings.http_tree, Protocol::Http)?,
        )
    };
    let addr = resolve_addr(&spec.addr, &settings.bind_addr, settings.http_port)?;
    let mut client = HttpClient::connect(
        addr,
        Arc::new(model),
        Arc::new(tree),
        HttpClientConfig::default(),
    )
    .with_context(|| format!("connecting to {addr}"))?;

    let mut rows = Vec::with_capacity(spec.paths.len());
    let mut terminated = false;
    for path in &spec.paths {
        if terminated {
            rows.push(TransferRow {
                request: path.clone(),
                outcome: "skipped: session already terminated".into(),
                ok: false,
                bytes: 0,
                ddm_ms: 0.0,
                srv_ms: 0.0,
                total_ms: 0.0,
            });
            continue;
        }
        let (result, timing) = if spec.plain {
            client.get_plain(path)?
        } else {
            client.get(path)?
        };
        let (outcome, ok, bytes) = match &result {
            HttpTransferResult::Body(body) => ("transferred".to_string(), true, body.len()),
            HttpTransferResult::NotFound => ("no such resource".to_string(), false, 0),
            HttpTransferResult::Terminated(reason) => {
                terminated = true;
                (format!("terminated: {reason:?}"), false, 0)
            }
        };
        rows.push(TransferRow {
            request: path.clone(),
            outcome,
            ok,
            bytes,
            ddm_ms: timing.ddm_ms,
            srv_ms: timing.srv_ms,
            total_ms: timing.total_ms,
        });
    }
    Ok(TransferSummary::from_rows(rows))
}

#[derive(Debug, Clone)]
pub struct MqttPubSpec {
    pub addr: Option<String>,
    pub topic: String,
    pub message: String,
    pub plain: bool,
}

/// Publishes one message, dialect-encoded unless `plain`.
pub fn cmd_mqtt_pub(spec: &MqttPubSpec, settings: &Settings) -> anyhow::Result<TransferSummary> {
    let model = if spec.plain {
        constant_model(MQTT_DIALECT_COUNT, 0)
    } else {
        require_model(&settings.mqtt_model, Protocol::Mqtt)?
    };
    let addr = resolve_addr(&spec.addr, &settings.bind_addr, settings.mqtt_port)?;
    let mut client = MqttClient::connect(addr, Arc::new(model), MqttClientConfig::default())
        .with_context(|| format!("connecting to {addr}"))?;

    let start = Instant::now();
    let (outcome, timing) = if spec.plain {
        let outcome = client.publish_plain(&spec.topic, &spec.message)?;
        let timing = vp_dialect::TimingReport {
            total_ms: start.elapsed().as_secs_f64() * 1e3,
            ..Default::default()
        };
        (outcome, timing)
    } else {
        client.publish(&spec.topic, &spec.message)?
    };
    let ok = outcome == PublishOutcome::Accepted;
    let row = TransferRow {
        request: format!("{} <- {:?}", spec.topic, spec.message),
        outcome: if ok {
            "accepted".into()
        } else {
            "rejected (broker dropped the session)".into()
        },
        ok,
        bytes: spec.message.len(),
        ddm_ms: timing.ddm_ms,
        srv_ms: timing.srv_ms,
        total_ms: timing.total_ms,
    };
    Ok(TransferSummary::from_rows(vec![row]))
}
