//! `verify-pro`: one command-line entry point for the dialect-
//! authenticating protocol toolkit — dataset generation, model and
//! verifier training, serving endpoints, client operations, attack
//! simulations, trade-off sweeps, and overhead benchmarks.

use std::io::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use vp_cli::ops::{
    cmd_attack, cmd_bench, cmd_ftp_get, cmd_gen_datasets, cmd_http_get, cmd_mqtt_pub,
    cmd_sweep_tradeoff, cmd_train_ddm, cmd_train_srv, parse_strategy, start_ftp_server,
    start_http_server, start_mqtt_broker, AttackCmdSpec, BenchSpec, DatasetSpec, FtpGetSpec,
    HttpGetSpec, MqttPubSpec, Protocol, ServeSpec, SweepSpec, TrainDdmSpec, TrainSrvSpec,
    TransferSummary,
};
use vp_cli::{write_atomic, Settings};
use vp_harness::{AttackKind, MalloryStrategy};

#[derive(Parser)]
#[command(
    name = "verify-pro",
    version,
    about = "Continuous protocol-dialect authentication toolkit",
    propagate_version = true
)]
struct Cli {
    /// Seed behind every random choice a subcommand makes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Settings file (key=value lines: ports, credentials, artifact
    /// paths, cost overrides).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Log filter, e.g. `info` or `vp_ftp=debug`.
    #[arg(long, global = true, default_value = "warn", value_name = "FILTER")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate seeded synthetic corpora and labeled structure datasets.
    GenDatasets {
        /// Output directory.
        #[arg(long, default_value = "datasets")]
        out: PathBuf,
        /// File-transfer request corpus size.
        #[arg(long, default_value_t = 150_000)]
        requests: usize,
        /// Labeled structure dataset size.
        #[arg(long, default_value_t = 150_000)]
        structures: usize,
        /// HTTP request-line corpus size (0 skips the file).
        #[arg(long, default_value_t = 0)]
        http_requests: usize,
        /// MQTT topic corpus size (0 skips the file).
        #[arg(long, default_value_t = 0)]
        mqtt_topics: usize,
    },

    /// Train the request-to-dialect decision model.
    TrainDdm {
        #[arg(long, value_enum, default_value_t = Protocol::Ftp)]
        protocol: Protocol,
        /// Pre-generated corpus file; generated in-process when absent.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Corpus size when generating.
        #[arg(long, default_value_t = 150_000)]
        size: usize,
        /// Trade-off factor: 1 concentrates on cheap dialects, 0 spreads
        /// uniformly.
        #[arg(long, default_value_t = 0.8)]
        trade_off: f64,
        /// Overrides the per-objective epoch schedule.
        #[arg(long)]
        epochs: Option<usize>,
        /// Model artifact path; defaults to the configured one.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Train the response-structure verifier tree.
    TrainSrv {
        #[arg(long, value_enum, default_value_t = Protocol::Ftp)]
        protocol: Protocol,
        /// Pre-generated labeled CSV; generated in-process when absent.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Total dataset size when generating.
        #[arg(long, default_value_t = 30_000)]
        size: usize,
        /// Fraction of rows held out for the accuracy report.
        #[arg(long, default_value_t = 0.2)]
        holdout: f64,
        /// Tree artifact path; defaults to the configured one.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Serve files over the dialected file-transfer protocol.
    ServeFtp {
        /// Directory to serve.
        #[arg(long, default_value = "files")]
        root: PathBuf,
        /// Overrides the configured port; 0 binds an ephemeral port.
        #[arg(long)]
        port: Option<u16>,
        /// Speak plain FTP (overhead baseline) instead of dialects.
        #[arg(long)]
        plain: bool,
        /// Skip per-dialect artificial response delays.
        #[arg(long)]
        no_delays: bool,
    },

    /// Fetch files as a verifying file-transfer client.
    FtpGet {
        /// Server `host:port`; defaults to the configured endpoint.
        #[arg(long)]
        addr: Option<String>,
        /// Fetch over plain FTP without verification.
        #[arg(long)]
        plain: bool,
        /// Request lines, e.g. `"get report.txt"`.
        #[arg(required = true)]
        requests: Vec<String>,
    },

    /// Serve resources over dialected HTTP.
    ServeHttp {
        #[arg(long, default_value = "files")]
        root: PathBuf,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        plain: bool,
    },

    /// Fetch resources as a verifying HTTP client.
    HttpGet {
        #[arg(long)]
        addr: Option<String>,
        #[arg(long)]
        plain: bool,
        /// Resource paths, e.g. `/index.html`.
        #[arg(required = true)]
        paths: Vec<String>,
    },

    /// Run the dialect-verifying MQTT broker.
    MqttBroker {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        plain: bool,
    },

    /// Publish one message as a dialect-encoding MQTT client.
    MqttPub {
        #[arg(long)]
        addr: Option<String>,
        #[arg(long)]
        plain: bool,
        topic: String,
        message: String,
    },

    /// Simulate an attack on loopback endpoints and report detection.
    Attack {
        /// One of: reroute, replay, flood, observe.
        #[arg(long, value_parser = AttackKind::from_str)]
        kind: AttackKind,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Attacker behavior: fixed-malformed, random-schema-guess, or
        /// random-dialect-guess.
        #[arg(long, default_value = "fixed-malformed", value_parser = parse_strategy)]
        strategy: MalloryStrategy,
        /// Run the genuine-server control arm instead of the attack.
        #[arg(long)]
        control: bool,
        /// Interleave a genuine client action every n-th trial.
        #[arg(long)]
        interleave: Option<usize>,
        /// Decision-model artifact for the honest endpoints; falls back
        /// to the configured path, then to a small in-process model.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Served files (or topic pairs) in the provisioned world.
        #[arg(long, default_value_t = 24)]
        world_size: usize,
        /// Also write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },

    /// Train one model per trade-off factor and chart the dialect
    /// distributions.
    SweepTradeoff {
        /// Comma-separated trade-off factors.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 0.8, 0.4, 0.0])]
        a: Vec<f64>,
        #[arg(long, default_value_t = 150_000)]
        train_size: usize,
        #[arg(long, default_value_t = 10_000)]
        holdout: usize,
        /// Overrides the per-objective epoch schedule.
        #[arg(long)]
        epochs: Option<usize>,
        /// Output directory for `sweep.csv` and charts.
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
        /// Also render one SVG bar chart per factor.
        #[arg(long)]
        svg: bool,
    },

    /// Measure per-dialect session times against the plain baseline.
    Bench {
        #[arg(long, value_enum, default_value_t = Protocol::Ftp)]
        protocol: Protocol,
        /// 1-based dialect id; omitted benchmarks every dialect.
        #[arg(long)]
        dialect: Option<u16>,
        #[arg(long, default_value_t = 20)]
        repetitions: usize,
        /// Transferred payload size in bytes.
        #[arg(long, default_value_t = 20)]
        payload: usize,
        /// Also write the timing table as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    let _ = env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .try_init();

    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(error) => {
            eprintln!("error: {error:#}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let settings = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let seed = cli.seed;

    match cli.command {
        Command::GenDatasets {
            out,
            requests,
            structures,
            http_requests,
            mqtt_topics,
        } => {
            let report = cmd_gen_datasets(&DatasetSpec {
                out_dir: out,
                request_count: requests,
                structure_count: structures,
                http_count: http_requests,
                mqtt_count: mqtt_topics,
                seed,
            })?;
            print!("{report}");
            Ok(0)
        }

        Command::TrainDdm {
            protocol,
            corpus,
            size,
            trade_off,
            epochs,
            out,
        } => {
            let out = out.unwrap_or_else(|| model_path(protocol, &settings));
            let report = cmd_train_ddm(
                &TrainDdmSpec {
                    protocol,
                    corpus,
                    size,
                    trade_off,
                    epochs,
                    seed,
                    out,
                },
                &settings,
            )?;
            print!("{report}");
            Ok(0)
        }

        Command::TrainSrv {
            protocol,
            dataset,
            size,
            holdout,
            out,
        } => {
            let out = out.unwrap_or_else(|| tree_path(protocol, &settings));
            let report = cmd_train_srv(
                &TrainSrvSpec {
                    protocol,
                    dataset,
                    size,
                    holdout,
                    seed,
                    out,
                },
                &settings,
            )?;
            print!("{report}");
            Ok(0)
        }

        Command::ServeFtp {
            root,
            port,
            plain,
            no_delays,
        } => {
            let server = start_ftp_server(
                &ServeSpec {
                    root,
                    port,
                    plain,
                    delays: !no_delays,
                },
                &settings,
            )?;
            announce(server.addr())?;
            block_forever()
        }

        Command::ServeHttp { root, port, plain } => {
            let server = start_http_server(
                &ServeSpec {
                    root,
                    port,
                    plain,
                    delays: false,
                },
                &settings,
            )?;
            announce(server.addr())?;
            block_forever()
        }

        Command::MqttBroker { port, plain } => {
            let broker = start_mqtt_broker(
                &ServeSpec {
                    root: PathBuf::new(),
                    port,
                    plain,
                    delays: false,
                },
                &settings,
            )?;
            announce(broker.addr())?;
            block_forever()
        }

        Command::FtpGet {
            addr,
            plain,
            requests,
        } => {
            let summary = cmd_ftp_get(
                &FtpGetSpec {
                    addr,
                    requests,
                    plain,
                },
                &settings,
            )?;
            finish_transfers(summary)
        }

        Command::HttpGet { addr, plain, paths } => {
            let summary = cmd_http_get(&HttpGetSpec { addr, paths, plain }, &settings)?;
            finish_transfers(summary)
        }

        Command::MqttPub {
            addr,
            plain,
            topic,
            message,
        } => {
            let summary = cmd_mqtt_pub(
                &MqttPubSpec {
                    addr,
                    topic,
                    message,
                    plain,
                },
                &settings,
            )?;
            finish_transfers(summary)
        }

        Command::Attack {
            kind,
            trials,
            strategy,
            control,
            interleave,
            model,
            world_size,
            json,
        } => {
            let report = cmd_attack(
                &AttackCmdSpec {
                    kind,
                    trials,
                    seed,
                    strategy,
                    control,
                    interleave,
                    model,
                    world_size,
                    json_out: json,
                },
                &settings,
            )?;
            print!("{report}");
            Ok(0)
        }

        Command::SweepTradeoff {
            a,
            train_size,
            holdout,
            epochs,
            out,
            svg,
        } => {
            let report = cmd_sweep_tradeoff(
                &SweepSpec {
                    a_values: a,
                    train_size,
                    holdout_size: holdout,
                    epochs,
                    seed,
                    out_dir: out,
                    svg,
                },
                &settings,
            )?;
            print!("{report}");
            Ok(0)
        }

        Command::Bench {
            protocol,
            dialect,
            repetitions,
            payload,
            json,
        } => {
            let table = cmd_bench(&BenchSpec {
                protocol,
                dialect,
                repetitions,
                payload,
            })?;
            if let Some(path) = &json {
                write_atomic(path, serde_json::to_string_pretty(&table)?.as_bytes())?;
            }
            print!("{table}");
            Ok(0)
        }
    }
}

fn model_path(protocol: Protocol, settings: &Settings) -> PathBuf {
    match protocol {
        Protocol::Ftp => settings.ftp_model.clone(),
        Protocol::Http => settings.http_model.clone(),
        Protocol::Mqtt => settings.mqtt_model.clone(),
    }
}

fn tree_path(protocol: Protocol, settings: &Settings) -> PathBuf {
    match protocol {
        Protocol::Ftp => settings.ftp_tree.clone(),
        Protocol::Http => settings.http_tree.clone(),
        Protocol::Mqtt => settings.mqtt_tree.clone(),
    }
}

/// Prints the bound address immediately so wrappers can dial it.
fn announce(addr: std::net::SocketAddr) -> anyhow::Result<()> {
    let mut stdout = std::io::stdout();
    writeln!(stdout, "listening on {addr}")?;
    stdout.flush()?;
    Ok(())
}

/// Serve commands hold the endpoint up until the process is signaled.
fn block_forever() -> anyhow::Result<i32> {
    loop {
        std::thread::park();
    }
}

fn finish_transfers(summary: TransferSummary) -> anyhow::Result<i32> {
    print!("{summary}");
    Ok(if summary.failures > 0 { 1 } else { 0 })
}
