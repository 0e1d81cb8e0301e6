//! Scenario runners.
//!
//! Every runner spins up its endpoints on ephemeral loopback ports, runs
//! the trials sequentially, and classifies each trial's outcome into the
//! report. A trial counts as detected when the client terminated before
//! accepting payload; terminations during the response read (timeout or
//! close with too few messages) count as structural failures, since the
//! response demonstrably did not have the expected dialect's shape.

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vp_adapters::mqtt::{
    spawn_mqtt_broker, BrokerConfig, MqttClient, MqttClientConfig, PublishOutcome,
};
use vp_adapters::EndpointMode;
use vp_ftp::{
    spawn_server, ClientConfig, Direction, FtpClient, ServerConfig, TerminationReason,
    TransferResult, READY_ACK,
};

use crate::mallory::{spawn_mallory, MalloryStrategy};
use crate::proxy::spawn_proxy;
use crate::replay::{parse_capture, spawn_replayer, ReplayScript};
use crate::report::DetectionReport;
use crate::world::{FtpWorld, MqttWorld};
use crate::{AttackKind, AttackScenario, HarnessError};

/// Decouples Mallory's guessing stream from the request sampling stream.
const MALLORY_SEED_SALT: u64 = 0x4d41_4c4c;

/// Eve reroutes Alice's sessions to Mallory (or, in the control arm, to
/// the genuine Bob). Each trial is one fresh session issuing one random
/// request from the world's pool.
pub fn run_reroute(
    scenario: &AttackScenario,
    world: &FtpWorld,
) -> Result<DetectionReport, HarnessError> {
    scenario.validate(AttackKind::Reroute)?;
    ensure_requests(world)?;

    let bob = spawn_server(server_config(scenario, world), Arc::clone(&world.engine))?;
    let mallory = if scenario.control_arm {
        None
    } else {
        let shapes = (scenario.mallory_strategy == MalloryStrategy::RandomDialectGuess)
            .then(|| Arc::new(world.engine.registry.clone()));
        Some(spawn_mallory(
            &scenario.topology.bind_addr,
            scenario.mallory_strategy,
            scenario.seed ^ MALLORY_SEED_SALT,
            shapes,
        )?)
    };
    let target = mallory.as_ref().map_or_else(|| bob.addr(), |m| m.addr());
    let eve = spawn_proxy(&scenario.topology.bind_addr, target, false)?;

    let name = if scenario.control_arm {
        "reroute-control".to_string()
    } else {
        format!("reroute({})", scenario.mallory_strategy.label())
    };
    let mut report = DetectionReport::new(name);
    report.trials = scenario.trials;
    report.endpoints.insert("bob".into(), bob.addr().to_string());
    report.endpoints.insert("eve".into(), eve.addr().to_string());
    if let Some(mallory) = &mallory {
        report.endpoints.insert("mallory".into(), mallory.addr().to_string());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut sums = Sums::default();
    for _ in 0..scenario.trials {
        let request = world.requests.choose(&mut rng).expect("pool checked non-empty");
        run_ftp_trial(eve.addr(), scenario, world, request, &mut report, &mut sums)?;
    }

    let (upstream, downstream) = eve.bytes_forwarded();
    report.observer_bytes.insert("eve_upstream_bytes".into(), upstream);
    report.observer_bytes.insert("eve_downstream_bytes".into(), downstream);
    finalize(&mut report, &sums);
    Ok(report)
}

/// Eve only watches: genuine sessions pass through her untouched. The
/// run demonstrates that observation alone neither breaks sessions nor
/// reveals payload (the data channel does not cross the proxy).
pub fn run_passive_observe(
    scenario: &AttackScenario,
    world: &FtpWorld,
) -> Result<DetectionReport, HarnessError> {
    scenario.validate(AttackKind::PassiveObserve)?;
    ensure_requests(world)?;

    let bob = spawn_server(server_config(scenario, world), Arc::clone(&world.engine))?;
    let eve = spawn_proxy(&scenario.topology.bind_addr, bob.addr(), false)?;

    let mut report = DetectionReport::new("passive-observe");
    report.trials = scenario.trials;
    report.endpoints.insert("bob".into(), bob.addr().to_string());
    report.endpoints.insert("eve".into(), eve.addr().to_string());

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut sums = Sums::default();
    for _ in 0..scenario.trials {
        let request = world.requests.choose(&mut rng).expect("pool checked non-empty");
        run_ftp_trial(eve.addr(), scenario, world, request, &mut report, &mut sums)?;
    }

    let (upstream, downstream) = eve.bytes_forwarded();
    report.observer_bytes.insert("eve_upstream_bytes".into(), upstream);
    report.observer_bytes.insert("eve_downstream_bytes".into(), downstream);
    finalize(&mut report, &sums);
    Ok(report)
}

/// A replay attacker records genuine sessions off the wire, then answers
/// Alice's request `R_b` with the recorded response for `R_a ≠ R_b`.
/// After the cross-request trials, every recording is also replayed
/// against its own request — the residual-risk probe the protocol layer
/// cannot distinguish from the genuine exchange.
pub fn run_replay(
    scenario: &AttackScenario,
    world: &FtpWorld,
) -> Result<DetectionReport, HarnessError> {
    scenario.validate(AttackKind::Replay)?;
    ensure_requests(world)?;
    if world.requests.len() < 2 {
        return Err(HarnessError::SetupFailure(
            "replay needs at least two distinct requests".into(),
        ));
    }

    let bob = spawn_server(server_config(scenario, world), Arc::clone(&world.engine))?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);

    // Recording phase: a passive observer captures complete, successful
    // transfers — the sessions worth replaying — plus one for a missing
    // file, whose response a replay can fake end to end.
    let mut pool = world.requests.clone();
    pool.shuffle(&mut rng);
    pool.truncate(pool.len().min(12));
    let ghost_request = "get sessional-ghost.txt".to_string();
    let recorder = spawn_proxy(&scenario.topology.bind_addr, bob.addr(), true)?;
    for request in pool.iter().chain([&ghost_request]) {
        let mut alice = connect_alice(recorder.addr(), scenario, world)?;
        let (result, _) = alice.get(request);
        let expected_hit = request != &ghost_request;
        match result {
            TransferResult::Bytes(_) if expected_hit => {}
            TransferResult::NotFound if !expected_hit => {}
            other => {
                return Err(HarnessError::SetupFailure(format!(
                    "recording session for {request:?} ended in {other:?}"
                )))
            }
        }
    }
    let captures = recorder.captures();
    drop(recorder);
    let mut scripts: Vec<ReplayScript> = Vec::with_capacity(captures.len());
    for (capture, request) in captures.iter().zip(pool.iter().chain([&ghost_request])) {
        scripts.push(parse_capture(capture, request)?);
    }
    if scripts.len() != pool.len() + 1 {
        return Err(HarnessError::SetupFailure(format!(
            "expected {} recordings, captured {}",
            pool.len() + 1,
            scripts.len()
        )));
    }
    let ghost_index = scripts.len() - 1;

    // Cross-request trials replay successful transfers only; the ghost
    // recording is reserved for the residual probe below.
    let cross_schedule: Vec<usize> =
        (0..scenario.trials).map(|_| rng.gen_range(0..ghost_index)).collect();
    let residual_schedule: Vec<usize> = (0..scripts.len()).collect();
    let mut schedule = cross_schedule.clone();
    schedule.extend(&residual_schedule);
    let replayer = spawn_replayer(&scenario.topology.bind_addr, scripts.clone(), schedule)?;
    let eve = spawn_proxy(&scenario.topology.bind_addr, replayer.addr(), false)?;

    let mut report = DetectionReport::new(format!("replay({} recordings)", scripts.len()));
    report.trials = scenario.trials;
    report.endpoints.insert("bob".into(), bob.addr().to_string());
    report.endpoints.insert("eve".into(), eve.addr().to_string());
    report.endpoints.insert("replayer".into(), replayer.addr().to_string());

    let mut sums = Sums::default();
    for &script_index in &cross_schedule {
        let recorded_request = &scripts[script_index].request;
        let request = pick_other(&mut rng, &world.requests, recorded_request)?;
        run_ftp_trial(eve.addr(), scenario, world, &request, &mut report, &mut sums)?;
    }

    report.residual_probes = scripts.len();
    for script in &scripts {
        let mut alice = connect_alice(eve.addr(), scenario, world)?;
        let (result, _) = alice.get(&script.request);
        let ready_sent = sent_ready_ack(&alice);
        match result {
            TransferResult::Bytes(_) => {
                report.residual_accepts += 1;
                report.tally("residual:payload_accepted");
            }
            TransferResult::NotFound => {
                report.residual_accepts += 1;
                report.tally("residual:not_found_deception");
            }
            TransferResult::Terminated(_) if ready_sent => {
                report.residual_accepts += 1;
                report.tally("residual:accepted_then_stalled");
            }
            TransferResult::Terminated(reason) => {
                report.tally(format!("residual:rejected:{}", reason_label(&reason)));
            }
        }
    }

    finalize(&mut report, &sums);
    Ok(report)
}

/// An undialected client floods an MQTT broker with plain publishes,
/// optionally with genuine dialected traffic interleaved. The broker
/// must reject exactly the undialected subset.
pub fn run_flood(
    scenario: &AttackScenario,
    world: &MqttWorld,
) -> Result<DetectionReport, HarnessError> {
    scenario.validate(AttackKind::FloodPublish)?;
    if world.pairs.is_empty() {
        return Err(HarnessError::SetupFailure("the topic pool is empty".into()));
    }

    let broker = spawn_mqtt_broker(
        BrokerConfig {
            bind_addr: scenario.topology.bind_addr.clone(),
            mode: EndpointMode::Dialected,
            ..BrokerConfig::default()
        },
        Arc::clone(&world.engine),
    )?;

    let mut report = DetectionReport::new("flood-publish");
    report.trials = scenario.trials;
    report.endpoints.insert("broker".into(), broker.addr().to_string());

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut genuine = connect_publisher(broker.addr(), scenario, world)?;
    let mut genuine_sent: Vec<(String, String)> = Vec::new();
    let mut sums = Sums::default();

    for trial in 0..scenario.trials {
        let (topic, message) = world.pairs.choose(&mut rng).expect("pool checked non-empty");
        let flood_message = format!("{message} (flood)");
        let started = Instant::now();
        let outcome = flood_once(broker.addr(), scenario, world, topic, &flood_message)?;
        let elapsed = ms_since(started);
        sums.trial_ms += elapsed;
        match outcome {
            PublishOutcome::Rejected => {
                report.detected += 1;
                // An undialected publish fails the structure check; no
                // finer verdict exists at the broker's packet layer.
                report.dialect_mismatches += 1;
                sums.detect_ms += elapsed;
                report.tally("flood_rejected");
            }
            PublishOutcome::Accepted => report.tally("flood_accepted"),
        }

        if let Some(every) = scenario.genuine_interleave {
            if (trial + 1) % every == 0 {
                let (topic, message) =
                    world.pairs.choose(&mut rng).expect("pool checked non-empty");
                match genuine.publish(topic, message) {
                    Ok((PublishOutcome::Accepted, _)) => {
                        genuine_sent.push((topic.clone(), message.clone()));
                        report.tally("genuine_accepted");
                    }
                    Ok((PublishOutcome::Rejected, _)) => {
                        report.tally("genuine_rejected");
                        // The broker hangs up on rejection; reconnect so
                        // later genuine publishes still go out.
                        genuine = connect_publisher(broker.addr(), scenario, world)?;
                    }
                    Err(error) => {
                        return Err(HarnessError::SetupFailure(format!(
                            "genuine publish failed outright: {error}"
                        )))
                    }
                }
            }
        }
    }

    // The store must hold exactly the genuine messages: anything else in
    // there arrived from the flood.
    let stored = broker.published();
    for (topic, message) in &stored {
        if !genuine_sent.iter().any(|pair| &pair.0 == topic && &pair.1 == message) {
            report.payload_bytes_delivered += message.len() as u64;
            report.tally("flood_message_stored");
        }
    }
    if stored == genuine_sent {
        report.tally("store_matches_genuine_exactly");
    }

    finalize(&mut report, &sums);
    Ok(report)
}

#[derive(Default)]
struct Sums {
    detect_ms: f64,
    trial_ms: f64,
}

fn ms_since(started: Instant) -> f64 {
    started.elapsed().as_secs_f64() * 1e3
}

fn ensure_requests(world: &FtpWorld) -> Result<(), HarnessError> {
    if world.requests.is_empty() {
        return Err(HarnessError::SetupFailure("the request pool is empty".into()));
    }
    Ok(())
}

fn server_config(scenario: &AttackScenario, world: &FtpWorld) -> ServerConfig {
    ServerConfig {
        bind_addr: scenario.topology.bind_addr.clone(),
        apply_template_delays: scenario.apply_template_delays,
        ..ServerConfig::new(world.file_root.clone())
    }
}

fn connect_alice(
    addr: SocketAddr,
    scenario: &AttackScenario,
    world: &FtpWorld,
) -> Result<FtpClient, HarnessError> {
    let config = ClientConfig {
        credentials: None,
        read_timeout: scenario.client_read_timeout,
    };
    FtpClient::connect(addr, config, Arc::clone(&world.engine), Arc::clone(&world.tree))
        .map_err(|error| HarnessError::SetupFailure(format!("session setup failed: {error}")))
}

fn connect_publisher(
    addr: SocketAddr,
    scenario: &AttackScenario,
    world: &MqttWorld,
) -> Result<MqttClient, HarnessError> {
    MqttClient::connect(
        addr,
        Arc::clone(&world.publisher_model),
        MqttClientConfig { read_timeout: scenario.client_read_timeout },
    )
    .map_err(|error| HarnessError::SetupFailure(format!("publisher connect failed: {error}")))
}

fn flood_once(
    addr: SocketAddr,
    scenario: &AttackScenario,
    world: &MqttWorld,
    topic: &str,
    message: &str,
) -> Result<PublishOutcome, HarnessError> {
    let mut client = MqttClient::connect(
        addr,
        Arc::clone(&world.publisher_model),
        MqttClientConfig { read_timeout: scenario.client_read_timeout },
    )
    .map_err(|error| HarnessError::SetupFailure(format!("flood connect failed: {error}")))?;
    client
        .publish_plain(topic, message)
        .map_err(|error| HarnessError::SetupFailure(format!("flood publish failed: {error}")))
}

/// One fresh session, one `get`, outcome classified into the report.
fn run_ftp_trial(
    addr: SocketAddr,
    scenario: &AttackScenario,
    world: &FtpWorld,
    request: &str,
    report: &mut DetectionReport,
    sums: &mut Sums,
) -> Result<(), HarnessError> {
    let started = Instant::now();
    let mut alice = connect_alice(addr, scenario, world)?;
    let (result, _) = alice.get(request);
    let elapsed = ms_since(started);
    sums.trial_ms += elapsed;
    match result {
        TransferResult::Bytes(bytes) => {
            report.payload_bytes_delivered += bytes.len() as u64;
            report.tally("transfer_completed");
        }
        TransferResult::NotFound => report.tally("not_found"),
        TransferResult::Terminated(reason) => {
            report.detected += 1;
            sums.detect_ms += elapsed;
            let ready_sent = sent_ready_ack(&alice);
            classify(&reason, ready_sent, report);
        }
    }
    Ok(())
}

/// Whether the client got as far as acknowledging a verified response —
/// the marker separating "verification failed" from "verification
/// passed, transfer never materialized".
fn sent_ready_ack(alice: &FtpClient) -> bool {
    alice
        .transcript()
        .events()
        .iter()
        .any(|event| event.direction == Direction::Sent && event.payload == READY_ACK)
}

fn classify(reason: &TerminationReason, ready_sent: bool, report: &mut DetectionReport) {
    let stalled = ready_sent
        && matches!(
            reason,
            TerminationReason::ResponseTimeout | TerminationReason::ConnectionClosed
        );
    let label = if stalled {
        "terminated:stalled_transfer".to_string()
    } else {
        format!("terminated:{}", reason_label(reason))
    };
    report.tally(label);
    match reason {
        TerminationReason::DialectMismatch => report.dialect_mismatches += 1,
        TerminationReason::ContentMismatch => report.content_mismatches += 1,
        TerminationReason::ResponseTimeout | TerminationReason::ConnectionClosed => {
            if stalled {
                report.stalled_after_accept += 1;
            } else {
                // The peer did not even produce the expected dialect's
                // message count — a structural failure.
                report.dialect_mismatches += 1;
            }
        }
        TerminationReason::Io(_) => {}
    }
}

fn reason_label(reason: &TerminationReason) -> &'static str {
    match reason {
        TerminationReason::DialectMismatch => "dialect_mismatch",
        TerminationReason::ContentMismatch => "content_mismatch",
        TerminationReason::ResponseTimeout => "response_timeout",
        TerminationReason::ConnectionClosed => "connection_closed",
        TerminationReason::Io(_) => "io_error",
    }
}

fn pick_other(
    rng: &mut ChaCha8Rng,
    requests: &[String],
    not_this: &str,
) -> Result<String, HarnessError> {
    for _ in 0..1000 {
        let candidate = requests.choose(rng).expect("pool checked non-empty");
        if candidate != not_this {
            return Ok(candidate.clone());
        }
    }
    Err(HarnessError::SetupFailure(format!(
        "could not find a request different from {not_this:?}"
    )))
}

fn finalize(report: &mut DetectionReport, sums: &Sums) {
    report.detection_rate = report.detected as f64 / report.trials as f64;
    report.mean_time_to_detect_ms = if report.detected > 0 {
        sums.detect_ms / report.detected as f64
    } else {
        0.0
    };
    report.mean_trial_ms = sums.trial_ms / report.trials as f64;
}
