//! Attack harness for dialect-authenticated endpoints.
//!
//! Reproduces the classic man-in-the-middle topology on loopback: Alice
//! (the verifying client) talks to Bob (the genuine server) while Eve, a
//! TCP-level rerouting proxy, can redirect her traffic to Mallory — a
//! malicious server that speaks plain FTP but owns no dialect machinery.
//! On top of that sit a replay attacker that answers from captured
//! genuine sessions and an MQTT flood client that hammers a broker with
//! undialected publishes.
//!
//! Each scenario spins up isolated endpoints on ephemeral loopback
//! ports, runs its trials sequentially for reproducibility, and distills
//! the outcomes into a [`DetectionReport`]. Detection means the client
//! terminated the session before accepting any payload; the reports
//! break terminations down into structural failures, content-law
//! failures, and responses that passed verification but stalled at the
//! transfer phase.

mod lines;
mod mallory;
pub mod models;
mod proxy;
mod replay;
mod report;
mod runs;
mod world;

use std::time::Duration;

pub use mallory::MalloryStrategy;
pub use report::DetectionReport;
pub use runs::{run_flood, run_passive_observe, run_replay, run_reroute};
pub use world::{FtpWorld, MqttWorld};

/// Which attack a scenario runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackKind {
    /// Eve reroutes Alice's FTP session to Mallory.
    Reroute,
    /// An attacker answers Alice from a captured genuine session.
    Replay,
    /// An undialected client floods an MQTT broker with publishes.
    FloodPublish,
    /// Eve only observes a genuine session passing through her.
    PassiveObserve,
}

impl std::fmt::Display for AttackKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AttackKind::Reroute => "reroute",
            AttackKind::Replay => "replay",
            AttackKind::FloodPublish => "flood",
            AttackKind::PassiveObserve => "observe",
        })
    }
}

impl std::str::FromStr for AttackKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reroute" => Ok(AttackKind::Reroute),
            "replay" => Ok(AttackKind::Replay),
            "flood" => Ok(AttackKind::FloodPublish),
            "observe" => Ok(AttackKind::PassiveObserve),
            other => Err(format!(
                "unknown attack kind {other:?}; expected reroute, replay, flood, or observe"
            )),
        }
    }
}

/// Where the scenario's endpoints live. Everything binds ephemeral ports
/// on this address; the resolved sockets end up in the report.
#[derive(Debug, Clone)]
pub struct Topology {
    pub bind_addr: String,
}

impl Default for Topology {
    fn default() -> Self {
        Self { bind_addr: "127.0.0.1".into() }
    }
}

/// One attack experiment: what to run, how often, and under which seed.
///
/// The seed drives every random choice — request sampling and the
/// attacker's guesses — so two runs of the same scenario agree on every
/// decision count in the report (wall-clock means naturally differ).
#[derive(Debug, Clone)]
pub struct AttackScenario {
    pub kind: AttackKind,
    pub topology: Topology,
    /// Number of attacked (or observed) sessions; at least 1.
    pub trials: usize,
    pub seed: u64,
    /// How Mallory answers when rerouted traffic reaches it.
    pub mallory_strategy: MalloryStrategy,
    /// Reroute control arm: Eve forwards to the genuine Bob instead.
    pub control_arm: bool,
    /// Flood runs: inject one genuine publish after every `n` floods.
    pub genuine_interleave: Option<usize>,
    /// Alice's per-read timeout. Detection of a silent peer costs at
    /// most this long, so small values make attack runs fast.
    pub client_read_timeout: Duration,
    /// Honor per-dialect response delays on the genuine server. Slows
    /// runs down; requires a read timeout above the slowest dialect.
    pub apply_template_delays: bool,
}

impl AttackScenario {
    pub fn new(kind: AttackKind, trials: usize, seed: u64) -> Self {
        Self {
            kind,
            topology: Topology::default(),
            trials,
            seed,
            mallory_strategy: MalloryStrategy::default(),
            control_arm: false,
            genuine_interleave: None,
            client_read_timeout: Duration::from_millis(400),
            apply_template_delays: false,
        }
    }

    /// Checks the scenario against the runner it was handed to.
    fn validate(&self, expected_kind: AttackKind) -> Result<(), HarnessError> {
        if self.kind != expected_kind {
            return Err(HarnessError::InvalidScenario(format!(
                "scenario kind is {}, but this runner executes {}",
                self.kind, expected_kind
            )));
        }
        if self.trials == 0 {
            return Err(HarnessError::InvalidScenario("trial count must be at least 1".into()));
        }
        if self.topology.bind_addr.is_empty() {
            return Err(HarnessError::InvalidScenario("bind address must not be empty".into()));
        }
        if self.apply_template_delays && self.client_read_timeout < Duration::from_secs(5) {
            return Err(HarnessError::InvalidScenario(
                "template delays need a client read timeout of at least 5s, \
                 or every slow-dialect response counts as a timeout"
                    .into(),
            ));
        }
        if let Some(0) = self.genuine_interleave {
            return Err(HarnessError::InvalidScenario(
                "genuine_interleave must be at least 1 when set".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("harness setup failed: {0}")]
    SetupFailure(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
