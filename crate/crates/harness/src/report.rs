//! Detection-rate reports.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

/// What one scenario run measured.
///
/// A trial counts as *detected* when the client terminated the session
/// before accepting any payload. The three classification counters
/// partition the detections: structural failures (wrong shape or wrong
/// message count for the expected dialect), content-law failures, and
/// responses that passed verification but stalled at the transfer phase
/// — the peer could not produce the payload channel. Every per-trial
/// label also lands verbatim in `outcomes` so nothing is hidden by the
/// classification.
#[derive(Debug, Clone, Serialize)]
pub struct DetectionReport {
    /// Which run produced this, e.g. `reroute(fixed-malformed)`.
    pub scenario: String,
    /// Resolved loopback addresses of the endpoints the run spun up.
    pub endpoints: BTreeMap<String, String>,
    pub trials: usize,
    pub detected: usize,
    pub detection_rate: f64,
    /// Mean wall-clock milliseconds from session start to termination,
    /// averaged over detected trials only. Zero when nothing was detected.
    pub mean_time_to_detect_ms: f64,
    /// Mean wall-clock milliseconds per trial, over all trials.
    pub mean_trial_ms: f64,
    /// Responses that failed structurally: wrong shape, or too few
    /// messages for the expected dialect.
    pub dialect_mismatches: usize,
    /// Structurally valid responses whose field contents broke a law.
    pub content_mismatches: usize,
    /// Responses that passed verification but whose session terminated
    /// before any payload moved.
    pub stalled_after_accept: usize,
    /// Payload bytes the client accepted during the run. Zero in every
    /// attack arm; positive in control and observation runs.
    pub payload_bytes_delivered: u64,
    /// Residual-risk probes (exact-request replays) that the protocol
    /// layer accepted. These are reported, not counted as detections.
    pub residual_accepts: usize,
    pub residual_probes: usize,
    /// Bytes a passive observer saw on the control channel, when the
    /// scenario routed traffic through one.
    pub observer_bytes: BTreeMap<String, u64>,
    /// Raw tally of every per-trial outcome label.
    pub outcomes: BTreeMap<String, usize>,
}

impl DetectionReport {
    pub(crate) fn new(scenario: impl Into<String>) -> Self {
        Self {
            scenario: scenario.into(),
            endpoints: BTreeMap::new(),
            trials: 0,
            detected: 0,
            detection_rate: 0.0,
            mean_time_to_detect_ms: 0.0,
            mean_trial_ms: 0.0,
            dialect_mismatches: 0,
            content_mismatches: 0,
            stalled_after_accept: 0,
            payload_bytes_delivered: 0,
            residual_accepts: 0,
            residual_probes: 0,
            observer_bytes: BTreeMap::new(),
            outcomes: BTreeMap::new(),
        }
    }

    pub(crate) fn tally(&mut self, label: impl Into<String>) {
        *self.outcomes.entry(label.into()).or_insert(0) += 1;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }

    /// The seed-determined portion of the report: everything except
    /// wall-clock means and port numbers. Two runs of the same scenario
    /// and seed produce identical digests.
    pub fn decision_digest(&self) -> String {
        let mut digest = format!(
            "{} trials={} detected={} dialect={} content={} stalled={} payload={} residual={}/{}",
            self.scenario,
            self.trials,
            self.detected,
            self.dialect_mismatches,
            self.content_mismatches,
            self.stalled_after_accept,
            self.payload_bytes_delivered,
            self.residual_accepts,
            self.residual_probes,
        );
        for (label, count) in &self.outcomes {
            digest.push_str(&format!(" {label}={count}"));
        }
        digest
    }
}

impl fmt::Display for DetectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario                 {}", self.scenario)?;
        for (name, addr) in &self.endpoints {
            writeln!(f, "{name:<24} {addr}")?;
        }
        writeln!(f, "trials                   {}", self.trials)?;
        writeln!(f, "detected                 {}", self.detected)?;
        writeln!(f, "detection rate           {:.2}%", self.detection_rate * 100.0)?;
        writeln!(f, "mean time to detect      {:.3} ms", self.mean_time_to_detect_ms)?;
        writeln!(f, "mean trial duration      {:.3} ms", self.mean_trial_ms)?;
        writeln!(f, "dialect mismatches       {}", self.dialect_mismatches)?;
        writeln!(f, "content mismatches       {}", self.content_mismatches)?;
        writeln!(f, "stalled after accept     {}", self.stalled_after_accept)?;
        writeln!(f, "payload bytes delivered  {}", self.payload_bytes_delivered)?;
        if self.residual_probes > 0 {
            writeln!(
                f,
                "residual accepts         {}/{}",
                self.residual_accepts, self.residual_probes
            )?;
        }
        for (name, bytes) in &self.observer_bytes {
            writeln!(f, "{name:<24} {bytes}")?;
        }
        writeln!(f, "outcomes:")?;
        for (label, count) in &self.outcomes {
            writeln!(f, "  {label:<30} {count}")?;
        }
        Ok(())
    }
}
