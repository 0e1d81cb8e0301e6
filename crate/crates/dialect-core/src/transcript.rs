//! Session transcripts: one record per wire event, exportable as
//! JSON lines for offline analysis.

use std::time::Instant;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Sent,
    Received,
    /// Endpoint-internal milestone (e.g. which dialect a request uses) —
    /// not a wire transmission.
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Control,
    Data,
}

/// Session lifecycle position at the moment an event is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    AwaitingLogin,
    Idle,
    AwaitingResponse,
    Transferring,
    Terminated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranscriptEvent {
    /// Milliseconds since the session started.
    pub at_ms: f64,
    pub direction: Direction,
    pub channel: Channel,
    pub phase: Phase,
    /// Control payloads verbatim; data events summarized as "<n> bytes".
    pub payload: String,
}

#[derive(Debug)]
pub struct SessionTranscript {
    started: Instant,
    events: Vec<TranscriptEvent>,
}

impl Default for SessionTranscript {
    fn default() -> Self {
        Self::new()
    }
}

impl SessionTranscript {
    pub fn new() -> Self {
        Self {
            started: Instant::now(),
            events: Vec::new(),
        }
    }

    pub fn record(
        &mut self,
        direction: Direction,
        channel: Channel,
        phase: Phase,
        payload: impl Into<String>,
    ) {
        self.events.push(TranscriptEvent {
            at_ms: self.started.elapsed().as_secs_f64() * 1e3,
            direction,
            channel,
            phase,
            payload: payload.into(),
        });
    }

    pub fn events(&self) -> &[TranscriptEvent] {
        &self.events
    }

    /// One JSON object per line, in event order.
    pub fn to_json_lines(&self) -> String {
        self.events
            .iter()
            .map(|event| serde_json::to_string(event).expect("plain data serializes"))
            .fold(String::new(), |mut out, line| {
                out.push_str(&line);
                out.push('\n');
                out
            })
    }

    /// True if any file bytes were received on the data channel —
    /// the thing a fail-closed session must never show after a reject.
    pub fn data_bytes_received(&self) -> bool {
        self.events
            .iter()
            .any(|e| e.channel == Channel::Data && e.direction == Direction::Received)
    }
}
