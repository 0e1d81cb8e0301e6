//! Wall-clock spans for the stages of one request.

use serde::Serialize;

/// Timings for a single `get`, all in milliseconds. `handshake_ms` spans
/// dialect prediction through response verification (including any
/// dialect-mandated delays); `total_ms` additionally covers the data
/// transfer.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct TimingReport {
    pub ddm_ms: f64,
    pub srv_ms: f64,
    pub handshake_ms: f64,
    pub total_ms: f64,
}
