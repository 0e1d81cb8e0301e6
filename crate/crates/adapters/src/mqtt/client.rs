//! The authenticating publisher.
//!
//! For each publish the client derives the dialect from the topic with
//! its own copy of the decision model, encodes the packet sequence
//! accordingly, and treats anything but a prompt acknowledgement as a
//! rejection — the broker's silence *is* the fail-closed signal.

use std::io::{self, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::time::{Duration, Instant};

use vp_ddm::MlpModel;
use vp_dialect::{Channel, Direction, Phase, SessionTranscript, TimingReport};

use super::dialect::{mqtt_dialect_encode, MqttDialect};
use super::packet::{encode_plain_publish, MqttPublish, PUBACK_BYTES};
use crate::AdapterError;

#[derive(Debug, Clone)]
pub struct MqttClientConfig {
    /// How long to wait for the broker's acknowledgement.
    pub read_timeout: Duration,
}

impl Default for MqttClientConfig {
    fn default() -> Self {
        Self {
            read_timeout: Duration::from_secs(10),
        }
    }
}

/// What the broker did with one publish.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PublishOutcome {
    /// Acknowledged; the payload was stored.
    Accepted,
    /// No acknowledgement — the broker disconnected or went silent.
    Rejected,
}

pub struct MqttClient {
    stream: TcpStream,
    model: Arc<MlpModel>,
    config: MqttClientConfig,
    transcript: SessionTranscript,
}

impl MqttClient {
    pub fn connect(
        addr: impl ToSocketAddrs,
        model: Arc<MlpModel>,
        config: MqttClientConfig,
    ) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        stream.set_read_timeout(Some(config.read_timeout))?;
        Ok(Self {
            stream,
            model,
            config,
            transcript: SessionTranscript::new(),
        })
    }

    /// Publishes one (topic, message) in the dialect the model picks for
    /// the topic. Encoding failures are caller bugs; broker verdicts come
    /// back as the outcome.
    pub fn publish(
        &mut self,
        topic: &str,
        message: &str,
    ) -> Result<(PublishOutcome, TimingReport), AdapterError> {
        let mut timing = TimingReport::default();
        let total_start = Instant::now();

        let ddm_start = Instant::now();
        let dialect_id = self.model.predict_dialect(topic);
        timing.ddm_ms = ddm_start.elapsed().as_secs_f64() * 1e3;
        let dialect = MqttDialect::from_id(dialect_id)
            .ok_or(AdapterError::UnknownDialect(dialect_id.get()))?;
        self.transcript.record(
            Direction::Local,
            Channel::Control,
            Phase::Idle,
            format!("publishing {topic:?} in dialect {dialect_id}"),
        );

        let packets = mqtt_dialect_encode(dialect, topic, message)?;
        let outcome = self.publish_packets(&packets)?;
        timing.handshake_ms = total_start.elapsed().as_secs_f64() * 1e3;
        timing.total_ms = timing.handshake_ms;
        Ok((outcome, timing))
    }

    /// Sends a pre-encoded packet sequence and awaits the verdict. This
    /// is the hook the attack harness uses to send deliberately wrong
    /// encodings.
    pub fn publish_packets(&mut self, packets: &[MqttPublish]) -> io::Result<PublishOutcome> {
        for packet in packets {
            self.stream.write_all(&packet.to_bytes())?;
            self.transcript.record(
                Direction::Sent,
                Channel::Control,
                Phase::AwaitingResponse,
                format!("publish packet, {} field(s)", packet.fields().len()),
            );
        }
        self.stream.flush()?;
        Ok(self.await_ack())
    }

    /// Publishes in the stock undialected format — what a client without
    /// the dialect layer would send.
    pub fn publish_plain(
        &mut self,
        topic: &str,
        message: &str,
    ) -> Result<PublishOutcome, AdapterError> {
        let bytes = encode_plain_publish(topic, message)?;
        self.stream.write_all(&bytes)?;
        self.stream.flush()?;
        self.transcript.record(
            Direction::Sent,
            Channel::Control,
            Phase::AwaitingResponse,
            format!("plain publish to {topic:?}"),
        );
        Ok(self.await_ack())
    }

    pub fn transcript(&self) -> &SessionTranscript {
        &self.transcript
    }

    /// The acknowledgement, or the lack of one. Timeout, disconnect, and
    /// malformed ack all read as rejection.
    fn await_ack(&mut self) -> PublishOutcome {
        let mut ack = [0u8; 4];
        match self.stream.read_exact(&mut ack) {
            Ok(()) if ack == PUBACK_BYTES => {
                self.transcript.record(
                    Direction::Received,
                    Channel::Control,
                    Phase::Idle,
                    "pub-ack",
                );
                PublishOutcome::Accepted
            }
            _ => {
                self.transcript.record(
                    Direction::Local,
                    Channel::Control,
                    Phase::Terminated,
                    format!(
                        "no acknowledgement within {:?}; publish rejected",
                        self.config.read_timeout
                    ),
                );
                PublishOutcome::Rejected
            }
        }
    }
}
