//! The verifying web client.
//!
//! For each `GET` the client predicts the dialect from its own copy of
//! the decision model, reads exactly that dialect's message count, and
//! verifies shape and content before surfacing the body. Any mismatch
//! terminates the session; a conventional single 404 resolves to
//! not-found without touching the dialect layer.

use std::io::{self, BufReader};
use std::net::{Shutdown, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::time::{Duration, Instant};

use vp_ddm::MlpModel;
use vp_dialect::{
    Channel, Direction, Phase, SessionTranscript, TerminationReason, TimingReport,
};
use vp_srv::{DecisionTree, RejectReason};

use super::dialect::{http_verify_response, HttpDialect, HttpVerdict};
use super::message::{validate_path, write_request, HttpMessage};
use crate::AdapterError;

#[derive(Debug, Clone)]
pub struct HttpClientConfig {
    /// Per-message read timeout.
    pub read_timeout: Duration,
}

impl Default for HttpClientConfig {
    fn default() -> Self {
        Self {
            read_timeout: Duration::from_secs(10),
        }
    }
}

/// Outcome of one `GET`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HttpTransferResult {
    /// Verified response; the reassembled body.
    Body(Vec<u8>),
    /// Conventional 404 — the session stays up.
    NotFound,
    /// Session terminated before the body was accepted.
    Terminated(TerminationReason),
}

pub struct HttpClient {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    model: Arc<MlpModel>,
    tree: Arc<DecisionTree>,
    config: HttpClientConfig,
    transcript: SessionTranscript,
    terminated: bool,
}

impl HttpClient {
    pub fn connect(
        addr: impl ToSocketAddrs,
        model: Arc<MlpModel>,
        tree: Arc<DecisionTree>,
        config: HttpClientConfig,
    ) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        stream.set_read_timeout(Some(config.read_timeout))?;
        Ok(Self {
            reader: BufReader::new(stream.try_clone()?),
            writer: stream,
            model,
            tree,
            config,
            transcript: SessionTranscript::new(),
            terminated: false,
        })
    }

    /// Requests a resource through the dialect layer.
    pub fn get(&mut self, path: &str) -> Result<(HttpTransferResult, TimingReport), AdapterError> {
        validate_path(path)?;
        let mut timing = TimingReport::default();
        let total_start = Instant::now();
        let request_line = format!("GET {path} HTTP/1.1");

        let ddm_start = Instant::now();
        let dialect_id = self.model.predict_dialect(&request_line);
        timing.ddm_ms = ddm_start.elapsed().as_secs_f64() * 1e3;
        let dialect = HttpDialect::from_id(dialect_id)
            .ok_or(AdapterError::UnknownDialect(dialect_id.get()))?;
        self.transcript.record(
            Direction::Local,
            Channel::Control,
            Phase::Idle,
            format!("request {request_line:?} uses dialect {dialect_id}"),
        );

        let result = self.exchange(&request_line, dialect, &mut timing);
        timing.handshake_ms = total_start.elapsed().as_secs_f64() * 1e3;
        timing.total_ms = timing.handshake_ms;
        if matches!(result, HttpTransferResult::Terminated(_)) {
            self.terminate();
        }
        Ok((result, timing))
    }

    /// Requests a resource over the plain (undialected) protocol: one
    /// response message, no verification. The overhead baseline.
    pub fn get_plain(
        &mut self,
        path: &str,
    ) -> Result<(HttpTransferResult, TimingReport), AdapterError> {
        validate_path(path)?;
        let mut timing = TimingReport::default();
        let total_start = Instant::now();
        let request_line = format!("GET {path} HTTP/1.1");
        let result = match self.round_trip_first(&request_line) {
            Ok(first) => match (first.status, first.body) {
                (200, Some(body)) => HttpTransferResult::Body(body),
                (404, _) => HttpTransferResult::NotFound,
                (status, _) => HttpTransferResult::Terminated(TerminationReason::Io(format!(
                    "unexpected status {status}"
                ))),
            },
            Err(reason) => HttpTransferResult::Terminated(reason),
        };
        timing.total_ms = total_start.elapsed().as_secs_f64() * 1e3;
        timing.handshake_ms = timing.total_ms;
        if matches!(result, HttpTransferResult::Terminated(_)) {
            self.terminate();
        }
        Ok((result, timing))
    }

    pub fn transcript(&self) -> &SessionTranscript {
        &self.transcript
    }

    /// Sends the request and reads message 1.
    fn round_trip_first(&mut self, request_line: &str) -> Result<HttpMessage, TerminationReason> {
        write_request(&mut self.writer, request_line)
            .map_err(|e| TerminationReason::Io(e.to_string()))?;
        self.transcript.record(
            Direction::Sent,
            Channel::Control,
            Phase::AwaitingResponse,
            request_line.to_string(),
        );
        self.read_message()
    }

    fn exchange(
        &mut self,
        request_line: &str,
        dialect: HttpDialect,
        timing: &mut TimingReport,
    ) -> HttpTransferResult {
        let first = match self.round_trip_first(request_line) {
            Ok(first) => first,
            Err(reason) => return HttpTransferResult::Terminated(reason),
        };
        if first.status == 404 {
            self.transcript.record(
                Direction::Received,
                Channel::Control,
                Phase::Idle,
                "404 — resource missing, session continues",
            );
            return HttpTransferResult::NotFound;
        }
        let mut messages = vec![first];
        while messages.len() < dialect.message_count() {
            match self.read_message() {
                Ok(message) => messages.push(message),
                Err(reason) => return HttpTransferResult::Terminated(reason),
            }
        }

        let srv_start = Instant::now();
        let verdict = http_verify_response(&messages, dialect, &self.tree);
        timing.srv_ms = srv_start.elapsed().as_secs_f64() * 1e3;
        match verdict {
            HttpVerdict::Accept(body) => {
                self.transcript.record(
                    Direction::Received,
                    Channel::Control,
                    Phase::Transferring,
                    format!("verified {} message(s), {} body bytes", messages.len(), body.len()),
                );
                HttpTransferResult::Body(body)
            }
            HttpVerdict::Reject(RejectReason::DialectMismatch) => {
                log::warn!("response shape disagrees with the agreed dialect; terminating");
                HttpTransferResult::Terminated(TerminationReason::DialectMismatch)
            }
            HttpVerdict::Reject(RejectReason::ContentMismatch) => {
                log::warn!("response contents disagree with the request; terminating");
                HttpTransferResult::Terminated(TerminationReason::ContentMismatch)
            }
        }
    }

    fn read_message(&mut self) -> Result<HttpMessage, TerminationReason> {
        match HttpMessage::read_from(&mut self.reader) {
            Ok(Some(message)) => {
                self.transcript.record(
                    Direction::Received,
                    Channel::Control,
                    Phase::AwaitingResponse,
                    format!(
                        "status {}, {}",
                        message.status,
                        match &message.body {
                            Some(body) => format!("{} body bytes", body.len()),
                            None => "no body section".to_string(),
                        }
                    ),
                );
                Ok(message)
            }
            Ok(None) => Err(TerminationReason::ConnectionClosed),
            Err(e) if e.kind() == io::ErrorKind::InvalidData => {
                // Unparsable response: the peer is not speaking the
                // protocol's framing at all, let alone the dialect.
                Err(TerminationReason::DialectMismatch)
            }
            Err(e)
                if e.kind() == io::ErrorKind::WouldBlock || e.kind() == io::ErrorKind::TimedOut =>
            {
                Err(TerminationReason::ResponseTimeout)
            }
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
                Err(TerminationReason::ConnectionClosed)
            }
            Err(e) => Err(TerminationReason::Io(e.to_string())),
        }
    }

    /// Fail closed: drop the connection and record the event.
    fn terminate(&mut self) {
        if self.terminated {
            return;
        }
        self.terminated = true;
        let _ = self.writer.shutdown(Shutdown::Both);
        self.transcript.record(
            Direction::Local,
            Channel::Control,
            Phase::Terminated,
            "session terminated by verifier",
        );
    }

    /// Timeout knob used by tests and the harness.
    pub fn read_timeout(&self) -> Duration {
        self.config.read_timeout
    }
}
