//! The verifying client.
//!
//! For each `get` the client predicts the dialect locally, sends the
//! plain request, collects exactly the expected number of response
//! messages, and verifies their structure and contents. Any mismatch
//! terminates the session on the spot — both channels close and no file
//! bytes are accepted.

use std::io::{self, BufReader, Read};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::Arc;
use std::time::{Duration, Instant};

use vp_dialect::{parse_response, RequestContext, WireMessage};
use vp_srv::{DecisionTree, RejectReason, ResponseOutcome, Verdict};

use vp_dialect::{
    Channel, Direction, Phase, SessionTranscript, TerminationReason, TimingReport,
};

use crate::config::DialectEngine;
use crate::server::{PORT_OK, READY_ACK, RECEIVED_ACK};
use crate::wire::{is_timeout, read_line, send_line};
use crate::FtpError;

/// Outcome of one `get`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransferResult {
    /// Verified response and complete transfer.
    Bytes(Vec<u8>),
    /// Verified response stating the file does not exist.
    NotFound,
    /// Session terminated before any file bytes moved.
    Terminated(TerminationReason),
}

#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub credentials: Option<(String, String)>,
    /// Per-read timeout on the control channel. Must comfortably exceed
    /// the slowest dialect's per-message delay.
    pub read_timeout: Duration,
}

impl Default for ClientConfig {
    fn default() -> Self {
        Self {
            credentials: None,
            read_timeout: Duration::from_secs(10),
        }
    }
}

/// One authenticated control-channel session.
pub struct FtpClient {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    config: ClientConfig,
    engine: Arc<DialectEngine>,
    tree: Arc<DecisionTree>,
    transcript: SessionTranscript,
    terminated: bool,
}

impl FtpClient {
    /// Connects, reads the greeting, and logs in when credentials are
    /// configured.
    pub fn connect(
        addr: SocketAddr,
        config: ClientConfig,
        engine: Arc<DialectEngine>,
        tree: Arc<DecisionTree>,
    ) -> Result<Self, FtpError> {
        let writer = TcpStream::connect(addr)?;
        writer.set_nodelay(true)?;
        writer.set_read_timeout(Some(config.read_timeout))?;
        let reader = BufReader::new(writer.try_clone()?);
        let mut client = Self {
            reader,
            writer,
            config,
            engine,
            tree,
            transcript: SessionTranscript::new(),
            terminated: false,
        };
        let greeting = client.expect_line(Phase::AwaitingLogin)?;
        if !greeting.starts_with("220") {
            return Err(FtpError::UnexpectedReply(greeting));
        }
        client.login()?;
        Ok(client)
    }

    fn login(&mut self) -> Result<(), FtpError> {
        let Some((user, password)) = self.config.credentials.clone() else {
            return Ok(());
        };
        self.send(Phase::AwaitingLogin, &format!("USER {user}"))?;
        let reply = self.expect_line(Phase::AwaitingLogin)?;
        if !reply.starts_with("331") {
            return Err(FtpError::LoginRejected(reply));
        }
        self.send(Phase::AwaitingLogin, &format!("PASS {password}"))?;
        let reply = self.expect_line(Phase::AwaitingLogin)?;
        if !reply.starts_with("230") {
            return Err(FtpError::LoginRejected(reply));
        }
        Ok(())
    }

    /// Runs one dialected `get` end to end. Peer misbehavior is a
    /// [`TransferResult::Terminated`], not an `Err`; after termination
    /// the session is unusable.
    pub fn get(&mut self, request_line: &str) -> (TransferResult, TimingReport) {
        let mut timing = TimingReport::default();
        let result = self.get_inner(request_line, &mut timing);
        if matches!(result, TransferResult::Terminated(_)) {
            self.terminate();
        }
        (result, timing)
    }

    fn get_inner(&mut self, request_line: &str, timing: &mut TimingReport) -> TransferResult {
        let Some(filename) = parse_get_request(request_line) else {
            return TransferResult::Terminated(TerminationReason::Io(format!(
                "client-side request validation failed for {request_line:?}"
            )));
        };
        if self.terminated {
            return TransferResult::Terminated(TerminationReason::ConnectionClosed);
        }

        let total_start = Instant::now();
        let ddm_start = Instant::now();
        let expected = self.engine.model.predict_dialect(request_line);
        timing.ddm_ms = ddm_start.elapsed().as_secs_f64() * 1e3;
        let Ok(dialect) = self.engine.registry.get(expected) else {
            return TransferResult::Terminated(TerminationReason::Io(format!(
                "model predicted {expected}, which the registry lacks"
            )));
        };
        let expected_messages = dialect.schema().packets().len();
        log::debug!("{request_line:?}: using dialect {expected}");
        self.transcript.record(
            Direction::Local,
            Channel::Control,
            Phase::AwaitingResponse,
            format!("using dialect {expected}"),
        );

        // Advertise the data port before the request, as the handshake
        // transcript prescribes.
        let data_listener = match self.advertise_data_port() {
            Ok(listener) => listener,
            Err(error) => return self.io_terminated(error.into()),
        };

        if let Err(error) = self.send(Phase::AwaitingResponse, request_line) {
            return self.io_terminated(error);
        }

        let mut messages = Vec::with_capacity(expected_messages);
        for _ in 0..expected_messages {
            match self.read_response_line() {
                Ok(line) => messages.push(WireMessage::from_line_bytes(line.as_bytes())),
                Err(reason) => return TransferResult::Terminated(reason),
            }
        }

        let srv_start = Instant::now();
        let structure = parse_response(&messages).expect("collected a nonzero message count");
        let ctx = RequestContext::new("get", filename, None);
        let verdict = match vp_srv::verify_response(
            &self.tree,
            &self.engine.registry,
            &structure,
            expected,
            &ctx,
        ) {
            Ok(verdict) => verdict,
            Err(error) => {
                return TransferResult::Terminated(TerminationReason::Io(error.to_string()))
            }
        };
        timing.srv_ms = srv_start.elapsed().as_secs_f64() * 1e3;
        timing.handshake_ms = total_start.elapsed().as_secs_f64() * 1e3;

        let outcome = match verdict {
            Verdict::Accept(outcome) => outcome,
            Verdict::Reject(RejectReason::DialectMismatch) => {
                log::warn!("dialect mismatch: the peer did not answer in dialect {expected}");
                return TransferResult::Terminated(TerminationReason::DialectMismatch);
            }
            Verdict::Reject(RejectReason::ContentMismatch) => {
                log::warn!("content mismatch in a structurally valid dialect {expected} reply");
                return TransferResult::Terminated(TerminationReason::ContentMismatch);
            }
        };

        let result = match outcome {
            ResponseOutcome::FileMissing => TransferResult::NotFound,
            ResponseOutcome::FileFound => {
                if let Err(error) = self.send(Phase::Transferring, READY_ACK) {
                    return self.io_terminated(error);
                }
                match self.receive_file(&data_listener) {
                    Ok(bytes) => {
                        if let Err(error) = self.send(Phase::Transferring, RECEIVED_ACK) {
                            return self.io_terminated(error);
                        }
                        TransferResult::Bytes(bytes)
                    }
                    Err(reason) => return TransferResult::Terminated(reason),
                }
            }
        };
        timing.total_ms = total_start.elapsed().as_secs_f64() * 1e3;
        result
    }

    /// Runs one `get` against a plain (undialected) server — the overhead
    /// baseline. No prediction, no verification.
    pub fn get_plain(&mut self, request_line: &str) -> (TransferResult, TimingReport) {
        let mut timing = TimingReport::default();
        let total_start = Instant::now();
        let result = self.get_plain_inner(request_line);
        timing.total_ms = total_start.elapsed().as_secs_f64() * 1e3;
        if matches!(result, TransferResult::Terminated(_)) {
            self.terminate();
        }
        (result, timing)
    }

    fn get_plain_inner(&mut self, request_line: &str) -> TransferResult {
        let data_listener = match self.advertise_data_port() {
            Ok(listener) => listener,
            Err(error) => return self.io_terminated(error.into()),
        };
        if let Err(error) = self.send(Phase::AwaitingResponse, request_line) {
            return self.io_terminated(error);
        }
        // The preliminary line tells us whether a data connection follows.
        match self.read_response_line() {
            Ok(line) if line.starts_with("150") => {}
            Ok(line) if line.starts_with("550") => return TransferResult::NotFound,
            Ok(line) => {
                return TransferResult::Terminated(TerminationReason::Io(format!(
                    "unexpected preliminary line {line:?}"
                )))
            }
            Err(reason) => return TransferResult::Terminated(reason),
        }
        let bytes = match self.receive_file(&data_listener) {
            Ok(bytes) => bytes,
            Err(reason) => return TransferResult::Terminated(reason),
        };
        match self.read_response_line() {
            Ok(line) if line.starts_with("226") => TransferResult::Bytes(bytes),
            Ok(line) => TransferResult::Terminated(TerminationReason::Io(format!(
                "unexpected completion line {line:?}"
            ))),
            Err(reason) => TransferResult::Terminated(reason),
        }
    }

    /// Sends one raw control line and returns the single reply line —
    /// for exercising server-side syntax handling directly.
    pub fn raw_command(&mut self, line: &str) -> Result<String, FtpError> {
        self.send(Phase::Idle, line)?;
        self.expect_line(Phase::Idle)
    }

    pub fn quit(mut self) -> Result<(), FtpError> {
        self.send(Phase::Terminated, "quit")?;
        let _ = self.expect_line(Phase::Terminated);
        Ok(())
    }

    pub fn transcript(&self) -> &SessionTranscript {
        &self.transcript
    }

    fn advertise_data_port(&mut self) -> io::Result<TcpListener> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let port = listener.local_addr()?.port();
        send_line(&mut self.writer, &format!("PORT {port}"))?;
        self.transcript
            .record(Direction::Sent, Channel::Control, Phase::Idle, format!("PORT {port}"));
        let reply = read_line(&mut self.reader)?.ok_or(io::ErrorKind::UnexpectedEof)?;
        self.transcript
            .record(Direction::Received, Channel::Control, Phase::Idle, &reply);
        if reply != PORT_OK {
            return Err(io::Error::other(format!("PORT rejected: {reply:?}")));
        }
        Ok(listener)
    }

    fn receive_file(&mut self, listener: &TcpListener) -> Result<Vec<u8>, TerminationReason> {
        let stream = accept_with_deadline(listener, self.config.read_timeout)
            .map_err(|e| self.classify_io(e))?;
        let mut bytes = Vec::new();
        let mut stream = stream;
        stream
            .set_read_timeout(Some(self.config.read_timeout))
            .and_then(|()| stream.read_to_end(&mut bytes))
            .map_err(|e| self.classify_io(e))?;
        self.transcript.record(
            Direction::Received,
            Channel::Data,
            Phase::Transferring,
            format!("{} bytes", bytes.len()),
        );
        Ok(bytes)
    }

    fn read_response_line(&mut self) -> Result<String, TerminationReason> {
        match read_line(&mut self.reader) {
            Ok(Some(line)) => {
                self.transcript.record(
                    Direction::Received,
                    Channel::Control,
                    Phase::AwaitingResponse,
                    &line,
                );
                Ok(line)
            }
            Ok(None) => Err(TerminationReason::ConnectionClosed),
            Err(error) => Err(self.classify_io(error)),
        }
    }

    fn classify_io(&self, error: io::Error) -> TerminationReason {
        if is_timeout(&error) {
            TerminationReason::ResponseTimeout
        } else {
            TerminationReason::Io(error.to_string())
        }
    }

    fn io_terminated(&mut self, error: FtpError) -> TransferResult {
        let reason = match error {
            FtpError::Io(io_error) => self.classify_io(io_error),
            other => TerminationReason::Io(other.to_string()),
        };
        TransferResult::Terminated(reason)
    }

    /// Fail-closed: drop both directions of the control channel now.
    fn terminate(&mut self) {
        self.terminated = true;
        let _ = self.writer.shutdown(std::net::Shutdown::Both);
        self.transcript.record(
            Direction::Sent,
            Channel::Control,
            Phase::Terminated,
            "<session terminated>",
        );
    }

    fn send(&mut self, phase: Phase, line: &str) -> Result<(), FtpError> {
        send_line(&mut self.writer, line)?;
        self.transcript
            .record(Direction::Sent, Channel::Control, phase, line);
        Ok(())
    }

    fn expect_line(&mut self, phase: Phase) -> Result<String, FtpError> {
        let line = read_line(&mut self.reader)?
            .ok_or_else(|| io::Error::from(io::ErrorKind::UnexpectedEof))?;
        self.transcript
            .record(Direction::Received, Channel::Control, phase, &line);
        Ok(line)
    }
}

/// Client-side request validation: `get <filename>`, one token each.
fn parse_get_request(line: &str) -> Option<&str> {
    let mut tokens = line.split_whitespace();
    match (tokens.next(), tokens.next(), tokens.next()) {
        (Some("get"), Some(filename), None) => Some(filename),
        _ => None,
    }
}

/// `TcpListener` has no native accept timeout; poll in non-blocking mode.
fn accept_with_deadline(listener: &TcpListener, timeout: Duration) -> io::Result<TcpStream> {
    listener.set_nonblocking(true)?;
    let deadline = Instant::now() + timeout;
    loop {
        match listener.accept() {
            Ok((stream, _)) => {
                stream.set_nonblocking(false)?;
                return Ok(stream);
            }
            Err(error) if error.kind() == io::ErrorKind::WouldBlock => {
                if Instant::now() >= deadline {
                    return Err(io::ErrorKind::TimedOut.into());
                }
                std::thread::sleep(Duration::from_millis(1));
            }
            Err(error) => return Err(error),
        }
    }
}
