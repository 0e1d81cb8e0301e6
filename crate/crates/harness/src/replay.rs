//! The replay attacker.
//!
//! It answers from recordings: each script is the server-to-client
//! control stream of one genuine session, captured off the wire by a
//! passive observer. The replayer never computes a response — it can
//! only play back what it heard, which is exactly the power a replay
//! adversary has. It cannot reproduce the file transfer either: the
//! payload travels on a direct server-to-client data connection the
//! observer never saw.

use std::io::BufReader;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use crate::lines::{read_line, send_line};
use crate::HarnessError;

/// One captured session, split along the base-protocol structure:
/// greeting, PORT acknowledgement, then the dialected response lines.
#[derive(Debug, Clone)]
pub(crate) struct ReplayScript {
    /// The request the recorded session answered.
    pub(crate) request: String,
    greeting: String,
    port_ack: String,
    response_lines: Vec<String>,
}

/// Splits a captured server-to-client control stream into a script.
/// Recorded sessions issue exactly one request, so the line order is
/// fixed: greeting, PORT acknowledgement, response messages.
pub(crate) fn parse_capture(bytes: &[u8], request: &str) -> Result<ReplayScript, HarnessError> {
    let text = String::from_utf8(bytes.to_vec()).map_err(|_| {
        HarnessError::SetupFailure(format!("capture for {request:?} is not valid UTF-8"))
    })?;
    let mut lines = text
        .split("\r\n")
        .filter(|line| !line.is_empty())
        .map(String::from)
        .collect::<Vec<_>>()
        .into_iter();
    let (Some(greeting), Some(port_ack)) = (lines.next(), lines.next()) else {
        return Err(HarnessError::SetupFailure(format!(
            "capture for {request:?} is too short to be a session"
        )));
    };
    if !greeting.starts_with("220") || !port_ack.starts_with("200") {
        return Err(HarnessError::SetupFailure(format!(
            "capture for {request:?} does not look like a session: \
             {greeting:?} then {port_ack:?}"
        )));
    }
    let response_lines: Vec<String> = lines.collect();
    if response_lines.is_empty() {
        return Err(HarnessError::SetupFailure(format!(
            "capture for {request:?} contains no response lines"
        )));
    }
    Ok(ReplayScript { request: request.into(), greeting, port_ack, response_lines })
}

pub(crate) struct ReplayerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept_thread: Option<JoinHandle<()>>,
}

impl ReplayerHandle {
    pub(crate) fn addr(&self) -> SocketAddr {
        self.addr
    }
}

impl Drop for ReplayerHandle {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(thread) = self.accept_thread.take() {
            let _ = thread.join();
        }
    }
}

/// Starts a replayer that answers its `n`-th connection from
/// `scripts[schedule[n]]`. Connections beyond the schedule are dropped.
pub(crate) fn spawn_replayer(
    bind_addr: &str,
    scripts: Vec<ReplayScript>,
    schedule: Vec<usize>,
) -> Result<ReplayerHandle, HarnessError> {
    if let Some(&bad) = schedule.iter().find(|&&index| index >= scripts.len()) {
        return Err(HarnessError::SetupFailure(format!(
            "replay schedule references script {bad}, but only {} were recorded",
            scripts.len()
        )));
    }
    let listener = TcpListener::bind((bind_addr, 0))?;
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let connection_count = AtomicUsize::new(0);

    let accept_stop = Arc::clone(&stop);
    let accept_thread = std::thread::spawn(move || {
        for stream in listener.incoming() {
            if accept_stop.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = stream else { continue };
            let index = connection_count.fetch_add(1, Ordering::SeqCst);
            let Some(&script_index) = schedule.get(index) else {
                log::warn!("replayer has no script for connection {index}; dropping it");
                continue;
            };
            let script = scripts[script_index].clone();
            std::thread::spawn(move || {
                if let Err(error) = serve_session(stream, &script) {
                    log::debug!("replayer session ended: {error}");
                }
            });
        }
    });

    Ok(ReplayerHandle { addr, stop, accept_thread: Some(accept_thread) })
}

fn serve_session(mut writer: TcpStream, script: &ReplayScript) -> std::io::Result<()> {
    writer.set_nodelay(true)?;
    let mut reader = BufReader::new(writer.try_clone()?);
    send_line(&mut writer, &script.greeting)?;
    while let Some(line) = read_line(&mut reader)? {
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            // Credentials were not part of the recording; wave them through.
            Some("USER") => send_line(&mut writer, "331 User name okay, need password")?,
            Some("PASS") => send_line(&mut writer, "230 User logged in")?,
            Some("PORT") => send_line(&mut writer, &script.port_ack)?,
            Some("quit") => break,
            Some("get") => {
                for response in &script.response_lines {
                    send_line(&mut writer, response)?;
                }
                // Nothing else on tape. Hold the line and see if the
                // client proceeds; the recorded data transfer happened on
                // a channel the recording never saw.
            }
            _ => {}
        }
    }
    Ok(())
}
