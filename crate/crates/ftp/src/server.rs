//! The dialected file server.
//!
//! Thread-per-connection over a shared immutable [`DialectEngine`]. For
//! each `get` the server re-derives the dialect from the raw request
//! bytes — no session-level caching, so every request is authenticated
//! afresh — renders that dialect's response messages, and only after the
//! client's acknowledgement opens the data channel toward the
//! client-advertised port.

use std::io::{self, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use vp_dialect::{FieldSemantic, RenderError, RequestContext, WireMessage};

use crate::config::{DialectEngine, ServerConfig, ServerMode};
use crate::wire::{read_line, send_line};

pub const GREETING: &str = "220 Service ready";
pub const PORT_OK: &str = "200 PORT command successful";
pub const SYNTAX_ERROR: &str = "500 Syntax error in command";
pub const INVALID_FILENAME: &str = "500 Invalid filename";
pub const PLAIN_NOT_FOUND: &str = "550 File not found";
pub const PLAIN_OPENING: &str = "150 Opening data connection";
pub const PLAIN_TRANSFER_DONE: &str = "226 Transfer completed";
pub const READY_ACK: &str = "Ready to receive the file.";
pub const RECEIVED_ACK: &str = "Connection closed, file received.";

/// A running server; dropping it (or calling [`ServerHandle::shutdown`])
/// stops the accept loop.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept_thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) {
        self.stop_accepting();
    }

    fn stop_accepting(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the blocking accept with a throwaway connection.
        let _ = TcpStream::connect(self.addr);
        if let Some(thread) = self.accept_thread.take() {
            let _ = thread.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop_accepting();
    }
}

/// Binds and starts serving in background threads. Port 0 in the config
/// binds an ephemeral port; the actual address is on the handle.
pub fn spawn_server(config: ServerConfig, engine: Arc<DialectEngine>) -> io::Result<ServerHandle> {
    let listener = TcpListener::bind((config.bind_addr.as_str(), config.port))?;
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let accept_stop = Arc::clone(&stop);
    let config = Arc::new(config);

    let accept_thread = std::thread::spawn(move || {
        for incoming in listener.incoming() {
            if accept_stop.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = incoming else { continue };
            let session_engine = Arc::clone(&engine);
            let session_config = Arc::clone(&config);
            std::thread::spawn(move || {
                if let Err(error) = run_session(stream, &session_config, &session_engine) {
                    log::debug!("session ended with error: {error}");
                }
            });
        }
    });

    Ok(ServerHandle {
        addr,
        stop,
        accept_thread: Some(accept_thread),
    })
}

fn run_session(
    stream: TcpStream,
    config: &ServerConfig,
    engine: &DialectEngine,
) -> io::Result<()> {
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(config.read_timeout))?;
    let peer = stream.peer_addr()?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = stream;
    send_line(&mut writer, GREETING)?;

    if let Some((user, password)) = &config.credentials {
        if !login_gate(&mut reader, &mut writer, user, password)? {
            return Ok(());
        }
    }

    let mut data_port: Option<u16> = None;
    loop {
        let Some(line) = read_line(&mut reader)? else {
            return Ok(());
        };
        if line == "quit" {
            return send_line(&mut writer, "221 Goodbye");
        }
        if let Some(rest) = line.strip_prefix("PORT ") {
            match rest.trim().parse::<u16>() {
                Ok(port) if port != 0 => {
                    data_port = Some(port);
                    send_line(&mut writer, PORT_OK)?;
                }
                _ => send_line(&mut writer, SYNTAX_ERROR)?,
            }
            continue;
        }

        let Some(filename) = parse_get(&line) else {
            send_line(&mut writer, SYNTAX_ERROR)?;
            continue;
        };
        let file = read_file(&config.file_root, filename);
        let keep_session = match config.mode {
            ServerMode::Dialected => serve_dialected(
                &mut reader,
                &mut writer,
                engine,
                config,
                peer,
                &line,
                filename,
                file,
                data_port.take(),
            )?,
            ServerMode::Plain => {
                serve_plain(&mut writer, peer, file, data_port.take())?;
                true
            }
        };
        if !keep_session {
            return Ok(());
        }
    }
}

fn login_gate(
    reader: &mut BufReader<TcpStream>,
    writer: &mut TcpStream,
    user: &str,
    password: &str,
) -> io::Result<bool> {
    let Some(line) = read_line(reader)? else {
        return Ok(false);
    };
    let Some(given_user) = line.strip_prefix("USER ") else {
        send_line(writer, "530 Please login with USER and PASS")?;
        return Ok(false);
    };
    send_line(writer, "331 Password required")?;
    let Some(line) = read_line(reader)? else {
        return Ok(false);
    };
    let Some(given_password) = line.strip_prefix("PASS ") else {
        send_line(writer, "530 Please login with USER and PASS")?;
        return Ok(false);
    };
    if given_user == user && given_password == password {
        send_line(writer, "230 Login successful")?;
        Ok(true)
    } else {
        send_line(writer, "530 Login incorrect")?;
        Ok(false)
    }
}

/// `get <filename>` — exactly two tokens; anything else is a syntax error.
fn parse_get(line: &str) -> Option<&str> {
    let mut tokens = line.split_whitespace();
    match (tokens.next(), tokens.next(), tokens.next()) {
        (Some("get"), Some(filename), None) => Some(filename),
        _ => None,
    }
}

fn read_file(root: &Path, filename: &str) -> Option<Vec<u8>> {
    // The dialect layer's filename charset already excludes separators;
    // this guard covers the plain baseline too.
    if filename.contains(['/', '\\']) {
        return None;
    }
    let path = root.join(filename);
    std::fs::metadata(&path)
        .ok()
        .filter(|m| m.is_file())
        .and_then(|_| std::fs::read(path).ok())
}

/// Serves one dialected `get`. Returns whether the session stays open.
#[allow(clippy::too_many_arguments)]
fn serve_dialected(
    reader: &mut BufReader<TcpStream>,
    writer: &mut TcpStream,
    engine: &DialectEngine,
    config: &ServerConfig,
    peer: SocketAddr,
    request_line: &str,
    filename: &str,
    file: Option<Vec<u8>>,
    data_port: Option<u16>,
) -> io::Result<bool> {
    let ddm_start = Instant::now();
    let dialect_id = engine.model.predict_dialect(request_line);
    let ddm_ms = ddm_start.elapsed().as_secs_f64() * 1e3;
    let Ok(dialect) = engine.registry.get(dialect_id) else {
        log::error!("model predicted {dialect_id}, which the registry lacks");
        return Ok(false);
    };
    log::debug!("request {request_line:?} -> dialect {dialect_id} ({ddm_ms:.3} ms)");

    let ctx = RequestContext::new(
        "get",
        filename,
        file.as_ref().map(|bytes| bytes.len() as u64),
    );
    let rendered = match file {
        Some(_) => dialect.render_response(&ctx),
        None => dialect.render_not_found(&ctx),
    };
    let messages: Vec<WireMessage> = match rendered {
        Ok(messages) => messages,
        Err(RenderError::InvalidContext(_)) => {
            send_line(writer, INVALID_FILENAME)?;
            return Ok(true);
        }
        Err(RenderError::MissingFileSize) => unreachable!("size is present when the file is"),
    };

    let per_message_delay = if config.apply_template_delays {
        dialect.response_delay() / messages.len() as u32
    } else {
        Duration::ZERO
    };
    for message in &messages {
        if !per_message_delay.is_zero() {
            std::thread::sleep(per_message_delay);
        }
        send_line(writer, message.payload())?;
    }

    let Some(bytes) = file else {
        // Nothing to transfer; the dialected reply already said so.
        return Ok(true);
    };

    // The client speaks only after verifying; silence or anything but
    // the acknowledgement means it rejected us — close with it.
    match read_line(reader) {
        Ok(Some(ack)) if ack == READY_ACK => {}
        Ok(_) | Err(_) => return Ok(false),
    }
    let Some(port) = data_port else {
        log::warn!("client acknowledged without advertising a data port");
        return Ok(false);
    };
    let mut data = TcpStream::connect((peer.ip(), port))?;
    data.write_all(&bytes)?;
    drop(data);
    log::debug!("sent {} bytes of {filename} to {peer}", bytes.len());

    match read_line(reader) {
        Ok(Some(ack)) if ack == RECEIVED_ACK => {}
        Ok(_) | Err(_) => return Ok(false),
    }

    // A closing-notice dialect ends the session after the transaction.
    let closes = dialect
        .schema()
        .packets()
        .iter()
        .flat_map(|p| p.fields())
        .any(|f| *f == FieldSemantic::ClosedNotice);
    Ok(!closes)
}

/// The undialected baseline: a preliminary mark, the data, a completion
/// line.
fn serve_plain(
    writer: &mut TcpStream,
    peer: SocketAddr,
    file: Option<Vec<u8>>,
    data_port: Option<u16>,
) -> io::Result<()> {
    let Some(bytes) = file else {
        return send_line(writer, PLAIN_NOT_FOUND);
    };
    let Some(port) = data_port else {
        return send_line(writer, SYNTAX_ERROR);
    };
    send_line(writer, PLAIN_OPENING)?;
    let mut data = TcpStream::connect((peer.ip(), port))?;
    data.write_all(&bytes)?;
    drop(data);
    send_line(writer, PLAIN_TRANSFER_DONE)
}
