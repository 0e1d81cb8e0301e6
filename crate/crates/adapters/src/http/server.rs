//! The authenticating web server.
//!
//! Thread-per-connection; requests on one connection are served
//! sequentially. For each `GET` the server re-derives the dialect from
//! the full request line and answers in that dialect's message sequence.
//! A missing resource gets a conventional single 404, outside the
//! dialect layer.

use std::io::{self, BufReader};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use vp_ddm::MlpModel;

use super::dialect::{http_dialect_respond, HttpDialect};
use super::message::{parse_request_line, read_request, HttpMessage};
use crate::EndpointMode;

/// Conventional port for the dialected server.
pub const DEFAULT_HTTP_PORT: u16 = 8080;

#[derive(Debug, Clone)]
pub struct HttpServerConfig {
    pub bind_addr: String,
    /// 0 binds an ephemeral port; the actual one is on the handle.
    pub port: u16,
    /// Directory the served resources live in.
    pub file_root: PathBuf,
    pub mode: EndpointMode,
    pub read_timeout: Duration,
}

impl HttpServerConfig {
    pub fn new(file_root: impl Into<PathBuf>) -> Self {
        Self {
            bind_addr: "127.0.0.1".into(),
            port: 0,
            file_root: file_root.into(),
            mode: EndpointMode::Dialected,
            read_timeout: Duration::from_secs(30),
        }
    }
}

/// A running server; dropping it stops the accept loop.
pub struct HttpServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept_thread: Option<JoinHandle<()>>,
}

impl HttpServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) {
        self.stop_accepting();
    }

    fn stop_accepting(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(thread) = self.accept_thread.take() {
            let _ = thread.join();
        }
    }
}

impl Drop for HttpServerHandle {
    fn drop(&mut self) {
        self.stop_accepting();
    }
}

pub fn spawn_http_server(
    config: HttpServerConfig,
    model: Arc<MlpModel>,
) -> io::Result<HttpServerHandle> {
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
            let session_config = Arc::clone(&config);
            let session_model = Arc::clone(&model);
            std::thread::spawn(move || {
                if let Err(error) = run_session(stream, &session_config, &session_model) {
                    log::debug!("http session ended with error: {error}");
                }
            });
        }
    });

    Ok(HttpServerHandle {
        addr,
        stop,
        accept_thread: Some(accept_thread),
    })
}

fn run_session(
    stream: TcpStream,
    config: &HttpServerConfig,
    model: &MlpModel,
) -> io::Result<()> {
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(config.read_timeout))?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = stream;

    loop {
        let Some(request_line) = read_request(&mut reader)? else {
            return Ok(()); // peer closed between requests
        };
        let Ok(path) = parse_request_line(&request_line) else {
            HttpMessage::without_body(400).write_to(&mut writer)?;
            continue;
        };
        let Some(body) = read_resource(&config.file_root, path) else {
            HttpMessage {
                status: 404,
                body: Some(Vec::new()),
            }
            .write_to(&mut writer)?;
            continue;
        };
        let messages = match config.mode {
            EndpointMode::Plain => vec![HttpMessage::ok(body)],
            EndpointMode::Dialected => {
                let dialect_id = model.predict_dialect(&request_line);
                let Some(dialect) = HttpDialect::from_id(dialect_id) else {
                    log::error!("model chose dialect {dialect_id}, unknown here; dropping session");
                    return Ok(());
                };
                log::debug!("request {request_line:?} uses dialect {dialect_id}");
                http_dialect_respond(dialect, &body)
            }
        };
        for message in &messages {
            message.write_to(&mut writer)?;
        }
    }
}

/// Resolves a validated path inside the resource root. `None` when the
/// resource does not exist (or is not a regular file).
fn read_resource(root: &Path, path: &str) -> Option<Vec<u8>> {
    let candidate = root.join(path);
    if !candidate.is_file() {
        return None;
    }
    std::fs::read(candidate).ok()
}
