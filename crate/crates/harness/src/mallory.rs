//! Mallory: a malicious server with no dialect machinery.
//!
//! It speaks enough plain FTP to get a session going — greeting, login,
//! PORT acknowledgement — but when a `get` arrives it can only guess at
//! what the client expects, because the response structure the client
//! will verify is decided by a model Mallory does not have. The three
//! reply strategies span the attacker power range: a fixed plausible
//! line, invented response shapes, and uniform guesses over the genuine
//! shape table (the strongest attacker we grant: it stole the dialect
//! schemas but still cannot predict which one a request maps to).
//!
//! After answering, Mallory keeps the connection open and waits: it has
//! no way to tell whether the client bought the reply, and hanging up
//! early would only hand the client an extra termination signal.

use std::io::BufReader;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vp_dialect::{DialectRegistry, FieldType};
use vp_ftp::PORT_OK;

use crate::lines::{read_line, send_line};
use crate::HarnessError;

/// How Mallory answers a `get`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MalloryStrategy {
    /// Always the single line `File does not exist` — a reply any plain
    /// FTP client would find perfectly reasonable.
    #[default]
    FixedMalformed,
    /// Invents a random response shape per request: one to four
    /// messages of one to four comma-separated fields each.
    RandomSchemaGuess,
    /// Picks one of the genuine response shapes uniformly at random and
    /// fills its fields with plausible values. Measures how far pure
    /// guessing gets an attacker who stole the shape table.
    RandomDialectGuess,
}

impl MalloryStrategy {
    pub(crate) fn label(self) -> &'static str {
        match self {
            MalloryStrategy::FixedMalformed => "fixed-malformed",
            MalloryStrategy::RandomSchemaGuess => "random-schema-guess",
            MalloryStrategy::RandomDialectGuess => "random-dialect-guess",
        }
    }
}

pub(crate) struct MalloryHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept_thread: Option<JoinHandle<()>>,
}

impl MalloryHandle {
    pub(crate) fn addr(&self) -> SocketAddr {
        self.addr
    }
}

impl Drop for MalloryHandle {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(thread) = self.accept_thread.take() {
            let _ = thread.join();
        }
    }
}

/// Starts Mallory on an ephemeral port. `shapes` hands the attacker the
/// genuine shape table and is required for [`MalloryStrategy::RandomDialectGuess`].
pub(crate) fn spawn_mallory(
    bind_addr: &str,
    strategy: MalloryStrategy,
    seed: u64,
    shapes: Option<Arc<DialectRegistry>>,
) -> Result<MalloryHandle, HarnessError> {
    if strategy == MalloryStrategy::RandomDialectGuess && shapes.is_none() {
        return Err(HarnessError::SetupFailure(
            "the dialect-guess strategy needs the shape table".into(),
        ));
    }
    let listener = TcpListener::bind((bind_addr, 0))?;
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let rng = Arc::new(Mutex::new(ChaCha8Rng::seed_from_u64(seed)));

    let accept_stop = Arc::clone(&stop);
    let accept_thread = std::thread::spawn(move || {
        for stream in listener.incoming() {
            if accept_stop.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = stream else { continue };
            let rng = Arc::clone(&rng);
            let shapes = shapes.clone();
            std::thread::spawn(move || {
                if let Err(error) = serve_session(stream, strategy, &rng, shapes.as_deref()) {
                    log::debug!("mallory session ended: {error}");
                }
            });
        }
    });

    Ok(MalloryHandle { addr, stop, accept_thread: Some(accept_thread) })
}

fn serve_session(
    mut writer: TcpStream,
    strategy: MalloryStrategy,
    rng: &Mutex<ChaCha8Rng>,
    shapes: Option<&DialectRegistry>,
) -> std::io::Result<()> {
    writer.set_nodelay(true)?;
    let mut reader = BufReader::new(writer.try_clone()?);
    send_line(&mut writer, "220 Service ready")?;
    while let Some(line) = read_line(&mut reader)? {
        let mut tokens = line.split_whitespace();
        match (tokens.next(), tokens.next()) {
            (Some("USER"), _) => send_line(&mut writer, "331 User name okay, need password")?,
            (Some("PASS"), _) => send_line(&mut writer, "230 User logged in")?,
            (Some("PORT"), _) => send_line(&mut writer, PORT_OK)?,
            (Some("quit"), _) => {
                send_line(&mut writer, "221 Goodbye")?;
                break;
            }
            (Some("get"), Some(filename)) => {
                let mut rng = rng.lock().expect("mallory rng lock");
                for reply in reply_lines(strategy, &mut rng, shapes, filename, "get") {
                    send_line(&mut writer, &reply)?;
                }
                // Keep reading: the next thing Mallory hears is either a
                // transfer acknowledgement (its reply got through) or EOF.
            }
            _ => send_line(&mut writer, "500 Syntax error in command")?,
        }
    }
    Ok(())
}

fn reply_lines(
    strategy: MalloryStrategy,
    rng: &mut ChaCha8Rng,
    shapes: Option<&DialectRegistry>,
    filename: &str,
    command: &str,
) -> Vec<String> {
    match strategy {
        MalloryStrategy::FixedMalformed => vec!["File does not exist".into()],
        MalloryStrategy::RandomSchemaGuess => {
            let messages = rng.gen_range(1..=4);
            (0..messages)
                .map(|_| {
                    let fields = rng.gen_range(1..=4);
                    let fields: Vec<String> = (0..fields)
                        .map(|_| {
                            if rng.gen_bool(0.5) {
                                rng.gen_range(-1..=4096i64).to_string()
                            } else {
                                plausible_text(rng, filename, command)
                            }
                        })
                        .collect();
                    fields.join(",")
                })
                .collect()
        }
        MalloryStrategy::RandomDialectGuess => {
            let registry = shapes.expect("checked at spawn");
            let pick = rng.gen_range(0..registry.len());
            let dialect = registry.iter().nth(pick).expect("index in range");
            dialect
                .schema()
                .packets()
                .iter()
                .map(|packet| {
                    let fields: Vec<String> = packet
                        .fields()
                        .iter()
                        .map(|field| match field.field_type() {
                            FieldType::Int => rng.gen_range(-1..=4096i64).to_string(),
                            FieldType::Str => plausible_text(rng, filename, command),
                        })
                        .collect();
                    fields.join(",")
                })
                .collect()
        }
    }
}

/// Values a schema-stealing attacker would plausibly put in a text
/// field: the outcome phrases it has seen on the wire and the request
/// echoes it can compute.
fn plausible_text(rng: &mut ChaCha8Rng, filename: &str, command: &str) -> String {
    match rng.gen_range(0..4) {
        0 => "File exists".into(),
        1 => "File does not exist".into(),
        2 => filename.into(),
        _ => command.into(),
    }
}
