//! The verifying broker.
//!
//! Thread-per-connection over a shared immutable engine. Every publish is
//! authenticated afresh: the broker re-derives the dialect from the topic
//! inside the packets, verifies the sequence, stores the payload and acks
//! on accept, and silently disconnects on reject — an attacker gets no
//! acknowledgement to learn from.

use std::io::{self, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use vp_ddm::MlpModel;
use vp_srv::DecisionTree;

use super::dialect::{mqtt_broker_verify, MqttVerdict};
use super::packet::{decode_plain_body, read_raw_packet, MqttPublish, PUBACK_BYTES, PUBLISH_CONTROL};
use crate::EndpointMode;

/// Conventional port for the dialected broker.
pub const DEFAULT_MQTT_PORT: u16 = 1884;

/// Everything the broker needs to verify a publish.
pub struct MqttEngine {
    pub model: MlpModel,
    pub tree: DecisionTree,
}

#[derive(Debug, Clone)]
pub struct BrokerConfig {
    pub bind_addr: String,
    /// 0 binds an ephemeral port; the actual one is on the handle.
    pub port: u16,
    pub mode: EndpointMode,
    pub read_timeout: Duration,
}

impl Default for BrokerConfig {
    fn default() -> Self {
        Self {
            bind_addr: "127.0.0.1".into(),
            port: 0,
            mode: EndpointMode::Dialected,
            read_timeout: Duration::from_secs(30),
        }
    }
}

/// A running broker; dropping it stops the accept loop. Accepted
/// (topic, message) pairs are retrievable for inspection.
pub struct BrokerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept_thread: Option<JoinHandle<()>>,
    store: Arc<Mutex<Vec<(String, String)>>>,
}

impl BrokerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Snapshot of every accepted publish, in arrival order.
    pub fn published(&self) -> Vec<(String, String)> {
        self.store.lock().expect("broker store lock").clone()
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

impl Drop for BrokerHandle {
    fn drop(&mut self) {
        self.stop_accepting();
    }
}

pub fn spawn_mqtt_broker(
    config: BrokerConfig,
    engine: Arc<MqttEngine>,
) -> io::Result<BrokerHandle> {
    let listener = TcpListener::bind((config.bind_addr.as_str(), config.port))?;
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let accept_stop = Arc::clone(&stop);
    let store = Arc::new(Mutex::new(Vec::new()));
    let accept_store = Arc::clone(&store);
    let config = Arc::new(config);

    let accept_thread = std::thread::spawn(move || {
        for incoming in listener.incoming() {
            if accept_stop.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = incoming else { continue };
            let session_engine = Arc::clone(&engine);
            let session_config = Arc::clone(&config);
            let session_store = Arc::clone(&accept_store);
            std::thread::spawn(move || {
                if let Err(error) =
                    run_session(stream, &session_config, &session_engine, &session_store)
                {
                    log::debug!("broker session ended with error: {error}");
                }
            });
        }
    });

    Ok(BrokerHandle {
        addr,
        stop,
        accept_thread: Some(accept_thread),
        store,
    })
}

fn run_session(
    stream: TcpStream,
    config: &BrokerConfig,
    engine: &MqttEngine,
    store: &Mutex<Vec<(String, String)>>,
) -> io::Result<()> {
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(config.read_timeout))?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = stream;

    loop {
        let Some(publish) = next_publish_body(&mut reader)? else {
            return Ok(()); // peer closed between publishes
        };
        let accepted = match config.mode {
            EndpointMode::Dialected => {
                handle_dialected(&mut reader, engine, store, &publish)?
            }
            EndpointMode::Plain => match decode_plain_body(&publish) {
                Ok(pair) => {
                    store.lock().expect("broker store lock").push(pair);
                    true
                }
                Err(error) => {
                    log::debug!("plain publish rejected: {error}");
                    false
                }
            },
        };
        if !accepted {
            return Ok(()); // disconnect without acking
        }
        writer.write_all(&PUBACK_BYTES)?;
        writer.flush()?;
    }
}

/// Reads the next PUBLISH body. Non-PUBLISH packets end the session.
fn next_publish_body(reader: &mut impl Read) -> io::Result<Option<Vec<u8>>> {
    match read_raw_packet(reader)? {
        None => Ok(None),
        Some((PUBLISH_CONTROL, body)) => Ok(Some(body)),
        Some((control, _)) => {
            log::debug!("unexpected control byte {control:#04x}; dropping session");
            Ok(None)
        }
    }
}

/// Collects the full packet sequence for one publish (two packets when
/// the first carries a lone topic field) and verifies it. Returns whether
/// the publish was accepted.
fn handle_dialected(
    reader: &mut impl Read,
    engine: &MqttEngine,
    store: &Mutex<Vec<(String, String)>>,
    first_body: &[u8],
) -> io::Result<bool> {
    let Ok(first) = MqttPublish::decode_body(first_body) else {
        log::debug!("publish body failed the field scan");
        return Ok(false);
    };
    let mut sequence = vec![first];
    if sequence[0].fields().len() == 1 {
        let Some(second_body) = next_publish_body(reader)? else {
            return Ok(false); // peer vanished mid-sequence
        };
        let Ok(second) = MqttPublish::decode_body(&second_body) else {
            log::debug!("second publish body failed the field scan");
            return Ok(false);
        };
        sequence.push(second);
    }
    match mqtt_broker_verify(&sequence, &engine.model, &engine.tree) {
        MqttVerdict::Accept { topic, message } => {
            store
                .lock()
                .expect("broker store lock")
                .push((topic, message));
            Ok(true)
        }
        MqttVerdict::Reject(reason) => {
            log::warn!("publish rejected ({reason:?}); disconnecting client");
            Ok(false)
        }
    }
}
