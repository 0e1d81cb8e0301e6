//! Eve: a transparent TCP rerouting proxy.
//!
//! Accepts connections and pumps bytes verbatim to a fixed target, so
//! the client cannot tell from the transport whether it reached the
//! genuine server or a substitute. The proxy counts forwarded bytes in
//! both directions and can capture each connection's server-to-client
//! stream — which is exactly what a replay attacker gets to record.
//!
//! Only the control connection passes through: the file transfer runs
//! on a direct data connection the server opens back to the client, so
//! a control-channel observer never sees payload bytes.

use std::io::{Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

pub(crate) struct ProxyHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept_thread: Option<JoinHandle<()>>,
    upstream_bytes: Arc<AtomicU64>,
    downstream_bytes: Arc<AtomicU64>,
    captures: Arc<Mutex<Vec<Arc<Mutex<Vec<u8>>>>>>,
}

impl ProxyHandle {
    pub(crate) fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// (client-to-server, server-to-client) byte totals so far.
    pub(crate) fn bytes_forwarded(&self) -> (u64, u64) {
        (
            self.upstream_bytes.load(Ordering::Relaxed),
            self.downstream_bytes.load(Ordering::Relaxed),
        )
    }

    /// Server-to-client captures, one per accepted connection in accept
    /// order. Empty unless the proxy was spawned recording.
    pub(crate) fn captures(&self) -> Vec<Vec<u8>> {
        let slots = self.captures.lock().expect("capture list lock");
        slots.iter().map(|slot| slot.lock().expect("capture lock").clone()).collect()
    }
}

impl Drop for ProxyHandle {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the blocking accept so the thread sees the flag.
        let _ = TcpStream::connect(self.addr);
        if let Some(thread) = self.accept_thread.take() {
            let _ = thread.join();
        }
    }
}

/// Starts forwarding `bind_addr:ephemeral` to `target`. With
/// `record_downstream` set, every connection's server-to-client bytes
/// are kept for later replay.
pub(crate) fn spawn_proxy(
    bind_addr: &str,
    target: SocketAddr,
    record_downstream: bool,
) -> std::io::Result<ProxyHandle> {
    let listener = TcpListener::bind((bind_addr, 0))?;
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let upstream_bytes = Arc::new(AtomicU64::new(0));
    let downstream_bytes = Arc::new(AtomicU64::new(0));
    let captures: Arc<Mutex<Vec<Arc<Mutex<Vec<u8>>>>>> = Arc::new(Mutex::new(Vec::new()));

    let accept_stop = Arc::clone(&stop);
    let accept_up = Arc::clone(&upstream_bytes);
    let accept_down = Arc::clone(&downstream_bytes);
    let accept_captures = Arc::clone(&captures);
    let accept_thread = std::thread::spawn(move || {
        for inbound in listener.incoming() {
            if accept_stop.load(Ordering::SeqCst) {
                break;
            }
            let Ok(inbound) = inbound else { continue };
            let outbound = match TcpStream::connect(target) {
                Ok(stream) => stream,
                Err(error) => {
                    log::warn!("proxy could not reach {target}: {error}");
                    continue;
                }
            };
            let _ = inbound.set_nodelay(true);
            let _ = outbound.set_nodelay(true);
            let capture = record_downstream.then(|| {
                let slot = Arc::new(Mutex::new(Vec::new()));
                accept_captures.lock().expect("capture list lock").push(Arc::clone(&slot));
                slot
            });
            let (Ok(inbound_clone), Ok(outbound_clone)) =
                (inbound.try_clone(), outbound.try_clone())
            else {
                continue;
            };
            let up = Arc::clone(&accept_up);
            let down = Arc::clone(&accept_down);
            std::thread::spawn(move || pump(inbound_clone, outbound_clone, up, None));
            std::thread::spawn(move || pump(outbound, inbound, down, capture));
        }
    });

    Ok(ProxyHandle {
        addr,
        stop,
        accept_thread: Some(accept_thread),
        upstream_bytes,
        downstream_bytes,
        captures,
    })
}

/// Copies bytes one way until EOF or error, then half-closes the
/// destination so the EOF propagates.
fn pump(
    mut from: TcpStream,
    mut to: TcpStream,
    counter: Arc<AtomicU64>,
    capture: Option<Arc<Mutex<Vec<u8>>>>,
) {
    let mut buf = [0u8; 4096];
    loop {
        match from.read(&mut buf) {
            Ok(0) | Err(_) => break,
            Ok(n) => {
                counter.fetch_add(n as u64, Ordering::Relaxed);
                if let Some(slot) = &capture {
                    slot.lock().expect("capture lock").extend_from_slice(&buf[..n]);
                }
                if to.write_all(&buf[..n]).is_err() {
                    break;
                }
            }
        }
    }
    let _ = to.shutdown(Shutdown::Write);
}
