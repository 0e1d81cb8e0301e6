//! Endpoint configuration and the shared dialect machinery.

use std::path::PathBuf;
use std::time::Duration;

use vp_ddm::MlpModel;
use vp_dialect::DialectRegistry;

/// The immutable per-process dialect state both endpoints need: the
/// dialect table and the decision model. Shared across sessions.
#[derive(Debug)]
pub struct DialectEngine {
    pub registry: DialectRegistry,
    pub model: MlpModel,
}

/// Whether an endpoint speaks dialects or plain FTP (the baseline used
/// for overhead comparisons).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ServerMode {
    #[default]
    Dialected,
    Plain,
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub bind_addr: String,
    /// Port to listen on; 0 picks an ephemeral port (the default control
    /// port in deployments is 2121).
    pub port: u16,
    /// `Some((user, password))` enables the login gate.
    pub credentials: Option<(String, String)>,
    pub file_root: PathBuf,
    pub mode: ServerMode,
    /// Honor per-dialect artificial response delays. Disabled for
    /// latency-sensitive soak runs.
    pub apply_template_delays: bool,
    /// How long to wait for client acknowledgements before giving up on
    /// a session.
    pub read_timeout: Duration,
}

impl ServerConfig {
    pub fn new(file_root: impl Into<PathBuf>) -> Self {
        Self {
            bind_addr: "127.0.0.1".into(),
            port: 0,
            credentials: None,
            file_root: file_root.into(),
            mode: ServerMode::Dialected,
            apply_template_delays: true,
            read_timeout: Duration::from_secs(30),
        }
    }
}
