//! Settings file: plain `key=value` lines covering ports, credentials,
//! artifact paths, and per-dialect cost overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;
use vp_adapters::http::DEFAULT_HTTP_PORT;
use vp_adapters::mqtt::DEFAULT_MQTT_PORT;
use vp_dialect::DialectRegistry;

/// Conventional control port for the dialected file-transfer server.
pub const DEFAULT_FTP_PORT: u16 = 2121;

#[derive(Debug, Error)]
pub enum SettingsError {
    #[error("cannot read settings file {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("settings line {line}: expected key=value, got {text:?}")]
    NotKeyValue { line: usize, text: String },
    #[error("settings line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("settings line {line}: invalid value for {key}: {reason}")]
    BadValue {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("user and password must be set together")]
    HalfCredentials,
}

/// Runtime settings shared by every subcommand. Each field has a
/// sensible default, so a settings file only lists what it changes.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// Address all endpoints bind or dial.
    pub bind_addr: String,
    pub ftp_port: u16,
    pub http_port: u16,
    pub mqtt_port: u16,
    /// `Some` enables the file-transfer login gate on both ends.
    pub credentials: Option<(String, String)>,
    pub ftp_model: PathBuf,
    pub http_model: PathBuf,
    pub mqtt_model: PathBuf,
    pub ftp_tree: PathBuf,
    pub http_tree: PathBuf,
    pub mqtt_tree: PathBuf,
    /// Per-dialect cost overrides, keyed by 1-based dialect id.
    pub cost_overrides: BTreeMap<u16, f64>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            bind_addr: "127.0.0.1".into(),
            ftp_port: DEFAULT_FTP_PORT,
            http_port: DEFAULT_HTTP_PORT,
            mqtt_port: DEFAULT_MQTT_PORT,
            credentials: None,
            ftp_model: PathBuf::from("artifacts/ftp.model"),
            http_model: PathBuf::from("artifacts/http.model"),
            mqtt_model: PathBuf::from("artifacts/mqtt.model"),
            ftp_tree: PathBuf::from("artifacts/ftp.tree"),
            http_tree: PathBuf::from("artifacts/http.tree"),
            mqtt_tree: PathBuf::from("artifacts/mqtt.tree"),
            cost_overrides: BTreeMap::new(),
        }
    }
}

impl Settings {
    /// Parses a settings file. Lines are `key=value`; blank lines and
    /// `#` comments are skipped; unknown keys are errors so typos never
    /// pass silently.
    pub fn load(path: &Path) -> Result<Self, SettingsError> {
        let text = std::fs::read_to_string(path).map_err(|source| SettingsError::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parses settings from text. See [`Settings::load`].
    pub fn parse(text: &str) -> Result<Self, SettingsError> {
        let mut settings = Self::default();
        let mut user: Option<String> = None;
        let mut password: Option<String> = None;

        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| SettingsError::NotKeyValue {
                    line,
                    text: trimmed.to_string(),
                })?;

            match key {
                "bind_addr" => settings.bind_addr = value.to_string(),
                "ftp_port" => settings.ftp_port = parse_value(line, key, value)?,
                "http_port" => settings.http_port = parse_value(line, key, value)?,
                "mqtt_port" => settings.mqtt_port = parse_value(line, key, value)?,
                "user" => user = Some(value.to_string()),
                "password" => password = Some(value.to_string()),
                "ftp_model" => settings.ftp_model = PathBuf::from(value),
                "http_model" => settings.http_model = PathBuf::from(value),
                "mqtt_model" => settings.mqtt_model = PathBuf::from(value),
                "ftp_tree" => settings.ftp_tree = PathBuf::from(value),
                "http_tree" => settings.http_tree = PathBuf::from(value),
                "mqtt_tree" => settings.mqtt_tree = PathBuf::from(value),
                _ => {
                    if let Some(id) = key.strip_prefix("cost.") {
                        let id: u16 = id.parse().map_err(|_| SettingsError::BadValue {
                            line,
                            key: key.to_string(),
                            reason: "dialect id must be a positive integer".into(),
                        })?;
                        let cost: f64 = parse_value(line, key, value)?;
                        if id == 0 || cost <= 0.0 || !cost.is_finite() {
                            return Err(SettingsError::BadValue {
                                line,
                                key: key.to_string(),
                                reason: "dialect ids start at 1 and costs must be positive".into(),
                            });
                        }
                        settings.cost_overrides.insert(id, cost);
                    } else {
                        return Err(SettingsError::UnknownKey {
                            line,
                            key: key.to_string(),
                        });
                    }
                }
            }
        }

        settings.credentials = match (user, password) {
            (Some(u), Some(p)) => Some((u, p)),
            (None, None) => None,
            _ => return Err(SettingsError::HalfCredentials),
        };
        Ok(settings)
    }

    /// The registry's cost table with any configured overrides applied.
    /// Overrides naming dialects beyond the table are reported and
    /// skipped rather than silently dropped.
    pub fn costs_with_overrides(&self, registry: &DialectRegistry) -> Vec<f64> {
        let mut costs: Vec<f64> = registry.iter().map(|d| d.cost()).collect();
        self.apply_overrides(&mut costs);
        costs
    }

    /// Applies `cost.<id>` overrides to an arbitrary cost table.
    pub fn apply_overrides(&self, costs: &mut [f64]) {
        for (&id, &cost) in &self.cost_overrides {
            match costs.get_mut(usize::from(id) - 1) {
                Some(slot) => *slot = cost,
                None => log::warn!("cost override for dialect {id} exceeds the table; skipped"),
            }
        }
    }
}

fn parse_value<T: std::str::FromStr>(
    line: usize,
    key: &str,
    value: &str,
) -> Result<T, SettingsError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| SettingsError::BadValue {
        line,
        key: key.to_string(),
        reason: e.to_string(),
    })
}
