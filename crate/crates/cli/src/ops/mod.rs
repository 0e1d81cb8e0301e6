//! The operations behind each subcommand, separated from argument
//! parsing so tests can call them in-process.

mod attack;
mod bench;
mod datasets;
mod serve;
mod sweep;
mod train;

pub use attack::{cmd_attack, parse_strategy, AttackCmdSpec};
pub use bench::{cmd_bench, BenchRow, BenchSpec, TimingTable};
pub use datasets::{cmd_gen_datasets, DatasetReport, DatasetSpec, WrittenFile};
pub use serve::{
    cmd_ftp_get, cmd_http_get, cmd_mqtt_pub, start_ftp_server, start_http_server,
    start_mqtt_broker, FtpGetSpec, HttpGetSpec, MqttPubSpec, ServeSpec, TransferRow,
    TransferSummary,
};
pub use sweep::{cmd_sweep_tradeoff, SweepPoint, SweepReport, SweepSpec};
pub use train::{
    cmd_train_ddm, cmd_train_srv, dialect_costs, TrainDdmReport, TrainDdmSpec, TrainSrvReport,
    TrainSrvSpec,
};

/// Which protocol a subcommand targets. Each protocol has its own
/// dialect count, request corpus, and artifact paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Protocol {
    Ftp,
    Http,
    Mqtt,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Ftp => "ftp",
            Protocol::Http => "http",
            Protocol::Mqtt => "mqtt",
        }
    }

    /// Output classes a decision model for this protocol must have.
    pub fn dialect_count(self) -> usize {
        match self {
            Protocol::Ftp => vp_dialect::register_ftp_dialects().len(),
            Protocol::Http => vp_adapters::http::HTTP_DIALECT_COUNT,
            Protocol::Mqtt => vp_adapters::mqtt::MQTT_DIALECT_COUNT,
        }
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ftp" => Ok(Protocol::Ftp),
            "http" => Ok(Protocol::Http),
            "mqtt" => Ok(Protocol::Mqtt),
            other => Err(format!(
                "unknown protocol {other:?}; expected ftp, http, or mqtt"
            )),
        }
    }
}
