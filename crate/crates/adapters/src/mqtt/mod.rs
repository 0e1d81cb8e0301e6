//! The MQTT adapter: dialected publish packets, a verifying broker, and
//! a publishing client.

mod broker;
mod client;
mod dialect;
mod packet;

pub use broker::{spawn_mqtt_broker, BrokerConfig, BrokerHandle, MqttEngine, DEFAULT_MQTT_PORT};
pub use client::{MqttClient, MqttClientConfig, PublishOutcome};
pub use dialect::{
    mqtt_broker_verify, mqtt_dialect_decode, mqtt_dialect_encode, mqtt_sequence_features,
    mqtt_shape_dataset, MqttDialect, MqttVerdict, MQTT_DIALECT_COUNT,
};
pub use packet::{encode_plain_publish, MqttPublish, PUBACK_BYTES, PUBLISH_CONTROL};
