//! The three publish dialects and the broker-side verifier.
//!
//! Slot layout per dialect:
//! - `HeaderShuffle` — one packet, fields `[message, topic]` (the topic
//!   and message slots are switched).
//! - `TransmutationOfMessages` — one packet, fields
//!   `[topic, dummy topic, message, dummy message]`, where the dummy pair
//!   is derived deterministically (`topic + "_d"`, message reversed) so
//!   the verifier can re-derive and check it.
//! - `MutationOfPayload` — two packets: `[topic]`, then `[message]`.
//!
//! The shapes are mutually exclusive (2 fields vs 4 fields vs 2 packets),
//! so the broker can locate the topic, feed it to the decision model, and
//! demand that the model's dialect match the shape actually received.

use vp_ddm::MlpModel;
use vp_dialect::DialectId;
use vp_srv::{DecisionTree, RejectReason, StructureFeatures, FEATURE_COUNT, MAX_FIELDS};

use super::packet::MqttPublish;
use crate::AdapterError;

/// Number of publish dialects; decision models for this protocol have
/// this many output classes.
pub const MQTT_DIALECT_COUNT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MqttDialect {
    HeaderShuffle,
    TransmutationOfMessages,
    MutationOfPayload,
}

impl MqttDialect {
    pub const ALL: [MqttDialect; MQTT_DIALECT_COUNT] = [
        MqttDialect::HeaderShuffle,
        MqttDialect::TransmutationOfMessages,
        MqttDialect::MutationOfPayload,
    ];

    pub fn id(self) -> DialectId {
        let index = Self::ALL.iter().position(|d| *d == self).expect("listed");
        DialectId::from_index(index)
    }

    pub fn from_id(id: DialectId) -> Option<Self> {
        Self::ALL.get(id.index()).copied()
    }

    /// How many packets one publish occupies in this dialect.
    pub fn packet_count(self) -> usize {
        match self {
            MqttDialect::MutationOfPayload => 2,
            _ => 1,
        }
    }
}

/// Broker verdict for one received publish sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MqttVerdict {
    /// Structure and dialect agree; the payload may be stored.
    Accept { topic: String, message: String },
    Reject(RejectReason),
}

impl MqttVerdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, MqttVerdict::Accept { .. })
    }
}

fn dummy_topic(topic: &str) -> String {
    format!("{topic}_d")
}

fn reversed(text: &str) -> String {
    text.chars().rev().collect()
}

/// Encodes one (topic, message) publish in the given dialect.
pub fn mqtt_dialect_encode(
    dialect: MqttDialect,
    topic: &str,
    message: &str,
) -> Result<Vec<MqttPublish>, AdapterError> {
    if topic.is_empty() || message.is_empty() {
        return Err(AdapterError::EmptyField);
    }
    let packets = match dialect {
        MqttDialect::HeaderShuffle => {
            vec![MqttPublish::from_fields(vec![
                message.to_string(),
                topic.to_string(),
            ])?]
        }
        MqttDialect::TransmutationOfMessages => {
            vec![MqttPublish::from_fields(vec![
                topic.to_string(),
                dummy_topic(topic),
                message.to_string(),
                reversed(message),
            ])?]
        }
        MqttDialect::MutationOfPayload => vec![
            MqttPublish::from_fields(vec![topic.to_string()])?,
            MqttPublish::from_fields(vec![message.to_string()])?,
        ],
    };
    Ok(packets)
}

/// Inverse of [`mqtt_dialect_encode`]: recovers (topic, message) from a
/// sequence that must match the dialect's shape and content rules.
pub fn mqtt_dialect_decode(
    dialect: MqttDialect,
    packets: &[MqttPublish],
) -> Result<(String, String), AdapterError> {
    if shape_dialect(packets) != Some(dialect) {
        return Err(AdapterError::MalformedPacket(format!(
            "sequence does not have the {dialect:?} shape"
        )));
    }
    if !content_ok(dialect, packets) {
        return Err(AdapterError::MalformedPacket(format!(
            "sequence violates the {dialect:?} content rules"
        )));
    }
    let (topic, message) = extract_pair(dialect, packets);
    Ok((topic.to_string(), message.to_string()))
}

/// Which dialect's canonical shape this sequence has, by packet and field
/// counts alone.
fn shape_dialect(packets: &[MqttPublish]) -> Option<MqttDialect> {
    match packets {
        [p] if p.fields().len() == 2 => Some(MqttDialect::HeaderShuffle),
        [p] if p.fields().len() == 4 => Some(MqttDialect::TransmutationOfMessages),
        [p, q] if p.fields().len() == 1 && q.fields().len() == 1 => {
            Some(MqttDialect::MutationOfPayload)
        }
        _ => None,
    }
}

/// Topic and message slots for a sequence already known to have the
/// dialect's shape.
fn extract_pair(dialect: MqttDialect, packets: &[MqttPublish]) -> (&str, &str) {
    match dialect {
        MqttDialect::HeaderShuffle => (&packets[0].fields()[1], &packets[0].fields()[0]),
        MqttDialect::TransmutationOfMessages => {
            (&packets[0].fields()[0], &packets[0].fields()[2])
        }
        MqttDialect::MutationOfPayload => (&packets[0].fields()[0], &packets[1].fields()[0]),
    }
}

/// Value-level rules: non-empty topic and message everywhere, and the
/// deterministic dummy pair where the dialect carries one.
fn content_ok(dialect: MqttDialect, packets: &[MqttPublish]) -> bool {
    let (topic, message) = extract_pair(dialect, packets);
    if topic.is_empty() || message.is_empty() {
        return false;
    }
    match dialect {
        MqttDialect::TransmutationOfMessages => {
            let fields = packets[0].fields();
            fields[1] == dummy_topic(topic) && fields[3] == reversed(message)
        }
        _ => true,
    }
}

/// Shape features of a publish sequence, in the verifier's envelope
/// encoding: packet count, then per packet a field count and one type
/// code per field (every publish field is a string).
pub fn mqtt_sequence_features(packets: &[MqttPublish]) -> Option<StructureFeatures> {
    if packets.is_empty() || packets.len() > vp_srv::MAX_PACKETS {
        return None;
    }
    let mut out = [0.0f32; FEATURE_COUNT];
    out[0] = packets.len() as f32;
    for (pi, packet) in packets.iter().enumerate() {
        if packet.fields().len() > MAX_FIELDS {
            return None;
        }
        let base = 1 + pi * (1 + MAX_FIELDS);
        out[base] = packet.fields().len() as f32;
        for fi in 0..packet.fields().len() {
            out[base + 1 + fi] = 1.0; // string type code
        }
    }
    Some(StructureFeatures(out))
}

/// The canonical features of each dialect's shape.
fn canonical_features(dialect: MqttDialect) -> StructureFeatures {
    let packets = mqtt_dialect_encode(dialect, "t", "m").expect("static example encodes");
    mqtt_sequence_features(&packets).expect("canonical shapes fit the envelope")
}

/// Labeled shape samples for training the broker's structural verifier.
pub fn mqtt_shape_dataset(samples_per_class: usize) -> Vec<(StructureFeatures, DialectId)> {
    MqttDialect::ALL
        .iter()
        .flat_map(|&dialect| {
            std::iter::repeat((canonical_features(dialect), dialect.id())).take(samples_per_class)
        })
        .collect()
}

/// Broker-side verification of one publish sequence.
///
/// The shape identifies a candidate dialect and the topic's slot; the
/// tree (the deployed structural classifier) must agree, the decision
/// model fed with the topic must name the same dialect, and the content
/// rules must hold. Anything else is a reject — shape disagreements as
/// [`RejectReason::DialectMismatch`], broken value rules as
/// [`RejectReason::ContentMismatch`].
pub fn mqtt_broker_verify(
    packets: &[MqttPublish],
    model: &MlpModel,
    tree: &DecisionTree,
) -> MqttVerdict {
    let Some(features) = mqtt_sequence_features(packets) else {
        return MqttVerdict::Reject(RejectReason::DialectMismatch);
    };
    let Some(dialect) = shape_dialect(packets) else {
        return MqttVerdict::Reject(RejectReason::DialectMismatch);
    };
    if tree.predict(&features) != dialect.id() {
        return MqttVerdict::Reject(RejectReason::DialectMismatch);
    }
    let (topic, message) = extract_pair(dialect, packets);
    if model.predict_dialect(topic) != dialect.id() {
        return MqttVerdict::Reject(RejectReason::DialectMismatch);
    }
    if !content_ok(dialect, packets) {
        return MqttVerdict::Reject(RejectReason::ContentMismatch);
    }
    MqttVerdict::Accept {
        topic: topic.to_string(),
        message: message.to_string(),
    }
}
