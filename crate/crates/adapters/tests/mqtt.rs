//! MQTT adapter: packet framing, the three publish dialects, broker
//! verification, and end-to-end sessions against a live broker.

mod common;

use std::sync::Arc;
use std::time::Duration;

use proptest::prelude::*;
use vp_adapters::mqtt::{
    encode_plain_publish, mqtt_broker_verify, mqtt_dialect_decode, mqtt_dialect_encode,
    mqtt_sequence_features, mqtt_shape_dataset, spawn_mqtt_broker, BrokerConfig, BrokerHandle,
    MqttClient, MqttClientConfig, MqttDialect, MqttEngine, MqttPublish, MqttVerdict,
    PublishOutcome,
};
use vp_adapters::{AdapterError, EndpointMode};
use vp_ddm::MlpModel;
use vp_srv::{train_tree, DecisionTree, RejectReason, TrainParams};

use common::{constant_model, router_model};

/// Topics whose first letter routes them to each dialect under the
/// byte-0 router model.
const TOPIC_D1: &str = "attic/light";
const TOPIC_D2: &str = "boiler/temp";
const TOPIC_D3: &str = "cellar/door";

fn topic_for(dialect: MqttDialect) -> &'static str {
    match dialect {
        MqttDialect::HeaderShuffle => TOPIC_D1,
        MqttDialect::TransmutationOfMessages => TOPIC_D2,
        MqttDialect::MutationOfPayload => TOPIC_D3,
    }
}

fn broker_model() -> MlpModel {
    router_model(3, 0)
}

fn broker_tree() -> DecisionTree {
    train_tree(&mqtt_shape_dataset(20), &TrainParams::default()).expect("non-empty dataset")
}

fn spawn(mode: EndpointMode) -> BrokerHandle {
    let engine = Arc::new(MqttEngine {
        model: broker_model(),
        tree: broker_tree(),
    });
    let config = BrokerConfig {
        mode,
        read_timeout: Duration::from_millis(500),
        ..BrokerConfig::default()
    };
    spawn_mqtt_broker(config, engine).expect("bind loopback")
}

fn client(broker: &BrokerHandle) -> MqttClient {
    let config = MqttClientConfig {
        read_timeout: Duration::from_millis(500),
    };
    MqttClient::connect(broker.addr(), Arc::new(broker_model()), config)
        .expect("connect to loopback broker")
}

#[test]
fn packet_bytes_round_trip() {
    let cases = vec![
        vec!["topic".to_string(), "message".to_string()],
        vec!["a".to_string()],
        vec!["x".repeat(300), "y".repeat(5000), "z".to_string(), "¤ütf8".to_string()],
    ];
    for fields in cases {
        let packet = MqttPublish::from_fields(fields).unwrap();
        let bytes = packet.to_bytes();
        assert_eq!(bytes[0], vp_adapters::mqtt::PUBLISH_CONTROL);
        let back = MqttPublish::from_bytes(&bytes).unwrap();
        assert_eq!(back, packet);
    }
}

#[test]
fn declared_lengths_always_match_the_wire() {
    for dialect in MqttDialect::ALL {
        for packet in mqtt_dialect_encode(dialect, "kitchen/humidity", "47 percent").unwrap() {
            let bytes = packet.to_bytes();
            // Walk the remaining-length header by hand.
            let mut at = 1;
            let mut declared = 0usize;
            for i in 0..4 {
                let byte = bytes[at];
                at += 1;
                declared += usize::from(byte & 0x7f) << (7 * i);
                if byte & 0x80 == 0 {
                    break;
                }
            }
            assert_eq!(declared, bytes.len() - at, "remaining length covers the body");
            // Every field's 2-byte prefix must consume the body exactly.
            let mut field_count = 0;
            while at < bytes.len() {
                let len = usize::from(u16::from_be_bytes([bytes[at], bytes[at + 1]]));
                at += 2 + len;
                field_count += 1;
            }
            assert_eq!(at, bytes.len(), "fields cover the declared length exactly");
            assert_eq!(field_count, packet.fields().len());
        }
    }
}

#[test]
fn encode_decode_round_trips_for_every_dialect() {
    let pairs = [
        ("OPENLABPRO", "HELLO"),
        ("kitchen/humidity", "47"),
        ("topic", "pálindrome-¤"),
    ];
    for dialect in MqttDialect::ALL {
        for (topic, message) in pairs {
            let packets = mqtt_dialect_encode(dialect, topic, message).unwrap();
            assert_eq!(packets.len(), dialect.packet_count());
            let (t, m) = mqtt_dialect_decode(dialect, &packets).unwrap();
            assert_eq!((t.as_str(), m.as_str()), (topic, message));
        }
    }
}

#[test]
fn header_shuffle_swaps_the_topic_and_message_slots() {
    let packets =
        mqtt_dialect_encode(MqttDialect::HeaderShuffle, "OPENLABPRO", "HELLO").unwrap();
    assert_eq!(packets.len(), 1);
    assert_eq!(packets[0].fields(), ["HELLO".to_string(), "OPENLABPRO".to_string()]);
}

#[test]
fn transmutation_packs_the_deterministic_dummy_pair() {
    let packets =
        mqtt_dialect_encode(MqttDialect::TransmutationOfMessages, "OPENLABPRO", "HELLO").unwrap();
    assert_eq!(packets.len(), 1);
    assert_eq!(
        packets[0].fields(),
        [
            "OPENLABPRO".to_string(),
            "OPENLABPRO_d".to_string(),
            "HELLO".to_string(),
            "OLLEH".to_string(),
        ]
    );
}

#[test]
fn mutation_of_payload_uses_two_packets() {
    let packets =
        mqtt_dialect_encode(MqttDialect::MutationOfPayload, "OPENLABPRO", "HELLO").unwrap();
    assert_eq!(packets.len(), 2);
    assert_eq!(packets[0].fields(), ["OPENLABPRO".to_string()]);
    assert_eq!(packets[1].fields(), ["HELLO".to_string()]);
}

#[test]
fn oversized_and_empty_fields_are_rejected() {
    let long = "x".repeat(70_000);
    for dialect in MqttDialect::ALL {
        assert!(matches!(
            mqtt_dialect_encode(dialect, &long, "m"),
            Err(AdapterError::OversizedField { .. })
        ));
        assert!(matches!(
            mqtt_dialect_encode(dialect, "", "m"),
            Err(AdapterError::EmptyField)
        ));
        assert!(matches!(
            mqtt_dialect_encode(dialect, "t", ""),
            Err(AdapterError::EmptyField)
        ));
    }
    assert!(matches!(
        encode_plain_publish(&long, "m"),
        Err(AdapterError::OversizedField { .. })
    ));
}

#[test]
fn the_three_shapes_are_distinct_and_learnable() {
    let features: Vec<_> = MqttDialect::ALL
        .iter()
        .map(|&d| {
            let packets = mqtt_dialect_encode(d, "some/topic", "payload").unwrap();
            mqtt_sequence_features(&packets).expect("fits the envelope")
        })
        .collect();
    for i in 0..features.len() {
        for j in i + 1..features.len() {
            assert_ne!(features[i], features[j], "shapes {i} and {j} must differ");
        }
    }
    let tree = broker_tree();
    for (features, dialect) in features.iter().zip(MqttDialect::ALL) {
        assert_eq!(tree.predict(features), dialect.id());
    }
}

#[test]
fn broker_verify_accepts_exactly_the_matching_encodings() {
    let model = broker_model();
    let tree = broker_tree();
    for expected in MqttDialect::ALL {
        let topic = topic_for(expected);
        for encoded_as in MqttDialect::ALL {
            let packets = mqtt_dialect_encode(encoded_as, topic, "state=42").unwrap();
            let verdict = mqtt_broker_verify(&packets, &model, &tree);
            if encoded_as == expected {
                assert_eq!(
                    verdict,
                    MqttVerdict::Accept {
                        topic: topic.to_string(),
                        message: "state=42".to_string()
                    },
                    "{encoded_as:?} for a {expected:?} topic"
                );
            } else {
                assert_eq!(
                    verdict,
                    MqttVerdict::Reject(RejectReason::DialectMismatch),
                    "{encoded_as:?} for a {expected:?} topic"
                );
            }
        }
    }
}

#[test]
fn broken_dummy_rules_read_as_content_mismatch() {
    let model = broker_model();
    let tree = broker_tree();
    // A topic whose dialect is the transmutation one, but with a wrong
    // dummy topic and then a wrong reversed message.
    let wrong_dummy = MqttPublish::from_fields(vec![
        TOPIC_D2.to_string(),
        "unrelated".to_string(),
        "HELLO".to_string(),
        "OLLEH".to_string(),
    ])
    .unwrap();
    assert_eq!(
        mqtt_broker_verify(&[wrong_dummy], &model, &tree),
        MqttVerdict::Reject(RejectReason::ContentMismatch)
    );
    let wrong_reverse = MqttPublish::from_fields(vec![
        TOPIC_D2.to_string(),
        format!("{TOPIC_D2}_d"),
        "HELLO".to_string(),
        "HELLO".to_string(),
    ])
    .unwrap();
    assert_eq!(
        mqtt_broker_verify(&[wrong_reverse], &model, &tree),
        MqttVerdict::Reject(RejectReason::ContentMismatch)
    );
}

#[test]
fn plain_publishes_do_not_even_parse_as_dialected_packets() {
    let bytes = encode_plain_publish("attic/light", "HELLO").unwrap();
    assert!(matches!(
        MqttPublish::from_bytes(&bytes),
        Err(AdapterError::MalformedPacket(_))
    ));
}

#[test]
fn genuine_publishes_are_acked_and_stored() {
    let broker = spawn(EndpointMode::Dialected);
    let mut client = client(&broker);
    for (topic, message) in [
        (TOPIC_D1, "on"),
        (TOPIC_D2, "21.5"),
        (TOPIC_D3, "open"),
    ] {
        let (outcome, timing) = client.publish(topic, message).unwrap();
        assert_eq!(outcome, PublishOutcome::Accepted, "topic {topic}");
        assert!(timing.ddm_ms > 0.0);
    }
    assert_eq!(
        broker.published(),
        vec![
            (TOPIC_D1.to_string(), "on".to_string()),
            (TOPIC_D2.to_string(), "21.5".to_string()),
            (TOPIC_D3.to_string(), "open".to_string()),
        ]
    );
}

#[test]
fn undialected_floods_are_rejected_and_never_stored() {
    let broker = spawn(EndpointMode::Dialected);
    for i in 0..20 {
        // Each rejected publish costs the attacker its connection.
        let mut attacker = client(&broker);
        let outcome = attacker
            .publish_plain(&format!("attic/flood{i}"), &format!("spam {i}"))
            .unwrap();
        assert_eq!(outcome, PublishOutcome::Rejected, "flood publish {i}");
    }
    assert!(broker.published().is_empty(), "no flood payload may land");
}

#[test]
fn cross_encoded_publish_is_rejected_and_kills_the_connection() {
    let broker = spawn(EndpointMode::Dialected);
    let mut mallory = client(&broker);
    // Right topic, wrong dialect for it.
    let packets =
        mqtt_dialect_encode(MqttDialect::TransmutationOfMessages, TOPIC_D1, "on").unwrap();
    assert_eq!(
        mallory.publish_packets(&packets).unwrap(),
        PublishOutcome::Rejected
    );
    assert!(broker.published().is_empty());
    // The broker hung up: the next (genuine) attempt cannot be acked.
    match mallory.publish(TOPIC_D1, "on") {
        Ok((outcome, _)) => assert_eq!(outcome, PublishOutcome::Rejected),
        Err(AdapterError::Io(_)) => {}
        Err(other) => panic!("unexpected error {other}"),
    }
}

#[test]
fn a_lone_topic_packet_times_out_without_an_ack() {
    let broker = spawn(EndpointMode::Dialected);
    let mut client = client(&broker);
    let packets = mqtt_dialect_encode(MqttDialect::MutationOfPayload, TOPIC_D3, "x").unwrap();
    let outcome = client.publish_packets(&packets[..1]).unwrap();
    assert_eq!(outcome, PublishOutcome::Rejected);
    assert!(broker.published().is_empty());
}

#[test]
fn plain_mode_broker_accepts_stock_publishes() {
    let broker = spawn(EndpointMode::Plain);
    let mut client = client(&broker);
    let outcome = client.publish_plain("any/topic", "HELLO").unwrap();
    assert_eq!(outcome, PublishOutcome::Accepted);
    assert_eq!(
        broker.published(),
        vec![("any/topic".to_string(), "HELLO".to_string())]
    );
}

#[test]
fn a_misrouted_model_is_a_caller_error_not_a_panic() {
    let broker = spawn(EndpointMode::Dialected);
    // A 15-class model can name dialects this protocol does not have.
    let config = MqttClientConfig::default();
    let mut client =
        MqttClient::connect(broker.addr(), Arc::new(constant_model(15, 9)), config).unwrap();
    assert!(matches!(
        client.publish("topic/x", "m"),
        Err(AdapterError::UnknownDialect(10))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Lossless round trip through every dialect, including the wire
    /// bytes of each packet.
    #[test]
    fn any_pair_round_trips(
        topic in "[a-z]{1,12}(/[a-z0-9]{1,12}){0,2}",
        message in "[ -~]{1,200}",
    ) {
        for dialect in MqttDialect::ALL {
            let packets = mqtt_dialect_encode(dialect, &topic, &message).unwrap();
            let rewired: Vec<MqttPublish> = packets
                .iter()
                .map(|p| MqttPublish::from_bytes(&p.to_bytes()).unwrap())
                .collect();
            let (t, m) = mqtt_dialect_decode(dialect, &rewired).unwrap();
            prop_assert_eq!(&t, &topic);
            prop_assert_eq!(&m, &message);
        }
    }
}
