//! Structural invariants of the dialect set, plus property tests tying
//! rendering and parsing together over arbitrary valid requests.

use proptest::prelude::*;
use vp_dialect::{parse_response, register_ftp_dialects, DialectId, RequestContext};

#[test]
fn schema_signatures_are_pairwise_distinct() {
    let registry = register_ftp_dialects();
    let mut signatures: Vec<String> = registry.iter().map(|d| d.schema().signature()).collect();
    assert_eq!(signatures.len(), 15);
    signatures.sort();
    signatures.dedup();
    assert_eq!(signatures.len(), 15, "duplicate schema signature");
}

#[test]
fn every_signature_resolves_back_to_its_dialect() {
    let registry = register_ftp_dialects();
    for dialect in registry.iter() {
        assert_eq!(
            registry.find_by_signature(&dialect.schema().signature()),
            Some(dialect.id())
        );
    }
}

#[test]
fn default_cost_is_a_thousand_per_response_message() {
    for dialect in register_ftp_dialects().iter() {
        assert_eq!(
            dialect.cost(),
            dialect.schema().packet_count() as f64 * 1000.0
        );
    }
}

#[test]
fn only_the_slow_dialect_delays() {
    for dialect in register_ftp_dialects().iter() {
        let delay = dialect.response_delay();
        if dialect.id().get() == 7 {
            assert_eq!(delay.as_secs(), 4);
        } else {
            assert!(delay.is_zero());
        }
    }
}

fn arb_context() -> impl Strategy<Value = RequestContext> {
    (
        "[a-z]{1,8}",
        "[a-z][a-z0-9_-]{0,11}\\.[a-z]{1,4}",
        prop_oneof![Just(0u64), 0u64..1_000_000_000_000],
    )
        .prop_map(|(command, filename, size)| RequestContext::new(command, filename, Some(size)))
}

proptest! {
    // A genuine reply always parses back to its own dialect's signature —
    // for any dialect, any well-formed request, and both outcomes.
    #[test]
    fn render_parse_round_trip(id in 1u16..=15, ctx in arb_context()) {
        let registry = register_ftp_dialects();
        let dialect = registry.get(DialectId::new(id).unwrap()).unwrap();

        let found = dialect.render_response(&ctx).unwrap();
        prop_assert_eq!(parse_response(&found).unwrap().signature(), dialect.schema().signature());

        let missing = dialect.render_not_found(&ctx).unwrap();
        prop_assert_eq!(parse_response(&missing).unwrap().signature(), dialect.schema().signature());
    }

    // Message counts follow the schema, so the transport can frame replies
    // without peeking at content.
    #[test]
    fn message_count_matches_schema(id in 1u16..=15, ctx in arb_context()) {
        let registry = register_ftp_dialects();
        let dialect = registry.get(DialectId::new(id).unwrap()).unwrap();
        let found = dialect.render_response(&ctx).unwrap();
        prop_assert_eq!(found.len(), dialect.schema().packet_count());
    }
}
