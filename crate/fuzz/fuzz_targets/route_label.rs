#![no_main]

use libfuzzer_sys::fuzz_target;
use trailrag_core::router::{fallback_rules, parse_route_label};
use trailrag_core::store::dsl::schema_fields;

fuzz_target!(|text: &str| {
    if let Some(kind) = parse_route_label(text) {
        assert_eq!(parse_route_label(&text.to_ascii_lowercase()), Some(kind));
        assert_eq!(parse_route_label(&format!("\n{}", text.to_ascii_uppercase())), Some(kind));
    }
    let route = fallback_rules(text, &schema_fields());
    assert!((0.0..=1.0).contains(&route.confidence));
});
