#![no_main]

use libfuzzer_sys::fuzz_target;
use trailrag_core::ingest::parse_jsonl;
use trailrag_core::router::RoutingCase;

fuzz_target!(|data: &[u8]| {
    let _ = parse_jsonl::<RoutingCase>(data, "fuzz");
});
