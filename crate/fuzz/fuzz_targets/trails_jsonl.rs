#![no_main]

use libfuzzer_sys::fuzz_target;
use trailrag_core::ingest::parse_trails;

fuzz_target!(|data: &[u8]| {
    let _ = parse_trails(data, "fuzz");
});
