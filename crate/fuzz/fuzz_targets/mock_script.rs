#![no_main]

use libfuzzer_sys::fuzz_target;
use trailrag_core::llm::parse_script;

fuzz_target!(|data: &[u8]| {
    let _ = parse_script(data, "fuzz");
});
