#![no_main]

use libfuzzer_sys::fuzz_target;
use trailrag_core::eval::parse_cases;

fuzz_target!(|data: &[u8]| {
    let _ = parse_cases(data, "fuzz");
});
