#![no_main]

use libfuzzer_sys::fuzz_target;
use trailrag_server::ConfigLayer;

fuzz_target!(|text: &str| {
    let _ = ConfigLayer::from_toml(text, "fuzz.toml");
});
