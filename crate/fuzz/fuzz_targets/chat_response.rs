#![no_main]

use libfuzzer_sys::fuzz_target;
use trailrag_core::llm::decode_chat_response;

fuzz_target!(|data: &[u8]| {
    let _ = decode_chat_response(data);
});
