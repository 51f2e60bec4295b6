#![no_main]

use libfuzzer_sys::fuzz_target;
use trailrag_core::embedding::{decode_embed_response, NORM_TOLERANCE};

fuzz_target!(|data: &[u8]| {
    let Some((&count, body)) = data.split_first() else { return };
    if let Ok(vs) = decode_embed_response(body, usize::from(count % 4), None) {
        assert_eq!(vs.len(), usize::from(count % 4));
        assert!(vs.iter().all(|v| (v.norm() - 1.0).abs() <= NORM_TOLERANCE));
    }
});
