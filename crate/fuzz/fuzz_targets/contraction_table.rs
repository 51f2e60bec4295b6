#![no_main]

use libfuzzer_sys::fuzz_target;
use trailrag_core::ingest::{expand_contractions, ContractionTable};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = ContractionTable::parse(text) {
        // Expansion must terminate for any accepted table.
        for c in table.entries() {
            let _ = expand_contractions(&c.contraction, &table);
        }
    }
});
