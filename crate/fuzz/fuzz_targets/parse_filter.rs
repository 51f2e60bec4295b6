#![no_main]

use libfuzzer_sys::fuzz_target;
use trailrag_core::store::parse_filter;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_filter(text) {
        let shown = f.to_string();
        let again = parse_filter(&shown).expect("display output parses");
        assert_eq!(again, f);
    }
});
