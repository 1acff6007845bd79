#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(k) = bclab::parse::parse_field(s) {
            // the canonical name parses back to the same field
            assert_eq!(bclab::parse::parse_field(&k.to_string()).unwrap(), k);
        }
    }
});
