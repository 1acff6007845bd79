#![no_main]
use bclab::parse::{parse_suite, MAX_SUITE_ORDER};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(spec) = parse_suite(s) {
            assert!((1..=MAX_SUITE_ORDER).contains(&spec.max_order));
            assert!((1..=6).contains(&spec.max_x));
        }
    }
});
