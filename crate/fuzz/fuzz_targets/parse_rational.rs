#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(q) = bclab::parse::parse_rational(s) {
            assert_eq!(bclab::parse::parse_rational(&q.to_string()).unwrap(), q);
        }
        let _ = bclab::parse::parse_beta(s);
    }
});
