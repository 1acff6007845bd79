#![no_main]
use bclab::parse::parse_element;
use bclab::quad_field::QuadField;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&selector, rest)) = data.split_first() else { return };
    let Ok(s) = std::str::from_utf8(rest) else { return };
    let d = [1, -1, -3, -5, 2, 3, 5][selector as usize % 7];
    let k = QuadField::new(d).unwrap();
    if let Ok(x) = parse_element(k, s) {
        assert_eq!(parse_element(k, &x.to_string()).unwrap(), x);
        let _ = x.is_totally_positive();
    }
});
