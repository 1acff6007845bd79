#![no_main]
use bclab::parse::parse_ideal;
use bclab::quad_field::QuadField;
use bclab::Ideal;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&selector, rest)) = data.split_first() else { return };
    let Ok(s) = std::str::from_utf8(rest) else { return };
    let d = [1, -1, -3, -5, 2, 3, 5][selector as usize % 7];
    let k = QuadField::new(d).unwrap();
    let Ok(a) = parse_ideal(k, s) else { return };
    // the Z-basis generates the same ideal
    let basis = a.basis().iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ");
    assert_eq!(parse_ideal(k, &format!("({basis})")).unwrap(), a);
    if let Ok(inv) = a.inv() {
        if let Ok(p) = a.mul(&inv) {
            assert_eq!(p, Ideal::unit(k));
        }
    }
});
