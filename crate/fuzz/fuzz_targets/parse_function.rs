#![no_main]
use bclab::kms::LevelModel;
use bclab::parse::parse_function;
use bclab::quad_field::QuadField;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&selector, rest)) = data.split_first() else { return };
    let Ok(s) = std::str::from_utf8(rest) else { return };
    let Ok(spec) = parse_function(s) else { return };
    let (d, m) = [(1, 4), (-1, 3), (-5, 3), (2, 3)][selector as usize % 4];
    let model = LevelModel::new(QuadField::new(d).unwrap(), m).unwrap();
    if let Ok(f) = spec.resolve(&model) {
        assert_eq!(f.values.len(), model.len());
    }
});
