//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p bclab --test acceptance -- --nocapture` or directly.
//!
//! Criterion 5 is expected to fail; the process exits non-zero only when some
//! other criterion fails.

mod common;

use std::time::Instant;

use bclab::class_group::{ClassGroup, ClassKind};
use bclab::hecke::{double_coset_decompose, AffineElement};
use bclab::induction::{balanced_product_suite, involution_suite, stages_suite};
use bclab::kms::{kms_eval, measure_scaling_check, KmsPoint, LevelModel, TestFunction};
use bclab::parse::{parse_beta, parse_element};
use bclab::precision::Beta;
use bclab::quad_field::{FieldElement, QuadField};
use bclab::zeta::{dedekind_zeta, divergence_product, induced_ratio, monotone_factor_check, partial_zetas};
use bclab::Ideal;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIVE_FIELDS: [i64; 5] = [1, -1, 2, -5, 3];
const SEED: u64 = 0x5eed_2024;

/// Criteria known to be unattainable as stated.
const EXPECTED_FAILURES: [u32; 1] = [5];

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn field(d: i64) -> QuadField {
    QuadField::new(d).unwrap()
}

fn beta(s: &str) -> Beta {
    parse_beta(s).unwrap()
}

fn random_affine(k: QuadField, rng: &mut ChaCha8Rng) -> AffineElement {
    let rat = |rng: &mut ChaCha8Rng, span: i64| BigRational::new(rng.gen_range(-span..=span).into(), rng.gen_range(1..=6i64).into());
    loop {
        let y = FieldElement::new(k, rat(rng, 20), if k.is_rational() { BigRational::from_integer(0.into()) } else { rat(rng, 20) }).unwrap();
        let (a, b) = (rng.gen_range(-4i64..=4), if k.is_rational() { 0 } else { rng.gen_range(-3i64..=3) });
        let den = rng.gen_range(1i64..=3);
        let x = FieldElement::from_ints(k, a, b).scale(&BigRational::new(1.into(), den.into()));
        if let Ok(g) = AffineElement::new(y, x) {
            return g;
        }
    }
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut count = 0;
    for d in FIVE_FIELDS {
        let k = field(d);
        for _ in 0..50 {
            let g = random_affine(k, &mut rng);
            let dec = double_coset_decompose(&g).unwrap();
            let expect = BigRational::one() / g.x().norm().abs();
            if dec.delta() != expect {
                return outcome(false, format!("g = {g}: L/R = {} but 1/|N(x)| = {expect}", dec.delta()));
            }
            count += 1;
        }
    }
    outcome(true, format!("{count} elements, exact"))
}

fn criterion_2() -> Outcome {
    let discs = common::fundamental_discriminants(200);
    for &disc in &discs {
        let k = field(common::d_of_disc(disc));
        let narrow = ClassGroup::narrow(k).unwrap();
        let forms = common::FormClassGroup::new(disc);
        if narrow.order() != forms.order() || narrow.invariants() != forms.invariants().as_slice() {
            return outcome(false, format!("D = {disc}: {:?} vs forms {:?}", narrow.invariants(), forms.invariants()));
        }
        let h = ClassGroup::build(k, ClassKind::Wide).unwrap().order();
        let expect = if disc < 0 || k.unit_info().fu_norm == Some(-1) { h } else { 2 * h };
        if narrow.order() != expect {
            return outcome(false, format!("D = {disc}: h+ = {}, h = {h}", narrow.order()));
        }
    }
    outcome(true, format!("{} fundamental discriminants", discs.len()))
}

fn criterion_3() -> Outcome {
    for d in FIVE_FIELDS {
        let k = field(d);
        let group = ClassGroup::narrow(k).unwrap();
        for n in [100u64, 1000, 10_000] {
            let total: BigInt = partial_zetas(&group, &beta("2"), n).unwrap().iter().map(|p| &p.raw).sum();
            if total != dedekind_zeta(k, &beta("2"), n).unwrap().raw {
                return outcome(false, format!("d = {d}, N = {n}"));
            }
        }
    }
    outcome(true, "5 fields x 3 cutoffs, exact")
}

fn criterion_4() -> Outcome {
    let cutoff = 10_000u64;
    let r = induced_ratio(field(-1), &beta("2"), cutoff).unwrap();
    let value = r.value.to_f64().value();
    let (lo, hi) = (r.lower.to_f64().value(), r.upper.to_f64().value());
    // total mass of the induced measure as a double sum: the ideal sum of
    // Q(i) times the Mobius series of 1/zeta(4)
    let mobius = common::mobius_table(cutoff as usize);
    let zl: f64 = (1..=cutoff).map(|n| common::ideal_count_by_character(-4, n) as f64 / (n * n) as f64).sum();
    let inv_zk: f64 = (1..=cutoff as usize).map(|m| mobius[m] as f64 / (m as f64).powi(4)).sum();
    let direct = zl * inv_zk;
    // both truncated series have tails below 1/cutoff relative to their sums
    let slack = 2.0 / cutoff as f64;
    let within = direct >= lo * (1.0 - slack) && direct <= hi * (1.0 + slack);
    let rel = (value - direct).abs() / direct;
    outcome(within && rel < 1e-2, format!("ratio {value:.10}, enclosure [{lo:.10}, {hi:.10}], direct {direct:.10}, rel {rel:.2e}"))
}

fn criterion_5() -> Outcome {
    let rep = divergence_product(field(-1), &beta("1"), 100_000).unwrap();
    let termwise = rep.iter().all(|r| r.factor_exact.as_ref().is_some_and(|f| f >= &BigRational::one()));
    let last = rep.last().unwrap().running_f64();
    outcome(
        termwise && last > 10.0,
        format!("{} factors, all exact and >= 1: {termwise}; product over p <= 1e5 = {last:.6} (needs > 10)", rep.len()),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let grid: Vec<f64> = (1..=50).map(|i| i as f64 / 50.0).collect();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let n = rng.gen_range(1..=3);
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(1.01..50.0)).collect();
        let ss: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..6.0)).collect();
        let rep = monotone_factor_check(&xs, &ss, &grid, 1e-12).unwrap();
        worst = worst.max(rep.max_increase);
        if !rep.passed {
            return outcome(false, format!("xs = {xs:?}, ss = {ss:?}: increase {}", rep.max_increase));
        }
    }
    outcome(true, format!("100 instances x 50 betas, largest step {worst:.3e}"))
}

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (d, m) in [(1i64, 2u64), (-1, 2), (2, 3), (-5, 3), (3, 5)] {
        let k = field(d);
        let group = ClassGroup::narrow(k).unwrap();
        let model = LevelModel::new(k, m).unwrap();
        let x = KmsPoint::new(&group, &model, Ideal::unit(k), k.one()).unwrap();
        let v = kms_eval(&model, &x, &TestFunction::one(&model), &beta("2"), 1000).unwrap().value;
        ok &= v == BigRational::one();
    }
    notes.push(format!("normalization exact: {ok}"));
    let cases: [(i64, u64, &str); 2] = [(1, 2, "3"), (-1, 2, "1+w")];
    for (d, m, h) in cases {
        let k = field(d);
        let group = ClassGroup::narrow(k).unwrap();
        let model = LevelModel::new(k, m).unwrap();
        let x = KmsPoint::new(&group, &model, Ideal::unit(k), k.one()).unwrap();
        let units: Vec<usize> = (0..model.len()).filter(|&i| model.is_invertible(i)).collect();
        let h = parse_element(k, h).unwrap();
        let r = measure_scaling_check(&model, &x, &h, &units, &beta("2"), 100_000).unwrap();
        ok &= r.deviation < 1e-3;
        notes.push(format!("scaling {k} h={h}: {:.2e}", r.deviation));
    }
    let k = field(1);
    let group = ClassGroup::narrow(k).unwrap();
    let model = LevelModel::new(k, 2).unwrap();
    let x = KmsPoint::new(&group, &model, Ideal::unit(k), k.one()).unwrap();
    let odd = TestFunction::indicator(&model, &[model.point_of(&k.one()).unwrap()]).unwrap();
    let v = kms_eval(&model, &x, &odd, &beta("2"), 100_000).unwrap().value.to_f64().unwrap();
    ok &= (v - 0.75).abs() < 1e-4;
    notes.push(format!("odd mod 2: {v:.8}"));
    outcome(ok, notes.join("; "))
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, suite) in [
        ("balanced product", balanced_product_suite as fn(usize, usize) -> _),
        ("involution", involution_suite),
        ("stages", stages_suite),
    ] {
        let s = suite(24, 4).unwrap();
        ok &= s.failures.is_empty();
        notes.push(format!("{name}: {} instances, {} failures", s.instances, s.failures.len()));
    }
    outcome(ok, notes.join("; "))
}

fn main() {
    // libtest flags such as --nocapture are accepted and ignored
    let criteria: [Criterion; 8] = [
        (1, "modular function equals inverse norm", criterion_1),
        (2, "narrow class groups against forms", criterion_2),
        (3, "partition identity", criterion_3),
        (4, "induced-weight ratio", criterion_4),
        (5, "divergence product at beta = 1", criterion_5),
        (6, "monotone factor", criterion_6),
        (7, "KMS normalization and scaling", criterion_7),
        (8, "finite induction suite", criterion_8),
    ];
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let out = run();
        let secs = start.elapsed().as_secs_f64();
        let tag = if out.passed { "PASS" } else { "FAIL" };
        let note = if !out.passed && EXPECTED_FAILURES.contains(&id) { " [known, see ledger]" } else { "" };
        println!("{tag} criterion {id}: {name} ({secs:.1}s) {}{note}", out.detail);
        if !out.passed && !EXPECTED_FAILURES.contains(&id) {
            unexpected += 1;
        }
        if out.passed && EXPECTED_FAILURES.contains(&id) {
            println!("note: criterion {id} was expected to fail and passed");
        }
    }
    if unexpected > 0 {
        std::process::exit(1);
    }
}
