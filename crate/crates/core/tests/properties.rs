use std::sync::OnceLock;

use bclab::class_group::ClassGroup;
use bclab::hecke::{delta, AffineElement, HeckeFunction};
use bclab::induction::{
    balanced_product, clopen_return_check, groupoid_corner_check, induction_in_stages_check, involution_model_check,
    orbit_bijection_check, small_h_sets, structure_check, FiniteGroup,
};
use bclab::kms::{eval_with, mass_terms, point_masses, KmsPoint, LevelModel, PointMasses, TestFunction};
use bclab::parse::{parse_beta, parse_element, parse_ideal, parse_rational};
use bclab::quad_field::{FieldElement, QuadField};
use bclab::zeta::{dedekind_zeta, partial_zetas};
use bclab::Ideal;
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use proptest::prelude::*;

const FIELDS: [i64; 8] = [1, -1, -3, -5, 2, 3, 5, 10];

fn field() -> impl Strategy<Value = QuadField> {
    prop::sample::select(&FIELDS[..]).prop_map(|d| QuadField::new(d).unwrap())
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-30i64..=30, 1i64..=6).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

fn element(k: QuadField) -> impl Strategy<Value = FieldElement> {
    (rational(), rational()).prop_map(move |(a, b)| {
        let b = if k.is_rational() { BigRational::from_integer(0.into()) } else { b };
        FieldElement::new(k, a, b).unwrap()
    })
}

fn field_and_elements(n: usize) -> impl Strategy<Value = (QuadField, Vec<FieldElement>)> {
    field().prop_flat_map(move |k| (Just(k), prop::collection::vec(element(k), n)))
}

fn integral_ideal(k: QuadField) -> impl Strategy<Value = Ideal> {
    ((-8i64..=8, -8i64..=8), (-8i64..=8, -8i64..=8)).prop_filter_map("zero ideal", move |((a, b), (c, d))| {
        let b = if k.is_rational() { 0 } else { b };
        let d = if k.is_rational() { 0 } else { d };
        let gens = [FieldElement::from_ints(k, a, b), FieldElement::from_ints(k, c, d)];
        Ideal::from_generators(k, &gens).ok()
    })
}

fn field_and_ideals() -> impl Strategy<Value = (QuadField, Ideal, Ideal)> {
    field().prop_flat_map(|k| (Just(k), integral_ideal(k), integral_ideal(k)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn norm_is_multiplicative((_, v) in field_and_elements(2)) {
        prop_assert_eq!((&v[0] * &v[1]).norm(), v[0].norm() * v[1].norm());
        prop_assert_eq!((&v[0] * &v[1]).conj(), &v[0].conj() * &v[1].conj());
    }

    #[test]
    fn totally_positive_cone((_, v) in field_and_elements(2)) {
        if !v[0].is_zero() {
            prop_assert!((&v[0] * &v[0]).is_totally_positive().unwrap());
        }
        let x = &v[0] * &v[0];
        let y = &v[1] * &v[1];
        if !x.is_zero() && !y.is_zero() {
            prop_assert!((&x * &y).is_totally_positive().unwrap());
            prop_assert!((&x + &y).is_totally_positive().unwrap());
        }
    }

    #[test]
    fn display_round_trips((k, v) in field_and_elements(1)) {
        let s = v[0].to_string();
        prop_assert_eq!(parse_element(k, &s).unwrap(), v[0].clone());
    }

    #[test]
    fn rational_round_trips(q in rational()) {
        prop_assert_eq!(parse_rational(&q.to_string()).unwrap(), q);
    }

    #[test]
    fn ideal_norm_is_multiplicative((k, a, b) in field_and_ideals()) {
        let ab = a.mul(&b).unwrap();
        prop_assert_eq!(ab.norm(), a.norm() * b.norm());
        prop_assert_eq!(ab.clone(), b.mul(&a).unwrap());
        prop_assert_eq!(a.mul(&a.inv().unwrap()).unwrap(), Ideal::unit(k));
        let printed = format!("({})", a.basis().iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "));
        prop_assert_eq!(parse_ideal(k, &printed).unwrap(), a);
    }

    #[test]
    fn class_map_is_a_homomorphism((k, a, b) in field_and_ideals()) {
        let g = ClassGroup::narrow(k).unwrap();
        let ca = g.class_of(&a).unwrap();
        let cb = g.class_of(&b).unwrap();
        prop_assert_eq!(g.class_of(&a.mul(&b).unwrap()).unwrap(), g.mul(ca, cb));
        prop_assert_eq!(g.class_of(&a.inv().unwrap()).unwrap(), g.inverse(ca));
    }
}

fn affine(k: QuadField) -> impl Strategy<Value = AffineElement> {
    let small = (1i64..=4, -2i64..=2).prop_map(move |(a, b)| {
        let b = if k.is_rational() { 0 } else { b };
        FieldElement::from_ints(k, a, b)
    });
    (element(k), small, 1i64..=3).prop_filter_map("singular", move |(y, x, den)| {
        let x = x.scale(&BigRational::new(1.into(), den.into()));
        AffineElement::new(y, x).ok()
    })
}

fn field_and_affines(n: usize) -> impl Strategy<Value = (QuadField, Vec<AffineElement>)> {
    prop::sample::select(&[1i64, -1, 2][..])
        .prop_map(|d| QuadField::new(d).unwrap())
        .prop_flat_map(move |k| (Just(k), prop::collection::vec(affine(k), n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn delta_is_multiplicative((_, g) in field_and_affines(2)) {
        let prod = g[0].mul(&g[1]).unwrap();
        prop_assert_eq!(delta(&prod).unwrap(), delta(&g[0]).unwrap() * delta(&g[1]).unwrap());
        prop_assert_eq!(delta(&g[0].inv()).unwrap() * delta(&g[0]).unwrap(), BigRational::from_integer(1.into()));
    }

    #[test]
    fn star_is_an_antihomomorphism((_, g) in field_and_affines(2), c in (-3i64..=3, -3i64..=3)) {
        let coef = Complex::new(BigRational::from_integer(c.0.into()), BigRational::from_integer(c.1.into()));
        let f = HeckeFunction::term(&g[0], coef);
        let h = HeckeFunction::indicator(&g[1]);
        prop_assert_eq!(f.star().star(), f.clone());
        let lhs = f.convolve(&h).unwrap().star();
        let rhs = h.star().convolve(&f.star()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn partial_zetas_sum_to_zeta(d in prop::sample::select(&[-5i64, -6, -14, -15, 3, 6, 10, 15][..]), cutoff in 50u64..400) {
        let k = QuadField::new(d).unwrap();
        let beta = parse_beta("2").unwrap();
        let g = ClassGroup::narrow(k).unwrap();
        let total: BigInt = partial_zetas(&g, &beta, cutoff).unwrap().iter().map(|p| &p.raw).sum();
        prop_assert_eq!(total, dedekind_zeta(k, &beta, cutoff).unwrap().raw);
    }
}

fn gaussian_masses() -> &'static (LevelModel, PointMasses) {
    static CELL: OnceLock<(LevelModel, PointMasses)> = OnceLock::new();
    CELL.get_or_init(|| {
        let k = QuadField::new(-1).unwrap();
        let group = ClassGroup::narrow(k).unwrap();
        let model = LevelModel::new(k, 3).unwrap();
        let x = KmsPoint::new(&group, &model, Ideal::unit(k), k.one()).unwrap();
        let terms = mass_terms(&model, &x, &parse_beta("2").unwrap(), 2000).unwrap();
        let masses = point_masses(&terms, &model);
        (model, masses)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn states_are_positive_linear_functionals(f in prop::collection::vec(0i64..20, 5), g in prop::collection::vec(0i64..20, 5), c in 0i64..5) {
        let (model, masses) = gaussian_masses();
        let n = model.len();
        prop_assume!(n <= 5);
        let vals = |v: &[i64]| v[..n].iter().map(|&a| BigRational::from_integer(a.into())).collect::<Vec<_>>();
        let ff = TestFunction::from_values("f", model, vals(&f)).unwrap();
        let gg = TestFunction::from_values("g", model, vals(&g)).unwrap();
        let eval = |t: &TestFunction| eval_with(masses, t).unwrap().value;
        prop_assert_eq!(eval(&ff.add(&gg)), eval(&ff) + eval(&gg));
        let cf: Vec<i64> = f.iter().map(|a| a * c).collect();
        let scaled = TestFunction::from_values("cf", model, vals(&cf)).unwrap();
        prop_assert_eq!(eval(&scaled), eval(&ff) * BigRational::from_integer(c.into()));
        // f <= max(f, g) pointwise
        let mx: Vec<i64> = f.iter().zip(&g).map(|(a, b)| *a.max(b)).collect();
        let top = TestFunction::from_values("max", model, vals(&mx)).unwrap();
        prop_assert!(eval(&ff) <= eval(&top));
        prop_assert!(eval(&ff) >= BigRational::from_integer(0.into()));
    }
}

fn abelian_instance() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, Vec<usize>, usize)> {
    prop::sample::select(vec![vec![2, 2], vec![2, 4], vec![6], vec![2, 6], vec![3, 3], vec![12], vec![2, 2, 2]])
        .prop_flat_map(|f| {
            let n: usize = f.iter().product();
            (Just(f), prop::collection::vec(0..n, 0..3), prop::collection::vec(0..n, 0..3), 0usize..64)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn induction_checks_on_random_instances((factors, ug, wg, pick) in abelian_instance()) {
        let g = FiniteGroup::abelian(&factors).unwrap();
        let u = g.closure(&ug);
        let w = g.closure(&wg);
        let (h, incl) = g.subgroup(&u).unwrap();
        let sets = small_h_sets(&h, 3).unwrap();
        let x = &sets[pick % sets.len()];
        let bp = balanced_product(&g, &h, &incl, x).unwrap();
        for r in [structure_check(&bp), clopen_return_check(&bp), orbit_bijection_check(&bp), groupoid_corner_check(&bp)] {
            prop_assert!(r.passed, "{:?}", r);
        }
        // a G-set on which to test the involution: the induced one
        prop_assert!(involution_model_check(&g, &u, &w, &bp.action).unwrap().passed);
        let k = g.closure(&ug.iter().map(|&e| g.mul(e, e)).collect::<Vec<_>>());
        let (kg, _) = g.subgroup(&k).unwrap();
        let ksets = small_h_sets(&kg, 2).unwrap();
        prop_assert!(induction_in_stages_check(&g, &u, &k, &ksets[pick % ksets.len()]).unwrap().passed);
    }
}
