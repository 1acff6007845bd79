//! Truncated Dedekind and partial zeta functions, Euler products, the induced
//! weight ratio `zeta_L(beta) / zeta_Q(2 beta)` and the Euler-factor
//! diagnostics for `beta <= 1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::primes_up_to;
use crate::class_group::ClassGroup;
use crate::error::{invalid, Result};
use crate::ideal::{ideal_counts, split_prime, PrimeTable, SplitKind};
use crate::precision::{
    fixed_one, fixed_to_decimal, fixed_to_f64, fixed_to_float, float_to_fixed, float_u64, neg_pow, weight_table, weighted_sum, Beta, Float, FRAC_BITS,
};
use crate::quad_field::QuadField;

/// Significant digits used when a value is rendered as a decimal string.
pub const DEFAULT_DIGITS: usize = 30;

/// A partial sum `sum_{N(a) <= cutoff} N(a)^-beta` with a bound on the
/// discarded tail.
#[derive(Clone, Debug)]
pub struct TruncatedZeta {
    pub beta: Beta,
    pub cutoff: u64,
    /// Sum scaled by `2^FRAC_BITS`.
    pub raw: BigInt,
    /// `None` when the series diverges (`beta <= 1`).
    pub tail_bound: Option<f64>,
}

impl TruncatedZeta {
    pub fn to_f64(&self) -> f64 {
        fixed_to_f64(&self.raw)
    }

    pub fn to_decimal(&self, digits: usize) -> String {
        fixed_to_decimal(&self.raw, digits)
    }

    pub fn to_float(&self) -> Float {
        fixed_to_float(&self.raw)
    }

    pub fn tail_decimal(&self) -> String {
        match self.tail_bound {
            Some(t) => format_bound(t),
            None => "inf".to_string(),
        }
    }
}

/// Six significant digits, rounded away from zero so the printed number is
/// still an upper bound.
pub fn format_bound(t: f64) -> String {
    if t == 0.0 {
        return "0".into();
    }
    let e = t.abs().log10().floor() as i32;
    let scale = 10f64.powi(5 - e);
    let m = (t * scale).ceil() / scale;
    format!("{m:.6e}")
}

/// Safety factor covering floating-point error in the closed-form bounds.
const BOUND_SLACK: f64 = 1.0 + 1e-9;

/// Bound on `sum_{n > cutoff} a_n n^-beta`.
///
/// For Q `a_n = 1` and the tail is at most `N^(1-beta)/(beta-1)`. For a
/// quadratic field the number of ideals of norm `n` is at most the number of
/// divisors `d(n)`; with `sum_{n <= x} d(n) <= x (ln x + 1)` partial
/// summation gives `beta N^(1-beta) [(ln N + 1)/(beta-1) + 1/(beta-1)^2]`.
pub fn tail_bound(field: QuadField, beta: &Beta, cutoff: u64) -> Option<f64> {
    if !beta.gt_one() {
        return None;
    }
    let b = beta.to_f64();
    let n = cutoff as f64;
    let head = n.powf(1.0 - b);
    let t = if field.is_rational() {
        head / (b - 1.0)
    } else {
        b * head * ((n.ln() + 1.0) / (b - 1.0) + 1.0 / ((b - 1.0) * (b - 1.0)))
    };
    Some(t * BOUND_SLACK)
}

fn check_cutoff(cutoff: u64) -> Result<()> {
    if cutoff < 1 {
        return invalid("cutoff must be at least 1");
    }
    if cutoff > 50_000_000 {
        return invalid("cutoff above 5e7 is not supported");
    }
    Ok(())
}

/// Number of integral ideals of each norm up to `cutoff` (index 0 unused).
pub fn norm_counts(field: QuadField, cutoff: u64) -> Vec<u64> {
    if field.is_rational() {
        let mut c = vec![1u64; cutoff as usize + 1];
        c[0] = 0;
        c
    } else {
        ideal_counts(field, cutoff)
    }
}

pub fn dedekind_zeta(field: QuadField, beta: &Beta, cutoff: u64) -> Result<TruncatedZeta> {
    check_cutoff(cutoff)?;
    let counts = norm_counts(field, cutoff);
    let w = weight_table(beta, cutoff);
    Ok(TruncatedZeta {
        beta: beta.clone(),
        cutoff,
        raw: weighted_sum(&counts, &w),
        tail_bound: tail_bound(field, beta, cutoff),
    })
}

/// `counts[c][n]`: number of integral ideals of norm `n` in class `c`.
pub fn class_counts(group: &ClassGroup, cutoff: u64) -> Result<Vec<Vec<u64>>> {
    check_cutoff(cutoff)?;
    let field = group.field();
    let h = group.order();
    let mut counts = vec![vec![0u64; cutoff as usize + 1]; h];
    if field.is_rational() {
        counts[0] = norm_counts(field, cutoff);
        return Ok(counts);
    }
    let table = PrimeTable::new(field, cutoff);
    let prime_class: Vec<usize> =
        table.primes().iter().map(|q| group.class_of(&q.ideal)).collect::<Result<_>>()?;
    table.for_each_factorization(cutoff, |norm, fac| {
        let mut c = 0;
        for &(i, e) in fac {
            for _ in 0..e {
                c = group.mul(c, prime_class[i]);
            }
        }
        counts[c][norm as usize] += 1;
    });
    Ok(counts)
}

/// Partial zeta functions of every class, in class-index order.
pub fn partial_zetas(group: &ClassGroup, beta: &Beta, cutoff: u64) -> Result<Vec<TruncatedZeta>> {
    let counts = class_counts(group, cutoff)?;
    let w = weight_table(beta, cutoff);
    let tail = tail_bound(group.field(), beta, cutoff);
    Ok(counts
        .iter()
        .map(|c| TruncatedZeta { beta: beta.clone(), cutoff, raw: weighted_sum(c, &w), tail_bound: tail })
        .collect())
}

pub fn partial_zeta(group: &ClassGroup, class: usize, beta: &Beta, cutoff: u64) -> Result<TruncatedZeta> {
    if class >= group.order() {
        return invalid(format!("class {class} out of range (h = {})", group.order()));
    }
    Ok(partial_zetas(group, beta, cutoff)?.swap_remove(class))
}

/// `prod_{p <= prime_bound} prod_{P | p} (1 - N(P)^-beta)^-1` at working
/// precision.
pub fn euler_product(field: QuadField, beta: &Beta, prime_bound: u64) -> Result<Float> {
    let mut acc = float_u64(1);
    for p in primes_up_to(prime_bound) {
        for q in split_prime(field, p)?.primes_above {
            acc /= float_u64(1) - neg_pow(q.norm, beta);
        }
    }
    Ok(acc)
}

/// Sum of `N(a)^-beta` over ideals of norm `<= cutoff` whose prime factors
/// lie over rational primes `<= prime_bound`.
pub fn smooth_sum(field: QuadField, beta: &Beta, prime_bound: u64, cutoff: u64) -> Result<TruncatedZeta> {
    check_cutoff(cutoff)?;
    let table = PrimeTable::new(field, cutoff).restricted(prime_bound);
    let mut counts = vec![0u64; cutoff as usize + 1];
    table.for_each_factorization(cutoff, |n, _| counts[n as usize] += 1);
    let w = weight_table(beta, cutoff);
    Ok(TruncatedZeta { beta: beta.clone(), cutoff, raw: weighted_sum(&counts, &w), tail_bound: None })
}

#[derive(Clone, Debug)]
pub struct InducedRatio {
    pub zeta_l: TruncatedZeta,
    pub zeta_k: TruncatedZeta,
    /// `zeta_l / zeta_k` of the truncated sums.
    pub value: Float,
    /// Enclosure of the untruncated ratio from the two tail bounds.
    pub lower: Float,
    pub upper: Float,
}

fn float_f64(x: f64) -> Float {
    Float::try_from(x).expect("finite")
}

/// `zeta_L(beta) / zeta_Q([L:Q] beta)` for `beta > 1`.
pub fn induced_ratio(l: QuadField, beta: &Beta, cutoff: u64) -> Result<InducedRatio> {
    if !beta.gt_one() {
        return invalid("the induced ratio needs beta > 1; use the divergence product for beta <= 1");
    }
    let zeta_l = dedekind_zeta(l, beta, cutoff)?;
    let zeta_k = dedekind_zeta(QuadField::rationals(), &beta.scaled(l.degree()), cutoff)?;
    let zl = zeta_l.to_float();
    let zk = zeta_k.to_float();
    let tl = float_f64(zeta_l.tail_bound.expect("beta > 1"));
    let tk = float_f64(zeta_k.tail_bound.expect("beta > 1"));
    let value = &zl / &zk;
    let lower = &zl / (&zk + tk);
    let upper = (zl + tl) / zk;
    Ok(InducedRatio { zeta_l, zeta_k, value, lower, upper })
}

#[derive(Clone, Debug, Serialize)]
pub struct EulerFactorReport {
    pub p: u64,
    pub kind: SplitKind,
    /// The factor as an exact fraction, available for integer `beta`.
    #[serde(serialize_with = "ser_opt_rational")]
    pub factor_exact: Option<BigRational>,
    /// Factor scaled by `2^FRAC_BITS` (exact factors are rounded down).
    #[serde(skip)]
    pub factor_raw: BigInt,
    /// Running product scaled by `2^FRAC_BITS`, each step rounded down.
    #[serde(skip)]
    pub running_raw: BigInt,
}

fn ser_opt_rational<S: serde::Serializer>(q: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_some(&q.to_string()),
        None => s.serialize_none(),
    }
}

impl EulerFactorReport {
    pub fn factor_decimal(&self, digits: usize) -> String {
        fixed_to_decimal(&self.factor_raw, digits)
    }

    pub fn running_decimal(&self, digits: usize) -> String {
        fixed_to_decimal(&self.running_raw, digits)
    }

    pub fn running_f64(&self) -> f64 {
        fixed_to_f64(&self.running_raw)
    }
}

fn floor_fixed(q: &BigRational) -> BigInt {
    let scaled = q * BigRational::from_integer(fixed_one());
    scaled.floor().to_integer()
}

/// The local factors `(1 - p^-(d beta)) / prod_{P | p} (1 - N(P)^-beta)` for
/// the primes `p <= prime_bound`, with `d = [L:Q]`, and their running product.
///
/// The running product is rounded down at every step, so for exact factors it
/// is a lower bound for the true product.
pub fn divergence_product(l: QuadField, beta: &Beta, prime_bound: u64) -> Result<Vec<EulerFactorReport>> {
    if beta.value() > &BigRational::one() {
        return invalid("the divergence product is defined for 0 < beta <= 1");
    }
    let degree = l.degree();
    let mut running = fixed_one();
    let mut out = Vec::new();
    for p in primes_up_to(prime_bound) {
        let split = split_prime(l, p)?;
        let (exact, raw) = match beta.as_integer() {
            Some(k) => {
                let pk = |n: u64, e: u32| BigRational::new(BigInt::one(), BigInt::from(n).pow(e));
                let one = BigRational::one();
                let mut f = &one - pk(p, degree * k);
                for q in &split.primes_above {
                    f /= &one - pk(q.norm, k);
                }
                let raw = floor_fixed(&f);
                (Some(f), raw)
            }
            None => {
                let one = float_u64(1);
                let mut f = &one - neg_pow(p, &beta.scaled(degree));
                for q in &split.primes_above {
                    f /= &one - neg_pow(q.norm, beta);
                }
                (None, float_to_fixed(&f, FRAC_BITS))
            }
        };
        let next = &running * &raw;
        running = next >> FRAC_BITS;
        out.push(EulerFactorReport { p, kind: split.kind, factor_exact: exact, factor_raw: raw, running_raw: running.clone() });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct MonotoneReport {
    pub grid: Vec<f64>,
    pub values: Vec<Float>,
    /// Largest increase `F(b_{k+1}) - F(b_k)` seen along the grid.
    pub max_increase: f64,
    pub passed: bool,
}

/// `(1 - prod x_i^(-s_i beta)) / prod (1 - x_i^-beta)`.
pub fn monotone_factor(xs: &[f64], ss: &[f64], beta: f64) -> Float {
    let one = float_u64(1);
    let b = float_f64(beta);
    let mut num_exp = float_u64(0);
    let mut den = one.clone();
    for (x, s) in xs.iter().zip(ss) {
        let lx = float_f64(*x).ln();
        num_exp += &lx * float_f64(*s);
        den *= &one - (-(&lx * &b)).exp();
    }
    (&one - (-(num_exp * b)).exp()) / den
}

/// `(1 - a x^(-s beta)) / (1 - x^-beta)`.
pub fn auxiliary_factor(x: f64, s: f64, a: f64, beta: f64) -> Float {
    let one = float_u64(1);
    let lx = float_f64(x).ln();
    let b = float_f64(beta);
    (&one - float_f64(a) * (-(&lx * float_f64(s) * &b)).exp()) / (&one - (-(lx * b)).exp())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return invalid("empty beta grid");
    }
    if grid.iter().any(|b| !(*b > 0.0 && *b <= 1.0)) {
        return invalid("beta grid must lie in (0, 1]");
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("beta grid must be strictly increasing");
    }
    Ok(())
}

fn monotone_report(grid: &[f64], values: Vec<Float>, tol: f64) -> MonotoneReport {
    let mut max_increase = f64::NEG_INFINITY;
    for w in values.windows(2) {
        let d = (&w[1] - &w[0]).to_f64().value();
        max_increase = max_increase.max(d);
    }
    if values.len() < 2 {
        max_increase = 0.0;
    }
    MonotoneReport { grid: grid.to_vec(), values, max_increase, passed: max_increase <= tol }
}

/// Checks that the factor is non-increasing along `grid` up to `tol`.
pub fn monotone_factor_check(xs: &[f64], ss: &[f64], grid: &[f64], tol: f64) -> Result<MonotoneReport> {
    if xs.is_empty() || xs.len() != ss.len() {
        return invalid("xs and ss must be nonempty and of equal length");
    }
    if xs.iter().any(|x| !(*x > 1.0 && x.is_finite())) || ss.iter().any(|s| !(*s >= 1.0 && s.is_finite())) {
        return invalid("need every x > 1 and every s >= 1");
    }
    check_grid(grid)?;
    let values = grid.iter().map(|&b| monotone_factor(xs, ss, b)).collect();
    Ok(monotone_report(grid, values, tol))
}

/// Same check for the one-variable auxiliary factor with `0 <= a <= 1`.
pub fn auxiliary_factor_check(x: f64, s: f64, a: f64, grid: &[f64], tol: f64) -> Result<MonotoneReport> {
    if !(x > 1.0 && s >= 1.0 && (0.0..=1.0).contains(&a)) {
        return invalid("need x > 1, s >= 1 and 0 <= a <= 1");
    }
    check_grid(grid)?;
    let values = grid.iter().map(|&b| auxiliary_factor(x, s, a, b)).collect();
    Ok(monotone_report(grid, values, tol))
}

/// Ratio of two fixed-point values as a float.
pub fn fixed_ratio(num: &BigInt, den: &BigInt) -> Result<Float> {
    if den.is_zero() {
        return invalid("empty sum in the denominator");
    }
    Ok(fixed_to_float(num) / fixed_to_float(den))
}

/// `|a/b - 1|` for fixed-point values.
pub fn relative_deviation(a: &Float, b: &Float) -> f64 {
    ((a / b) - float_u64(1)).to_f64().value().abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(d: i64) -> QuadField {
        QuadField::new(d).unwrap()
    }

    #[test]
    fn classical_values() {
        let z = dedekind_zeta(QuadField::rationals(), &Beta::from_int(2), 10_000).unwrap();
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((z.to_f64() - pi2_6).abs() < 1e-4);
        assert!(pi2_6 - z.to_f64() <= z.tail_bound.unwrap());
        let zi = dedekind_zeta(f(-1), &Beta::from_int(2), 10_000).unwrap();
        let catalan = 0.915_965_594_177_219;
        assert!((zi.to_f64() - pi2_6 * catalan).abs() < 1e-3);
        let big = dedekind_zeta(f(5), &Beta::from_int(60), 100).unwrap();
        assert!((big.to_f64() - 1.0).abs() < 1e-15);
        assert!(dedekind_zeta(f(5), &Beta::from_int(2), 0).is_err());
        assert_eq!(dedekind_zeta(f(5), &Beta::from_int(1), 10).unwrap().tail_bound, None);
    }

    #[test]
    fn partition_identity_small() {
        let k = f(-5);
        let g = ClassGroup::narrow(k).unwrap();
        let b = Beta::from_int(2);
        let parts = partial_zetas(&g, &b, 1000).unwrap();
        let total: BigInt = parts.iter().map(|z| z.raw.clone()).sum();
        assert_eq!(total, dedekind_zeta(k, &b, 1000).unwrap().raw);
        // the nontrivial class starts 2^-2 + 2*3^-2 + ...
        let c = class_counts(&g, 10).unwrap();
        assert_eq!(&c[1][..8], &[0, 0, 1, 2, 0, 0, 0, 2]);
    }

    #[test]
    fn divergence_factors() {
        let rep = divergence_product(f(-1), &Beta::from_int(1), 5).unwrap();
        let half = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(rep[0].factor_exact, Some(half(3, 2)));
        assert_eq!(rep[1].factor_exact, Some(half(1, 1)));
        assert_eq!(rep[2].factor_exact, Some(half(3, 2)));
        assert!((rep[2].running_f64() - 2.25).abs() < 1e-12);
        assert!(divergence_product(f(-1), &Beta::from_int(2), 5).is_err());
    }

    #[test]
    fn monotone_examples() {
        let r = monotone_factor_check(&[4.0], &[2.0], &[0.25, 0.5, 1.0], 1e-12).unwrap();
        assert!(r.passed);
        let r = monotone_factor_check(&[3.0], &[1.0], &[0.5], 1e-12).unwrap();
        assert!(r.passed);
        assert!(monotone_factor_check(&[0.5], &[1.0], &[0.5], 1e-12).is_err());
        assert!(auxiliary_factor_check(5.0, 2.0, 0.3, &[0.1, 0.6, 1.0], 1e-12).unwrap().passed);
    }
}
