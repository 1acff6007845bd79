//! Fixed-point weights `n^-beta` and the multiprecision floats behind them.
//!
//! Sums of Dirichlet-series terms are accumulated as integers scaled by
//! `2^FRAC_BITS`. Each term is rounded once, deterministically, and integer
//! addition is exact, so a sum does not depend on evaluation order or on how
//! the work was split between threads.

use std::fmt;
use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::IBig;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::format_decimal;
use crate::error::{invalid, Result};

pub const FRAC_BITS: usize = 192;

/// Working precision of the transcendental evaluations, in bits.
pub const WORK_BITS: usize = 256;

pub type Float = FBig<HalfEven, 2>;

pub fn to_ibig(x: &BigInt) -> IBig {
    IBig::from_str(&x.to_string()).expect("decimal integer")
}

pub fn from_ibig(x: &IBig) -> BigInt {
    BigInt::from_str(&x.to_string()).expect("decimal integer")
}

pub fn float_int(n: &BigInt) -> Float {
    Float::from(to_ibig(n)).with_precision(WORK_BITS).value()
}

pub fn float_u64(n: u64) -> Float {
    Float::from(n).with_precision(WORK_BITS).value()
}

pub fn float_rational(q: &BigRational) -> Float {
    float_int(q.numer()) / float_int(q.denom())
}

/// `x * 2^shift` rounded to an integer, half to even.
pub fn float_to_fixed(x: &Float, shift: usize) -> BigInt {
    let repr = x.repr();
    let sig = from_ibig(repr.significand());
    let e = repr.exponent() + shift as isize;
    if e >= 0 {
        sig << (e as usize)
    } else {
        round_shift(&sig, (-e) as usize)
    }
}

/// `round(v / 2^k)`, half to even.
pub fn round_shift(v: &BigInt, k: usize) -> BigInt {
    if k == 0 {
        return v.clone();
    }
    let den = BigInt::one() << k;
    let (q, r) = v.div_mod_floor(&den);
    let twice = &r * 2;
    if twice > den || (twice == den && q.is_odd()) {
        q + 1
    } else {
        q
    }
}

/// Fixed-point value as a float at working precision.
pub fn fixed_to_float(v: &BigInt) -> Float {
    Float::from_parts(to_ibig(v), -(FRAC_BITS as isize)).with_precision(WORK_BITS).value()
}

/// Decimal rendering of a fixed-point value with `sig` significant digits.
pub fn fixed_to_decimal(v: &BigInt, sig: usize) -> String {
    format_decimal(v, &(BigInt::one() << FRAC_BITS), sig)
}

pub fn fixed_to_f64(v: &BigInt) -> f64 {
    BigRational::new(v.clone(), BigInt::one() << FRAC_BITS).to_f64().unwrap_or(f64::NAN)
}

pub fn fixed_one() -> BigInt {
    BigInt::one() << FRAC_BITS
}

/// Product of two fixed-point values, rounded.
pub fn fixed_mul(a: &BigInt, b: &BigInt) -> BigInt {
    round_shift(&(a * b), FRAC_BITS)
}

/// A positive real exponent, held exactly as a rational.
#[derive(Clone, PartialEq, Eq)]
pub struct Beta {
    value: BigRational,
}

impl Beta {
    pub fn new(value: BigRational) -> Result<Beta> {
        if !value.is_positive() {
            return invalid(format!("beta must be positive, got {value}"));
        }
        Ok(Beta { value })
    }

    pub fn from_int(k: u32) -> Beta {
        Beta::new(BigRational::from_integer(k.into())).expect("positive")
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn as_integer(&self) -> Option<u32> {
        if self.value.is_integer() {
            self.value.numer().to_u32()
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }

    pub fn to_float(&self) -> Float {
        float_rational(&self.value)
    }

    pub fn scaled(&self, k: u32) -> Beta {
        Beta { value: &self.value * BigRational::from_integer(k.into()) }
    }

    pub fn gt_one(&self) -> bool {
        self.value > BigRational::one()
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.value.is_integer() {
            return write!(f, "{}", self.value.numer());
        }
        // terminating decimals print as such, everything else as a fraction
        let mut den = self.value.denom().clone();
        for p in [2u32, 5] {
            while (&den % p).is_zero() {
                den /= p;
            }
        }
        if den.is_one() {
            let digits = 40;
            let s = format_decimal(self.value.numer(), self.value.denom(), digits);
            let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
            write!(f, "{s}")
        } else {
            write!(f, "{}", self.value)
        }
    }
}

impl fmt::Debug for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Beta({self})")
    }
}

/// `n^-beta` as a float at working precision.
pub fn neg_pow(n: u64, beta: &Beta) -> Float {
    match beta.as_integer() {
        Some(k) => {
            let d = BigInt::from(n).pow(k);
            float_u64(1) / float_int(&d)
        }
        None => (-(float_u64(n).ln() * beta.to_float())).exp(),
    }
}

/// `round(2^FRAC_BITS * n^-beta)`.
pub fn neg_pow_fixed(n: u64, beta: &Beta) -> BigInt {
    match beta.as_integer() {
        Some(k) => {
            let d = BigInt::from(n).pow(k);
            let num = BigInt::one() << (FRAC_BITS + 1);
            (num / &d + 1) / 2
        }
        None => float_to_fixed(&neg_pow(n, beta), FRAC_BITS),
    }
}

/// The table `w[n] = round(2^FRAC_BITS * n^-beta)` for `1 <= n <= cutoff`
/// (`w[0] = 0`).
///
/// Integer exponents are computed term by term. Other exponents are
/// evaluated at primes only and extended multiplicatively, which rounds a
/// composite weight once per prime factor.
pub fn weight_table(beta: &Beta, cutoff: u64) -> Vec<BigInt> {
    let n = cutoff as usize;
    if beta.as_integer().is_some() {
        return (0..=n)
            .into_par_iter()
            .map(|i| if i == 0 { BigInt::zero() } else { neg_pow_fixed(i as u64, beta) })
            .collect();
    }
    let spf = smallest_prime_factors(n);
    let primes: Vec<usize> = (2..=n).filter(|&i| spf[i] == i).collect();
    let pw: Vec<BigInt> = primes.par_iter().map(|&p| neg_pow_fixed(p as u64, beta)).collect();
    let mut w = vec![BigInt::zero(); n + 1];
    if n >= 1 {
        w[1] = fixed_one();
    }
    for (p, v) in primes.iter().zip(pw) {
        w[*p] = v;
    }
    for i in 4..=n {
        let p = spf[i];
        if p != i {
            w[i] = fixed_mul(&w[p], &w[i / p]);
        }
    }
    w
}

pub fn smallest_prime_factors(n: usize) -> Vec<usize> {
    let mut spf: Vec<usize> = (0..=n).collect();
    let mut i = 2;
    while i * i <= n {
        if spf[i] == i {
            let mut j = i * i;
            while j <= n {
                if spf[j] == j {
                    spf[j] = i;
                }
                j += i;
            }
        }
        i += 1;
    }
    spf
}

/// `sum counts[n] * w[n]`, reduced in fixed-size chunks.
pub fn weighted_sum(counts: &[u64], w: &[BigInt]) -> BigInt {
    const CHUNK: usize = 4096;
    let len = counts.len().min(w.len());
    let parts: Vec<BigInt> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(len);
            let mut s = BigInt::zero();
            for i in lo..hi {
                match counts[i] {
                    0 => {}
                    1 => s += &w[i],
                    k => s += &w[i] * k,
                }
            }
            s
        })
        .collect();
    parts.into_iter().fold(BigInt::zero(), |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_weights_are_exactly_rounded() {
        let b = Beta::from_int(2);
        let w = neg_pow_fixed(3, &b);
        // |w - 2^F/9| <= 1/2
        let exact = BigRational::new(fixed_one(), 9.into());
        let diff = (BigRational::from_integer(w) - exact).abs();
        assert!(diff <= BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn fractional_weights_match_integer_path() {
        // beta = 2 through the transcendental path agrees to the last bits
        let b = Beta::new(BigRational::new(3.into(), 2.into())).unwrap();
        let two = b.scaled(2);
        assert_eq!(two.as_integer(), Some(3));
        let direct = neg_pow_fixed(7, &Beta::from_int(3));
        let via_float = float_to_fixed(&(-(float_u64(7).ln() * Beta::from_int(3).to_float())).exp(), FRAC_BITS);
        assert!((direct - via_float).abs() <= BigInt::from(4));
        let w = weight_table(&b, 30);
        let exact = neg_pow_fixed(12, &b);
        assert!((&w[12] - exact).abs() <= BigInt::from(4));
        assert_eq!(w[1], fixed_one());
    }

    #[test]
    fn formatting() {
        assert_eq!(fixed_to_decimal(&fixed_one(), 5), "1");
        assert_eq!(Beta::new(BigRational::new(3.into(), 2.into())).unwrap().to_string(), "1.5");
        assert_eq!(Beta::new(BigRational::new(1.into(), 3.into())).unwrap().to_string(), "1/3");
        assert!(Beta::new(BigRational::zero()).is_err());
        assert_eq!(round_shift(&BigInt::from(6), 2), BigInt::from(2));
        assert_eq!(round_shift(&BigInt::from(10), 2), BigInt::from(2));
        assert_eq!(round_shift(&BigInt::from(-6), 2), BigInt::from(-2));
    }
}
