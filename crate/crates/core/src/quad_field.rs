//! Exact arithmetic in Q and quadratic fields Q(sqrt d).
//!
//! Elements are stored in the integral basis `{1, w}` where `w = (1+sqrt d)/2`
//! when `d = 1 mod 4` and `w = sqrt d` otherwise. The base field Q is encoded
//! as `d = 1`, in which case the `w`-coordinate is always zero.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{isqrt_u128, is_squarefree};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct QuadField {
    d: i64,
    disc: i64,
}

impl QuadField {
    pub fn new(d: i64) -> Result<Self> {
        if d == 0 {
            return invalid("d must be nonzero");
        }
        if !is_squarefree(d) {
            return invalid(format!("d = {d} is not squarefree"));
        }
        let disc = if d == 1 {
            1
        } else if d.rem_euclid(4) == 1 {
            d
        } else {
            d.checked_mul(4).ok_or(Error::Overflow("discriminant"))?
        };
        Ok(QuadField { d, disc })
    }

    pub fn rationals() -> Self {
        QuadField { d: 1, disc: 1 }
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn is_rational(&self) -> bool {
        self.d == 1
    }

    pub fn is_real(&self) -> bool {
        self.d > 1
    }

    pub fn is_imaginary(&self) -> bool {
        self.d < 0
    }

    pub fn degree(&self) -> u32 {
        if self.is_rational() {
            1
        } else {
            2
        }
    }

    /// Number of real embeddings.
    pub fn signature(&self) -> u32 {
        match self.d {
            1 => 1,
            d if d > 1 => 2,
            _ => 0,
        }
    }

    /// Trace of `w`; `w^2 = t*w - n`.
    pub fn omega_trace(&self) -> i64 {
        if self.is_rational() {
            0
        } else if self.disc % 2 != 0 {
            1
        } else {
            0
        }
    }

    /// Norm of `w`.
    pub fn omega_norm(&self) -> i64 {
        if self.is_rational() {
            0
        } else if self.disc % 2 != 0 {
            (1 - self.d) / 4
        } else {
            -self.d
        }
    }

    pub fn omega_symbol(&self) -> &'static str {
        if self.is_rational() {
            "1"
        } else if self.disc % 2 != 0 {
            "(1+sqrt(d))/2"
        } else {
            "sqrt(d)"
        }
    }

    /// Minkowski bound of the field.
    pub fn minkowski_bound(&self) -> f64 {
        let sd = (self.disc.unsigned_abs() as f64).sqrt();
        match self.signature() {
            1 => 1.0,
            2 => sd / 2.0,
            _ => 2.0 / std::f64::consts::PI * sd,
        }
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::from_int(*self, 0)
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::from_int(*self, 1)
    }

    /// The integral generator `w` (zero-free only for quadratic fields).
    pub fn omega(&self) -> Result<FieldElement> {
        if self.is_rational() {
            return invalid("Q has no quadratic generator");
        }
        Ok(FieldElement::from_ints(*self, 0, 1))
    }

    pub fn unit_info(&self) -> UnitInfo {
        UnitInfo::compute(*self)
    }

    /// Generator of the group of totally positive units, if it is nontrivial:
    /// `eps` or `eps^2` for real fields, a generator of the roots of unity for
    /// imaginary fields (positivity is vacuous there), nothing for Q.
    pub fn tp_unit_generator(&self) -> Option<FieldElement> {
        if self.is_rational() {
            return None;
        }
        if self.is_imaginary() {
            return Some(torsion_generator(*self));
        }
        let eps = fundamental_unit(*self);
        if eps.norm().is_one() {
            Some(eps)
        } else {
            Some(&eps * &eps)
        }
    }
}

impl fmt::Display for QuadField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "Q")
        } else {
            write!(f, "Q(sqrt({}))", self.d)
        }
    }
}

/// An element `a + b*w` with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    field: QuadField,
    a: BigRational,
    b: BigRational,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl FieldElement {
    pub fn new(field: QuadField, a: BigRational, b: BigRational) -> Result<Self> {
        if field.is_rational() && !b.is_zero() {
            return invalid("elements of Q have no w-coordinate");
        }
        Ok(FieldElement { field, a, b })
    }

    pub fn from_int(field: QuadField, a: i64) -> Self {
        FieldElement { field, a: rat(a), b: BigRational::zero() }
    }

    /// `a + b*w`; `b` is ignored (must be zero) for Q.
    pub fn from_ints(field: QuadField, a: i64, b: i64) -> Self {
        debug_assert!(!field.is_rational() || b == 0);
        FieldElement { field, a: rat(a), b: rat(b) }
    }

    pub fn from_rational(field: QuadField, a: BigRational) -> Self {
        FieldElement { field, a, b: BigRational::zero() }
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.a.is_integer() && self.b.is_integer()
    }

    /// Least common denominator of both coordinates.
    pub fn denominator(&self) -> BigInt {
        self.a.denom().lcm(self.b.denom())
    }

    pub fn conj(&self) -> FieldElement {
        if self.field.is_rational() {
            return self.clone();
        }
        // conj(w) = t - w
        let t = rat(self.field.omega_trace());
        FieldElement { field: self.field, a: &self.a + &self.b * t, b: -&self.b }
    }

    pub fn trace(&self) -> BigRational {
        if self.field.is_rational() {
            return self.a.clone();
        }
        &self.a * rat(2) + &self.b * rat(self.field.omega_trace())
    }

    /// Field norm `a^2 + a*b*Tr(w) + b^2*N(w)`; identity on Q.
    pub fn norm(&self) -> BigRational {
        if self.field.is_rational() {
            return self.a.clone();
        }
        let t = rat(self.field.omega_trace());
        let n = rat(self.field.omega_norm());
        &self.a * &self.a + &self.a * &self.b * t + &self.b * &self.b * n
    }

    pub fn abs_norm(&self) -> BigRational {
        self.norm().abs()
    }

    pub fn inv(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return invalid("inverse of zero");
        }
        if self.field.is_rational() {
            return Ok(FieldElement { field: self.field, a: self.a.recip(), b: BigRational::zero() });
        }
        let n = self.norm();
        let c = self.conj();
        Ok(FieldElement { field: self.field, a: c.a / &n, b: c.b / n })
    }

    pub fn try_mul(&self, rhs: &FieldElement) -> Result<FieldElement> {
        if self.field != rhs.field {
            return Err(Error::FieldMismatch);
        }
        Ok(self * rhs)
    }

    pub fn try_add(&self, rhs: &FieldElement) -> Result<FieldElement> {
        if self.field != rhs.field {
            return Err(Error::FieldMismatch);
        }
        Ok(self + rhs)
    }

    pub fn div(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.try_mul(&rhs.inv()?)
    }

    pub fn scale(&self, q: &BigRational) -> FieldElement {
        FieldElement { field: self.field, a: &self.a * q, b: &self.b * q }
    }

    pub fn pow(&self, mut e: u32) -> FieldElement {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Coordinates `(u, v)` with `x = u + v*sqrt(d)`.
    fn sqrt_coords(&self) -> (BigRational, BigRational) {
        if self.field.omega_trace() == 1 {
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            (&self.a + &self.b * &half, &self.b * half)
        } else {
            (self.a.clone(), self.b.clone())
        }
    }

    /// Exact sign of the real embedding `index` (0: sqrt d > 0, 1: conjugate).
    pub fn embedding_sign(&self, index: usize) -> Result<Ordering> {
        if self.field.is_rational() {
            return Ok(self.a.cmp(&BigRational::zero()));
        }
        if !self.field.is_real() {
            return invalid("imaginary fields have no real embeddings");
        }
        let (u, mut v) = self.sqrt_coords();
        if index == 1 {
            v = -v;
        }
        Ok(sign_of_surd(&u, &v, self.field.d))
    }

    /// True iff positive in every real embedding; vacuous for imaginary fields.
    pub fn is_totally_positive(&self) -> Result<bool> {
        if self.is_zero() {
            return invalid("total positivity of zero");
        }
        match self.field.signature() {
            0 => Ok(true),
            1 => Ok(self.a.is_positive()),
            _ => Ok(self.embedding_sign(0)? == Ordering::Greater
                && self.embedding_sign(1)? == Ordering::Greater),
        }
    }

    /// Floating-point images under the real embeddings (diagnostics and
    /// search bounds only, never used for decisions).
    pub fn embeddings_f64(&self) -> (f64, f64) {
        let (u, v) = self.sqrt_coords();
        let u = u.to_f64().unwrap_or(f64::NAN);
        let v = v.to_f64().unwrap_or(f64::NAN);
        let s = (self.field.d.unsigned_abs() as f64).sqrt();
        if self.field.is_real() {
            (u + v * s, u - v * s)
        } else {
            (u, v * s)
        }
    }
}

impl FieldElement {
    /// Canonical representative of the orbit `O*_+ * self`.
    ///
    /// Returns `(u, u*self)` with `u` a totally positive unit. Real fields use
    /// the window `1/e <= x/conj(x) < e` for the generator `e` of `O*_+`,
    /// which requires `self` totally positive; imaginary fields take the least
    /// element of the torsion orbit in coordinate order.
    pub fn reduce_by_tp_units(&self) -> Result<(FieldElement, FieldElement)> {
        let field = self.field;
        let Some(gen) = field.tp_unit_generator() else {
            return Ok((field.one(), self.clone()));
        };
        if self.is_zero() {
            return invalid("unit reduction of zero");
        }
        if field.is_imaginary() {
            let order = field.unit_info().torsion_order;
            let mut best = (field.one(), self.clone());
            let mut u = field.one();
            for _ in 1..order {
                u = &u * &gen;
                let cand = &u * self;
                if cand < best.1 {
                    best = (u.clone(), cand);
                }
            }
            return Ok(best);
        }
        if !self.is_totally_positive()? {
            return invalid("unit window reduction needs a totally positive element");
        }
        let gen_inv = gen.conj();
        let mut u = field.one();
        let mut x = self.clone();
        // x/conj(x) >= e  <=>  sigma_1(x - e*conj(x)) >= 0
        while (&x - &(&gen * &x.conj())).embedding_sign(0)? != Ordering::Less {
            x = &x * &gen_inv;
            u = &u * &gen_inv;
        }
        // x/conj(x) < 1/e  <=>  sigma_1(e*x - conj(x)) < 0
        while (&(&gen * &x) - &x.conj()).embedding_sign(0)? == Ordering::Less {
            x = &x * &gen;
            u = &u * &gen;
        }
        Ok((u, x))
    }
}

/// Sign of `u + v*sqrt(d)` for squarefree `d > 1`, decided by squaring.
fn sign_of_surd(u: &BigRational, v: &BigRational, d: i64) -> Ordering {
    let zero = BigRational::zero();
    let su = u.cmp(&zero);
    let sv = v.cmp(&zero);
    if sv == Ordering::Equal {
        return su;
    }
    if su == Ordering::Equal || su == sv {
        return sv;
    }
    let lhs = u * u;
    let rhs = v * v * rat(d);
    match lhs.cmp(&rhs) {
        Ordering::Greater => su,
        Ordering::Less => sv,
        // sqrt(d) is irrational so this cannot happen for nonzero u, v
        Ordering::Equal => Ordering::Equal,
    }
}

impl<'a> Add<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        assert_eq!(self.field, rhs.field, "field mismatch");
        FieldElement { field: self.field, a: &self.a + &rhs.a, b: &self.b + &rhs.b }
    }
}

impl<'a> Sub<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        assert_eq!(self.field, rhs.field, "field mismatch");
        FieldElement { field: self.field, a: &self.a - &rhs.a, b: &self.b - &rhs.b }
    }
}

impl<'a> Mul<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        assert_eq!(self.field, rhs.field, "field mismatch");
        let t = rat(self.field.omega_trace());
        let n = rat(self.field.omega_norm());
        let bb = &self.b * &rhs.b;
        FieldElement {
            field: self.field,
            a: &self.a * &rhs.a - &bb * n,
            b: &self.a * &rhs.b + &self.b * &rhs.a + bb * t,
        }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement { field: self.field, a: -&self.a, b: -&self.b }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

fn fmt_rat(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for FieldElement {
    /// Formats as `a+b*w`, omitting zero parts.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", fmt_rat(&self.a));
        }
        let wpart = if self.b.is_one() {
            "w".to_string()
        } else if (-&self.b).is_one() {
            "-w".to_string()
        } else {
            format!("{}*w", fmt_rat(&self.b))
        };
        if self.a.is_zero() {
            write!(f, "{wpart}")
        } else if wpart.starts_with('-') {
            write!(f, "{}{}", fmt_rat(&self.a), wpart)
        } else {
            write!(f, "{}+{}", fmt_rat(&self.a), wpart)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitInfo {
    /// Fundamental unit `eps > 1` (real fields only).
    pub fundamental_unit: Option<FieldElement>,
    /// Norm of the fundamental unit, `+1` or `-1` (real fields only).
    pub fu_norm: Option<i8>,
    /// Index `[O* : O*_+]`.
    pub index_plus: u32,
    pub torsion_order: u32,
}

impl UnitInfo {
    fn compute(field: QuadField) -> UnitInfo {
        let torsion_order = match field.d {
            -1 => 4,
            -3 => 6,
            _ => 2,
        };
        if field.is_rational() {
            // O* = {1, -1}, only 1 is positive
            return UnitInfo { fundamental_unit: None, fu_norm: None, index_plus: 2, torsion_order };
        }
        if field.is_imaginary() {
            return UnitInfo { fundamental_unit: None, fu_norm: None, index_plus: 1, torsion_order };
        }
        let eps = fundamental_unit(field);
        let fu_norm = if eps.norm().is_one() { 1 } else { -1 };
        // O*/(O*)^2 has representatives {1, -1, eps, -eps}; count the totally positive ones
        let one = field.one();
        let reps = [one.clone(), -&one, eps.clone(), -&eps];
        let positive = reps.iter().filter(|u| u.is_totally_positive().unwrap_or(false)).count() as u32;
        UnitInfo { fundamental_unit: Some(eps), fu_norm: Some(fu_norm), index_plus: 4 / positive, torsion_order }
    }
}

fn torsion_generator(field: QuadField) -> FieldElement {
    match field.d {
        // i = w, and (1+sqrt(-3))/2 = w is a primitive sixth root of unity
        -1 | -3 => FieldElement::from_ints(field, 0, 1),
        _ => FieldElement::from_int(field, -1),
    }
}

/// Fundamental unit `eps > 1` of a real quadratic field, read off the
/// continued fraction expansion of `w = (P0 + sqrt D)/2`.
///
/// The first convergent `p/q` with `N(p - q*w) = +-1` yields the unit
/// `conj(p - q*w)` up to sign.
pub fn fundamental_unit(field: QuadField) -> FieldElement {
    assert!(field.is_real(), "fundamental units exist only for real quadratic fields");
    static CACHE: OnceLock<Mutex<HashMap<i64, FieldElement>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(u) = cache.lock().expect("unit cache poisoned").get(&field.d) {
        return u.clone();
    }
    let eps = fundamental_unit_uncached(field);
    cache.lock().expect("unit cache poisoned").insert(field.d, eps.clone());
    eps
}

fn fundamental_unit_uncached(field: QuadField) -> FieldElement {
    let disc = BigInt::from(field.disc);
    let root = BigInt::from(isqrt_u128(field.disc as u128) as i64);
    let t = BigInt::from(field.omega_trace());
    let n = BigInt::from(field.omega_norm());
    let mut p_num = BigInt::from(field.disc.rem_euclid(2));
    let mut q_den = BigInt::from(2);
    let (mut p_prev, mut p_cur) = (BigInt::zero(), BigInt::one());
    let (mut q_prev, mut q_cur) = (BigInt::one(), BigInt::zero());
    loop {
        let offset = if q_den.is_negative() { BigInt::one() } else { BigInt::zero() };
        let a = (&p_num + &root + offset).div_floor(&q_den);
        let p_next = &a * &p_cur + &p_prev;
        let q_next = &a * &q_cur + &q_prev;
        p_prev = std::mem::replace(&mut p_cur, p_next);
        q_prev = std::mem::replace(&mut q_cur, q_next);
        // N(p - q w) = p^2 - p q t + q^2 n
        let norm = &p_cur * &p_cur - &p_cur * &q_cur * &t + &q_cur * &q_cur * &n;
        if norm.abs().is_one() {
            // conj(p - q w) = (p - q t) + q w
            let x = FieldElement {
                field,
                a: BigRational::from_integer(&p_cur - &q_cur * &t),
                b: BigRational::from_integer(q_cur.clone()),
            };
            return normalize_above_one(x);
        }
        let p_new = &a * &q_den - &p_num;
        let q_new = (&disc - &p_new * &p_new) / &q_den;
        p_num = p_new;
        q_den = q_new;
    }
}

/// Among `+-x`, `+-conj(x)` picks the one exceeding 1 in the first embedding.
fn normalize_above_one(x: FieldElement) -> FieldElement {
    let candidates = [x.clone(), -&x, x.conj(), -x.conj()];
    let one = x.field.one();
    candidates
        .into_iter()
        .find(|c| (c - &one).embedding_sign(0) == Ok(Ordering::Greater))
        .expect("one of +-x, +-conj(x) exceeds 1")
}
