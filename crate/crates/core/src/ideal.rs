//! Fractional ideals in Hermite normal form, prime splitting, enumeration by
//! norm and principality with a totally positive generator.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{exact_sqrt, inv_mod, is_prime, kronecker, mod_floor, primes_up_to, sqrt_mod_prime};
use crate::error::{invalid, Error, Result};
use crate::quad_field::{FieldElement, QuadField};

/// A fractional ideal `M/den` where `M` is the integral ideal with Z-basis
/// `a` and `b + c*w` (`0 <= b < a`, `c | a`, `c | b`).
///
/// For Q the basis collapses to `a` (with `b = 0`, `c = 1`). The pair
/// `(M, den)` is reduced so that no integer `> 1` divides both `den` and `M`,
/// which makes structural equality coincide with ideal equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ideal {
    field: QuadField,
    a: i64,
    b: i64,
    c: i64,
    den: i64,
}

fn overflow() -> Error {
    Error::Overflow("ideal arithmetic")
}

fn mul_elems(field: QuadField, x: (i128, i128), y: (i128, i128)) -> Result<(i128, i128)> {
    let t = field.omega_trace() as i128;
    let n = field.omega_norm() as i128;
    let yy = x.1.checked_mul(y.1).ok_or_else(overflow)?;
    let u = x.0.checked_mul(y.0).and_then(|p| p.checked_sub(yy.checked_mul(n)?)).ok_or_else(overflow)?;
    let v = x
        .0
        .checked_mul(y.1)
        .and_then(|p| p.checked_add(x.1.checked_mul(y.0)?))
        .and_then(|p| p.checked_add(yy.checked_mul(t)?))
        .ok_or_else(overflow)?;
    Ok((u, v))
}

/// HNF `(a, b, c)` of the Z-lattice spanned by `rows` (coordinates in `{1, w}`).
fn lattice_hnf(mut rows: Vec<(i128, i128)>, rational: bool) -> Result<(i128, i128, i128)> {
    if rational {
        let a = rows.iter().fold(0i128, |g, r| g.gcd(&r.0));
        if a == 0 {
            return invalid("zero ideal");
        }
        return Ok((a, 0, 1));
    }
    // eliminate the w-column down to a single row
    loop {
        let pivot = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.1 != 0)
            .min_by_key(|(_, r)| r.1.unsigned_abs())
            .map(|(i, _)| i);
        let Some(p) = pivot else {
            return invalid("lattice is not of full rank");
        };
        let (px, py) = rows[p];
        let mut done = true;
        for (i, r) in rows.iter_mut().enumerate() {
            if i == p || r.1 == 0 {
                continue;
            }
            let q = r.1.div_euclid(py);
            r.0 = r.0.checked_sub(q.checked_mul(px).ok_or_else(overflow)?).ok_or_else(overflow)?;
            r.1 -= q * py;
            if r.1 != 0 {
                done = false;
            }
        }
        if done {
            let (mut bx, mut c) = rows[p];
            if c < 0 {
                bx = -bx;
                c = -c;
            }
            let a = rows.iter().enumerate().filter(|(i, _)| *i != p).fold(0i128, |g, (_, r)| g.gcd(&r.0));
            if a == 0 {
                return invalid("lattice is not of full rank");
            }
            return Ok((a, mod_floor(bx, a), c));
        }
    }
}

/// HNF of the O-module generated by integral elements.
fn module_hnf(field: QuadField, gens: &[(i128, i128)]) -> Result<(i128, i128, i128)> {
    let mut rows = Vec::with_capacity(gens.len() * 2);
    for &g in gens {
        rows.push(g);
        if !field.is_rational() {
            rows.push(mul_elems(field, g, (0, 1))?);
        }
    }
    lattice_hnf(rows, field.is_rational())
}

fn rat_to_i128(q: &BigRational) -> Result<i128> {
    debug_assert!(q.is_integer());
    q.numer().to_i128().ok_or_else(overflow)
}

impl Ideal {
    fn from_parts(field: QuadField, hnf: (i128, i128, i128), den: i128) -> Result<Ideal> {
        let (a, b, c) = hnf;
        // over Q only `a / den` carries information
        let (b, c, g) = if field.is_rational() {
            (0, a.gcd(&den), a.gcd(&den))
        } else {
            (b, c, a.gcd(&b).gcd(&c).gcd(&den))
        };
        let cast = |v: i128| i64::try_from(v / g).map_err(|_| overflow());
        Ok(Ideal { field, a: cast(a)?, b: cast(b)?, c: cast(c)?, den: cast(den)? })
    }

    pub fn unit(field: QuadField) -> Ideal {
        Ideal { field, a: 1, b: 0, c: 1, den: 1 }
    }

    /// Ideal generated by the given elements.
    pub fn from_generators(field: QuadField, gens: &[FieldElement]) -> Result<Ideal> {
        if gens.iter().any(|g| g.field() != field) {
            return Err(Error::FieldMismatch);
        }
        let gens: Vec<&FieldElement> = gens.iter().filter(|g| !g.is_zero()).collect();
        if gens.is_empty() {
            return invalid("an ideal needs at least one nonzero generator");
        }
        let den = gens.iter().fold(BigInt::one(), |l, g| l.lcm(&g.denominator()));
        let den_q = BigRational::from_integer(den.clone());
        let mut rows = Vec::with_capacity(gens.len());
        for g in gens {
            let s = g.scale(&den_q);
            rows.push((rat_to_i128(s.a())?, rat_to_i128(s.b())?));
        }
        let hnf = module_hnf(field, &rows)?;
        Ideal::from_parts(field, hnf, den.to_i128().ok_or_else(overflow)?)
    }

    pub fn principal(x: &FieldElement) -> Result<Ideal> {
        Ideal::from_generators(x.field(), std::slice::from_ref(x))
    }

    /// Builds an integral ideal from HNF data, checking closure under `w`.
    pub fn from_hnf(field: QuadField, a: i64, b: i64, c: i64) -> Result<Ideal> {
        if a <= 0 || c <= 0 || b < 0 || b >= a || a % c != 0 || b % c != 0 {
            return invalid(format!("({a}, {b}, {c}) is not in Hermite normal form"));
        }
        if field.is_rational() && (b != 0 || c != 1) {
            return invalid("ideals of Z have HNF (a, 0, 1)");
        }
        let id = Ideal { field, a, b, c, den: 1 };
        if !field.is_rational() {
            let wb = mul_elems(field, (b as i128, c as i128), (0, 1))?;
            let wa = (0i128, a as i128);
            if !id.contains_int(wb) || !id.contains_int(wa) {
                return invalid(format!("({a}, {b}, {c}) is not an O-module"));
            }
        }
        Ok(id)
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn hnf(&self) -> (i64, i64, i64) {
        (self.a, self.b, self.c)
    }

    pub fn denom(&self) -> i64 {
        self.den
    }

    pub fn is_integral(&self) -> bool {
        self.den == 1
    }

    pub fn norm(&self) -> BigRational {
        if self.field.is_rational() {
            return BigRational::new(BigInt::from(self.a), BigInt::from(self.den));
        }
        BigRational::new(
            BigInt::from(self.a) * BigInt::from(self.c),
            BigInt::from(self.den) * BigInt::from(self.den),
        )
    }

    /// Norm as an integer, for integral ideals.
    pub fn integral_norm(&self) -> Option<u64> {
        self.is_integral().then(|| (self.a as u64) * (self.c as u64))
    }

    /// Z-basis of the ideal.
    pub fn basis(&self) -> [FieldElement; 2] {
        let d = BigInt::from(self.den);
        let r = |n: i64| BigRational::new(BigInt::from(n), d.clone());
        if self.field.is_rational() {
            let a = FieldElement::from_rational(self.field, r(self.a));
            return [a.clone(), a];
        }
        [
            FieldElement::new(self.field, r(self.a), BigRational::zero()).expect("quadratic"),
            FieldElement::new(self.field, r(self.b), r(self.c)).expect("quadratic"),
        ]
    }

    fn int_basis(&self) -> Vec<(i128, i128)> {
        if self.field.is_rational() {
            vec![(self.a as i128, 0)]
        } else {
            vec![(self.a as i128, 0), (self.b as i128, self.c as i128)]
        }
    }

    pub fn mul(&self, other: &Ideal) -> Result<Ideal> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        let mut gens = Vec::with_capacity(4);
        for x in self.int_basis() {
            for y in other.int_basis() {
                gens.push(mul_elems(self.field, x, y)?);
            }
        }
        let hnf = module_hnf(self.field, &gens)?;
        Ideal::from_parts(self.field, hnf, self.den as i128 * other.den as i128)
    }

    pub fn pow(&self, e: u32) -> Result<Ideal> {
        let mut acc = Ideal::unit(self.field);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn conj(&self) -> Ideal {
        if self.field.is_rational() {
            return self.clone();
        }
        let t = self.field.omega_trace() as i128;
        let gens = [(self.a as i128, 0), (self.b as i128 + self.c as i128 * t, -(self.c as i128))];
        let hnf = module_hnf(self.field, &gens).expect("conjugate of a valid ideal");
        Ideal::from_parts(self.field, hnf, self.den as i128).expect("same size")
    }

    /// `I^-1 = den * conj(M) / N(M)`.
    pub fn inv(&self) -> Result<Ideal> {
        if self.field.is_rational() {
            return Ideal::from_parts(self.field, (self.den as i128, 0, 1), self.a as i128);
        }
        let nm = self.a as i128 * self.c as i128;
        let cj = self.conj();
        let d = self.den as i128;
        let hnf = (cj.a as i128 * d, cj.b as i128 * d, cj.c as i128 * d);
        Ideal::from_parts(self.field, hnf, nm * cj.den as i128)
    }

    fn contains_int(&self, z: (i128, i128)) -> bool {
        let (x, y) = z;
        if self.field.is_rational() {
            return y == 0 && x % self.a as i128 == 0;
        }
        let c = self.c as i128;
        if y % c != 0 {
            return false;
        }
        let k = y / c;
        (x - k * self.b as i128) % self.a as i128 == 0
    }

    pub fn contains(&self, z: &FieldElement) -> bool {
        if z.field() != self.field {
            return false;
        }
        let s = z.scale(&BigRational::from_integer(BigInt::from(self.den)));
        if !s.is_integral() {
            return false;
        }
        match (s.a().numer().to_i128(), s.b().numer().to_i128()) {
            (Some(x), Some(y)) => self.contains_int((x, y)),
            _ => {
                // large coordinates: reduce exactly
                self.reduce(z).map(|r| r.is_zero()).unwrap_or(false)
            }
        }
    }

    /// Representative of `z` modulo this ideal in the fundamental
    /// parallelogram of the HNF basis (both coordinates in `[0, 1)`).
    pub fn reduce(&self, z: &FieldElement) -> Result<FieldElement> {
        if z.field() != self.field {
            return Err(Error::FieldMismatch);
        }
        let den = BigRational::from_integer(BigInt::from(self.den));
        let s = z.scale(&den);
        let a = BigRational::from_integer(BigInt::from(self.a));
        let b = BigRational::from_integer(BigInt::from(self.b));
        let c = BigRational::from_integer(BigInt::from(self.c));
        let (mut x, mut y) = (s.a().clone(), s.b().clone());
        if !self.field.is_rational() {
            let k = (&y / &c).floor();
            y -= &k * &c;
            x -= &k * &b;
        }
        let k = (&x / &a).floor();
        x -= k * a;
        let r = FieldElement::new(self.field, x, y)?;
        Ok(r.scale(&den.recip()))
    }

    /// Canonical order: norm first, then the HNF entries.
    pub fn canonical_cmp(&self, other: &Ideal) -> Ordering {
        self.norm()
            .cmp(&other.norm())
            .then_with(|| (self.a, self.b, self.c, self.den).cmp(&(other.a, other.b, other.c, other.den)))
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y] = self.basis();
        let scaled = |e: &FieldElement| e.scale(&BigRational::from_integer(BigInt::from(self.den)));
        let body = if self.field.is_rational() {
            format!("({})", scaled(&x))
        } else {
            format!("({}, {})", scaled(&x), scaled(&y))
        };
        if self.den == 1 {
            write!(f, "{body}")
        } else {
            write!(f, "{body}/{}", self.den)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Split,
    Inert,
    Ramified,
    /// The base field: `(p)` itself is prime of norm `p`.
    Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeIdeal {
    pub ideal: Ideal,
    pub p: u64,
    pub norm: u64,
    pub residue_degree: u32,
    pub ramification: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplittingType {
    pub p: u64,
    pub kind: SplitKind,
    pub primes_above: Vec<PrimeIdeal>,
}

/// Decomposition of the rational prime `p` in `field`.
pub fn split_prime(field: QuadField, p: u64) -> Result<SplittingType> {
    if !is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    Ok(split_known_prime(field, p))
}

fn split_known_prime(field: QuadField, p: u64) -> SplittingType {
    let pi = p as i64;
    if field.is_rational() {
        let ideal = Ideal { field, a: pi, b: 0, c: 1, den: 1 };
        return SplittingType {
            p,
            kind: SplitKind::Rational,
            primes_above: vec![PrimeIdeal { ideal, p, norm: p, residue_degree: 1, ramification: 1 }],
        };
    }
    let t = field.omega_trace();
    let n = field.omega_norm();
    // roots of X^2 - tX + n mod p
    let roots: Vec<i64> = if p == 2 {
        (0..2).filter(|r| (r * r - t * r + n).rem_euclid(2) == 0).collect()
    } else {
        let disc = field.disc().rem_euclid(pi) as u64;
        match sqrt_mod_prime(disc, p) {
            None => Vec::new(),
            Some(s) => {
                let inv2 = inv_mod(2, pi as i128).expect("p odd") as i64;
                let mut rs: Vec<i64> = [s as i64, -(s as i64)]
                    .iter()
                    .map(|sq| ((t + sq).rem_euclid(pi) as i128 * inv2 as i128).rem_euclid(pi as i128) as i64)
                    .collect();
                rs.sort_unstable();
                rs.dedup();
                rs
            }
        }
    };
    let prime_at = |r: i64, e: u32| {
        let ideal = Ideal { field, a: pi, b: (-r).rem_euclid(pi), c: 1, den: 1 };
        PrimeIdeal { ideal, p, norm: p, residue_degree: 1, ramification: e }
    };
    let kind = match kronecker(field.disc(), p) {
        0 => SplitKind::Ramified,
        1 => SplitKind::Split,
        _ => SplitKind::Inert,
    };
    let mut primes_above = match kind {
        SplitKind::Inert => {
            let ideal = Ideal { field, a: pi, b: 0, c: pi, den: 1 };
            vec![PrimeIdeal { ideal, p, norm: p * p, residue_degree: 2, ramification: 1 }]
        }
        SplitKind::Ramified => vec![prime_at(roots[0], 2)],
        _ => roots.iter().map(|&r| prime_at(r, 1)).collect(),
    };
    primes_above.sort_by(|x, y| x.ideal.canonical_cmp(&y.ideal));
    SplittingType { p, kind, primes_above }
}

/// All prime ideals of norm up to a bound, sorted by norm.
#[derive(Clone, Debug)]
pub struct PrimeTable {
    field: QuadField,
    primes: Vec<PrimeIdeal>,
}

impl PrimeTable {
    pub fn new(field: QuadField, bound: u64) -> PrimeTable {
        let mut primes: Vec<PrimeIdeal> = primes_up_to(bound)
            .into_iter()
            .flat_map(|p| split_known_prime(field, p).primes_above)
            .filter(|q| q.norm <= bound)
            .collect();
        primes.sort_by(|x, y| x.norm.cmp(&y.norm).then_with(|| x.ideal.canonical_cmp(&y.ideal)));
        PrimeTable { field, primes }
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn primes(&self) -> &[PrimeIdeal] {
        &self.primes
    }

    /// The primes lying over rational primes `<= max_p`.
    pub fn restricted(&self, max_p: u64) -> PrimeTable {
        let primes = self.primes.iter().filter(|q| q.p <= max_p).cloned().collect();
        PrimeTable { field: self.field, primes }
    }

    /// Calls `visit(norm, factorization)` once for every integral ideal of
    /// norm at most `cutoff`, the factorization listing `(prime index, exponent)`.
    pub fn for_each_factorization(&self, cutoff: u64, mut visit: impl FnMut(u64, &[(usize, u32)])) {
        let mut stack = Vec::new();
        self.rec(0, 1, cutoff, &mut stack, &mut visit);
    }

    fn rec(
        &self,
        start: usize,
        norm: u64,
        cutoff: u64,
        stack: &mut Vec<(usize, u32)>,
        visit: &mut impl FnMut(u64, &[(usize, u32)]),
    ) {
        visit(norm, stack);
        for i in start..self.primes.len() {
            let q = self.primes[i].norm;
            if norm.saturating_mul(q) > cutoff {
                break;
            }
            let mut m = norm * q;
            let mut e = 1;
            while m <= cutoff {
                stack.push((i, e));
                self.rec(i + 1, m, cutoff, stack, visit);
                stack.pop();
                e += 1;
                m = match m.checked_mul(q) {
                    Some(v) => v,
                    None => break,
                };
            }
        }
    }

    /// Product of prime powers as an ideal.
    pub fn ideal_of(&self, factors: &[(usize, u32)]) -> Result<Ideal> {
        let mut acc = Ideal::unit(self.field);
        for &(i, e) in factors {
            acc = acc.mul(&self.primes[i].ideal.pow(e)?)?;
        }
        Ok(acc)
    }
}

/// All integral ideals of norm at most `cutoff`, sorted canonically.
pub fn enumerate_ideals(field: QuadField, cutoff: u64) -> Result<Vec<(Ideal, u64)>> {
    if cutoff < 1 {
        return invalid("cutoff must be at least 1");
    }
    let table = PrimeTable::new(field, cutoff);
    let mut out = Vec::new();
    let mut err = None;
    table.for_each_factorization(cutoff, |norm, fac| match table.ideal_of(fac) {
        Ok(id) => out.push((id, norm)),
        Err(e) => err = Some(e),
    });
    if let Some(e) = err {
        return Err(e);
    }
    out.sort_by(|x, y| x.0.canonical_cmp(&y.0));
    Ok(out)
}

/// Number of integral ideals of each norm `0..=cutoff` (index 0 unused).
pub fn ideal_counts(field: QuadField, cutoff: u64) -> Vec<u64> {
    let table = PrimeTable::new(field, cutoff);
    let mut counts = vec![0u64; cutoff as usize + 1];
    table.for_each_factorization(cutoff, |norm, _| counts[norm as usize] += 1);
    counts
}

/// Upper limit on the number of candidate rows scanned by the generator search.
const SEARCH_LIMIT: f64 = 5.0e8;

/// Some generator of the integral ideal `m`, if it is principal.
///
/// Scans elements `x*a + y*(b + c*w)` of the ideal row by row, solving the
/// norm equation `N = +-N(m)` exactly for `x` in each row. Every principal
/// ideal has a generator with both embeddings of absolute value at most
/// `sqrt(N(m) * eps)` (`eps = 1` for imaginary fields), which bounds `|y|`.
fn integral_generator(m: &Ideal) -> Result<Option<FieldElement>> {
    debug_assert!(m.is_integral());
    let field = m.field;
    if field.is_rational() {
        return Ok(Some(FieldElement::from_int(field, m.a)));
    }
    let norm = m.a as i128 * m.c as i128;
    let disc = field.disc() as i128;
    let t = field.omega_trace() as i128;
    let eps = if field.is_real() {
        let e = crate::quad_field::fundamental_unit(field).embeddings_f64().0;
        e.max(1.0)
    } else {
        1.0
    };
    let ymax_f = 2.0 * ((norm as f64) * eps / disc.unsigned_abs() as f64).sqrt() / m.c as f64 + 2.0;
    if !ymax_f.is_finite() || ymax_f > SEARCH_LIMIT {
        return invalid("fundamental unit too large for the principality search");
    }
    let ymax = ymax_f as i128;
    let signs: &[i128] = if field.is_real() { &[1, -1] } else { &[1] };
    let (a, b, c) = (m.a as i128, m.b as i128, m.c as i128);
    for step in 0..=(2 * ymax) {
        let y = if step % 2 == 0 { step / 2 } else { -(step + 1) / 2 };
        let big_y = y * c;
        for &s in signs {
            // X^2 + t*Y*X + n*Y^2 = s*N  has discriminant D*Y^2 + 4*s*N
            let dsc = match disc.checked_mul(big_y * big_y).and_then(|v| v.checked_add(4 * s * norm)) {
                Some(v) => v,
                None => return Err(overflow()),
            };
            let Some(r) = exact_sqrt(dsc) else { continue };
            for root in [r, -r] {
                let x2 = -t * big_y + root;
                if x2 % 2 != 0 {
                    continue;
                }
                let big_x = x2 / 2;
                if mod_floor(big_x - y * b, a) == 0 {
                    let g = FieldElement::new(
                        field,
                        BigRational::from_integer(BigInt::from(big_x)),
                        BigRational::from_integer(BigInt::from(big_y)),
                    )?;
                    return Ok(Some(g));
                }
            }
        }
    }
    Ok(None)
}

/// Some generator of `ideal` if it is principal.
pub fn principal_generator(ideal: &Ideal) -> Result<Option<FieldElement>> {
    let m = Ideal { den: 1, ..ideal.clone() };
    let den = BigRational::new(BigInt::one(), BigInt::from(ideal.den));
    Ok(integral_generator(&m)?.map(|g| g.scale(&den)))
}

/// A totally positive generator of `ideal`, if one exists, reduced to the
/// canonical representative of its orbit under totally positive units.
pub fn tp_principal_generator(ideal: &Ideal) -> Result<Option<FieldElement>> {
    let Some(g) = principal_generator(ideal)? else {
        return Ok(None);
    };
    let field = ideal.field;
    let tp = if field.is_imaginary() {
        Some(g)
    } else {
        let s1 = g.embedding_sign(0)?;
        let s2 = if field.is_rational() { s1 } else { g.embedding_sign(1)? };
        if s1 == s2 {
            Some(if s1 == Ordering::Less { -g } else { g })
        } else {
            let info = field.unit_info();
            match (info.fu_norm, info.fundamental_unit) {
                (Some(-1), Some(eps)) => {
                    let h = &eps * &g;
                    Some(if h.embedding_sign(0)? == Ordering::Less { -h } else { h })
                }
                _ => None,
            }
        }
    };
    match tp {
        Some(h) => Ok(Some(h.reduce_by_tp_units()?.1)),
        None => Ok(None),
    }
}
