//! The affine Hecke pair `P_O+ ⊂ P_K+`: group law, one-sided coset normal
//! forms, double-coset decomposition and convolution of bi-invariant
//! functions.
//!
//! `P_K+` is the group of pairs `(y, x)` with `y` in `K` and `x` totally
//! positive, multiplied by `(y, x)(y', x') = (y + x*y', x*x')`. `Γ = P_O+` is
//! the subgroup with `y` integral and `x` a totally positive unit.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::ideal::Ideal;
use crate::quad_field::{FieldElement, QuadField};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineElement {
    y: FieldElement,
    x: FieldElement,
}

impl AffineElement {
    pub fn new(y: FieldElement, x: FieldElement) -> Result<AffineElement> {
        if y.field() != x.field() {
            return Err(Error::FieldMismatch);
        }
        if x.is_zero() || !x.is_totally_positive()? {
            return invalid(format!("{x} is not totally positive"));
        }
        Ok(AffineElement { y, x })
    }

    pub fn identity(field: QuadField) -> AffineElement {
        AffineElement { y: field.zero(), x: field.one() }
    }

    pub fn field(&self) -> QuadField {
        self.x.field()
    }

    pub fn y(&self) -> &FieldElement {
        &self.y
    }

    pub fn x(&self) -> &FieldElement {
        &self.x
    }

    pub fn mul(&self, rhs: &AffineElement) -> Result<AffineElement> {
        if self.field() != rhs.field() {
            return Err(Error::FieldMismatch);
        }
        Ok(AffineElement { y: &self.y + &(&self.x * &rhs.y), x: &self.x * &rhs.x })
    }

    pub fn inv(&self) -> AffineElement {
        let xi = self.x.inv().expect("x is nonzero");
        AffineElement { y: -(&xi * &self.y), x: xi }
    }

    /// Whether the element lies in `Γ`.
    pub fn in_gamma(&self) -> bool {
        self.y.is_integral() && self.x.is_integral() && self.x.norm().is_one()
    }

    /// `1 / |N(x)|`, the value the modular function must take.
    pub fn norm_formula(&self) -> BigRational {
        self.x.abs_norm().recip()
    }
}

impl fmt::Display for AffineElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.y, self.x)
    }
}

fn mod_o(z: &FieldElement) -> FieldElement {
    Ideal::unit(z.field()).reduce(z).expect("same field")
}

/// Generators of `Γ`: the translations by `1` and `w`, and the totally
/// positive unit generator when there is one.
pub fn gamma_generators(field: QuadField) -> Vec<AffineElement> {
    let mut gens = vec![AffineElement { y: field.one(), x: field.one() }];
    if let Ok(w) = field.omega() {
        gens.push(AffineElement { y: w, x: field.one() });
    }
    if let Some(u) = field.tp_unit_generator() {
        gens.push(AffineElement { y: field.zero(), x: u });
    }
    gens
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Cosets `Γg`.
    Left,
    /// Cosets `gΓ`.
    Right,
}

/// Normal form of the coset of `g` on the given side. Two elements share a
/// normal form exactly when they lie in the same coset.
pub fn coset_canonical(side: Side, g: &AffineElement) -> AffineElement {
    let (u, xc) = g.x.reduce_by_tp_units().expect("x is totally positive");
    match side {
        // Γ(y, x) = {(b + u*y, u*x)}
        Side::Left => AffineElement { y: mod_o(&(&u * &g.y)), x: xc },
        // (y, x)Γ = {(y + x*b, x*u)}
        Side::Right => {
            let xo = Ideal::principal(&xc).expect("nonzero");
            AffineElement { y: xo.reduce(&g.y).expect("same field"), x: xc }
        }
    }
}

/// Normal form of the double coset `ΓgΓ`: the reduced `x` together with the
/// least point of the unit orbit of `y` modulo `O + x*O`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DoubleCosetKey {
    pub x: FieldElement,
    pub y: FieldElement,
}

pub fn double_coset_key(g: &AffineElement) -> DoubleCosetKey {
    let field = g.field();
    let (u, xc) = g.x.reduce_by_tp_units().expect("x is totally positive");
    let b = Ideal::from_generators(field, &[field.one(), xc.clone()]).expect("nonzero");
    let start = b.reduce(&(&u * &g.y)).expect("same field");
    let mut best = start.clone();
    if let Some(eta) = field.tp_unit_generator() {
        let mut cur = b.reduce(&(&eta * &start)).expect("same field");
        while cur != start {
            if cur < best {
                best = cur.clone();
            }
            cur = b.reduce(&(&eta * &cur)).expect("same field");
        }
    }
    DoubleCosetKey { x: xc, y: best }
}

#[derive(Clone, Debug)]
pub struct DoubleCosetDecomposition {
    pub g: AffineElement,
    pub left_reps: Vec<AffineElement>,
    pub right_reps: Vec<AffineElement>,
}

impl DoubleCosetDecomposition {
    /// Number of cosets `Γl` in `ΓgΓ`.
    pub fn l(&self) -> usize {
        self.left_reps.len()
    }

    /// Number of cosets `rΓ` in `ΓgΓ`.
    pub fn r(&self) -> usize {
        self.right_reps.len()
    }

    pub fn delta(&self) -> BigRational {
        BigRational::new((self.l() as u64).into(), (self.r() as u64).into())
    }
}

/// Hard cap on orbit sizes, to keep accidental huge inputs from running away.
pub const MAX_COSETS: usize = 1 << 20;

fn orbit(
    start: AffineElement,
    step: impl Fn(&AffineElement, &AffineElement) -> AffineElement,
    gens: &[AffineElement],
) -> Result<Vec<AffineElement>> {
    let mut seen = BTreeSet::new();
    seen.insert(start.clone());
    let mut queue = vec![start];
    let mut i = 0;
    while i < queue.len() {
        let cur = queue[i].clone();
        i += 1;
        for gamma in gens {
            let next = step(&cur, gamma);
            if seen.insert(next.clone()) {
                if seen.len() > MAX_COSETS {
                    return invalid("double coset has too many one-sided cosets");
                }
                queue.push(next);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// The left and right cosets making up `ΓgΓ`, found as the orbit of `Γg`
/// under right multiplication by `Γ` and of `gΓ` under left multiplication.
pub fn double_coset_decompose(g: &AffineElement) -> Result<DoubleCosetDecomposition> {
    let gens = gamma_generators(g.field());
    let left_reps = orbit(
        coset_canonical(Side::Left, g),
        |c, gamma| coset_canonical(Side::Left, &c.mul(gamma).expect("same field")),
        &gens,
    )?;
    let right_reps = orbit(
        coset_canonical(Side::Right, g),
        |c, gamma| coset_canonical(Side::Right, &gamma.mul(c).expect("same field")),
        &gens,
    )?;
    Ok(DoubleCosetDecomposition { g: g.clone(), left_reps, right_reps })
}

/// `L(g)/R(g)` from the coset counts.
pub fn delta(g: &AffineElement) -> Result<BigRational> {
    Ok(double_coset_decompose(g)?.delta())
}

pub type Coefficient = Complex<BigRational>;

/// A finitely supported `Γ`-bi-invariant function, stored as coefficients on
/// double cosets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckeFunction {
    field: QuadField,
    support: BTreeMap<DoubleCosetKey, (AffineElement, Coefficient)>,
}

fn real(q: BigRational) -> Coefficient {
    Complex::new(q, BigRational::zero())
}

impl HeckeFunction {
    pub fn zero(field: QuadField) -> HeckeFunction {
        HeckeFunction { field, support: BTreeMap::new() }
    }

    /// Characteristic function `[g]` of `ΓgΓ`.
    pub fn indicator(g: &AffineElement) -> HeckeFunction {
        HeckeFunction::term(g, real(BigRational::one()))
    }

    pub fn term(g: &AffineElement, c: Coefficient) -> HeckeFunction {
        let mut f = HeckeFunction::zero(g.field());
        f.add_term(g, c);
        f
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn add_term(&mut self, g: &AffineElement, c: Coefficient) {
        assert_eq!(g.field(), self.field, "field mismatch");
        let key = double_coset_key(g);
        // the key itself is a point of the double coset, so the stored
        // representative does not depend on which g was passed
        let rep = AffineElement { y: key.y.clone(), x: key.x.clone() };
        let entry = self.support.entry(key.clone()).or_insert_with(|| (rep, Complex::zero()));
        entry.1 = &entry.1 + &c;
        if entry.1.is_zero() {
            self.support.remove(&key);
        }
    }

    pub fn add(&self, other: &HeckeFunction) -> Result<HeckeFunction> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        let mut out = self.clone();
        for (g, c) in other.support.values() {
            out.add_term(g, c.clone());
        }
        Ok(out)
    }

    /// Value on the double coset of `g`.
    pub fn eval(&self, g: &AffineElement) -> Coefficient {
        self.support.get(&double_coset_key(g)).map(|e| e.1.clone()).unwrap_or_else(Complex::zero)
    }

    /// `(representative, coefficient)` pairs in key order.
    pub fn terms(&self) -> impl Iterator<Item = (&AffineElement, &Coefficient)> {
        self.support.values().map(|(g, c)| (g, c))
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// `f*(g) = conj(f(g^-1))`.
    pub fn star(&self) -> HeckeFunction {
        let mut out = HeckeFunction::zero(self.field);
        for (g, c) in self.support.values() {
            out.add_term(&g.inv(), c.conj());
        }
        out
    }

    /// `(f1*f2)(g) = sum over h in Γ\G of f1(g h^-1) f2(h)`.
    ///
    /// With `ΓaΓ = ∪ Γa_i` and `ΓbΓ = ∪ Γb_j`, the coefficient of `[ΓdΓ]` in
    /// `[a]*[b]` is the number of pairs with `Γa_i b_j = Γd` for a fixed `d`,
    /// i.e. the number of pairs landing anywhere in `ΓdΓ` divided by `L(d)`.
    pub fn convolve(&self, other: &HeckeFunction) -> Result<HeckeFunction> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        let mut cache: HashMap<DoubleCosetKey, DoubleCosetDecomposition> = HashMap::new();
        let mut decomp = |g: &AffineElement| -> Result<DoubleCosetDecomposition> {
            let key = double_coset_key(g);
            if let Some(d) = cache.get(&key) {
                return Ok(d.clone());
            }
            let d = double_coset_decompose(g)?;
            cache.insert(key, d.clone());
            Ok(d)
        };
        let mut out = HeckeFunction::zero(self.field);
        for (a, ca) in self.support.values() {
            let da = decomp(a)?;
            for (b, cb) in other.support.values() {
                let db = decomp(b)?;
                let mut hits: BTreeMap<DoubleCosetKey, (AffineElement, u64)> = BTreeMap::new();
                for ai in &da.left_reps {
                    for bj in &db.left_reps {
                        let p = ai.mul(bj)?;
                        hits.entry(double_coset_key(&p)).or_insert((p, 0)).1 += 1;
                    }
                }
                let cab = ca * cb;
                for (d, count) in hits.into_values() {
                    let ld = decomp(&d)?.l() as u64;
                    if count % ld != 0 {
                        return Err(Error::Check(format!("pair count {count} not divisible by L = {ld}")));
                    }
                    let k = BigRational::from_integer((count / ld).into());
                    out.add_term(&d, &cab * real(k));
                }
            }
        }
        Ok(out)
    }
}
