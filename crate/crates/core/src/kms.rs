//! Finite-level models of `Ô / closure(O*+)` and the extremal KMS states for
//! `beta > 1`.
//!
//! At level `m` a point of the model is an orbit of `O/mO` under the image of
//! the totally positive units. A state is attached to `x = (g, omega)` with
//! `g` a fractional ideal prime to `m` and `omega` invertible mod `m`; it is
//! the normalized measure
//!
//! ```text
//! sum over integral a in the class of g^-1:  N(a)^-beta * delta(h_a * omega)
//! ```
//!
//! where `h_a` is a totally positive generator of `g*a` (unique up to `O*+`).

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{inv_mod, mod_floor};
use crate::class_group::ClassGroup;
use crate::error::{invalid, Error, Result};
use crate::ideal::{enumerate_ideals, tp_principal_generator, Ideal};
use crate::precision::{fixed_to_float, neg_pow, weight_table, Beta, Float};
use crate::quad_field::{FieldElement, QuadField};

type Residue = (i64, i64);

/// `O/mO` modulo the image of `O*+`.
#[derive(Clone, Debug)]
pub struct LevelModel {
    field: QuadField,
    m: i64,
    /// Canonical (least) residue of each orbit, in increasing order.
    points: Vec<Residue>,
    orbit_sizes: Vec<usize>,
    index: HashMap<Residue, usize>,
    invertible: Vec<bool>,
}

fn mul_res(field: QuadField, m: i64, x: Residue, y: Residue) -> Residue {
    let (m, t, n) = (m as i128, field.omega_trace() as i128, field.omega_norm() as i128);
    let (a, b, c, d) = (x.0 as i128, x.1 as i128, y.0 as i128, y.1 as i128);
    let bd = b * d % m;
    let u = mod_floor(a * c - bd * n, m);
    let v = mod_floor(a * d + b * c + bd * t, m);
    (u as i64, v as i64)
}

/// Residue of `z` mod `m`; `z` must have denominator prime to `m`.
pub fn residue_mod(z: &FieldElement, m: i64) -> Result<Residue> {
    let den = z.denominator();
    let mm = BigInt::from(m);
    let dm = den.mod_floor(&mm).to_i64().expect("reduced");
    let inv = inv_mod(dm as i128, m as i128)
        .ok_or_else(|| Error::Validation(format!("{z} has a denominator sharing a factor with {m}")))?;
    let s = z.scale(&BigRational::from_integer(den));
    let x = s.a().numer().mod_floor(&mm).to_i128().expect("reduced");
    let y = s.b().numer().mod_floor(&mm).to_i128().expect("reduced");
    let m = m as i128;
    Ok((mod_floor(x * inv, m) as i64, mod_floor(y * inv, m) as i64))
}

impl LevelModel {
    pub fn new(field: QuadField, m: u64) -> Result<LevelModel> {
        if m == 0 {
            return invalid("modulus must be at least 1");
        }
        let side = if field.is_rational() { 1 } else { m };
        if m.saturating_mul(side) > 4_000_000 {
            return invalid("level model too large");
        }
        let m = m as i64;
        let unit = match field.tp_unit_generator() {
            Some(u) => Some(residue_mod(&u, m)?),
            None => None,
        };
        let mut index = HashMap::new();
        let mut points = Vec::new();
        let mut orbit_sizes = Vec::new();
        let ys = if field.is_rational() { 1 } else { m };
        for x in 0..m {
            for y in 0..ys {
                let r = (x, y);
                if index.contains_key(&r) {
                    continue;
                }
                let k = points.len();
                index.insert(r, k);
                let mut size = 1;
                if let Some(u) = unit {
                    let mut cur = mul_res(field, m, r, u);
                    while cur != r {
                        index.insert(cur, k);
                        size += 1;
                        cur = mul_res(field, m, cur, u);
                    }
                }
                points.push(r);
                orbit_sizes.push(size);
            }
        }
        let invertible = points
            .iter()
            .map(|&r| {
                if m == 1 {
                    return true;
                }
                let z = FieldElement::from_ints(field, r.0, r.1);
                let nz = z.norm().numer().mod_floor(&BigInt::from(m));
                nz.gcd(&BigInt::from(m)).is_one()
            })
            .collect();
        Ok(LevelModel { field, m, points, orbit_sizes, index, invertible })
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn modulus(&self) -> u64 {
        self.m as u64
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(i64, i64)] {
        &self.points
    }

    pub fn orbit_size(&self, i: usize) -> usize {
        self.orbit_sizes[i]
    }

    pub fn is_invertible(&self, i: usize) -> bool {
        self.invertible[i]
    }

    /// The orbit containing `z`, which must be integral at the primes of `m`.
    pub fn point_of(&self, z: &FieldElement) -> Result<usize> {
        if z.field() != self.field {
            return Err(Error::FieldMismatch);
        }
        Ok(self.index[&residue_mod(z, self.m)?])
    }

    pub fn point_element(&self, i: usize) -> FieldElement {
        let (x, y) = self.points[i];
        FieldElement::from_ints(self.field, x, y)
    }
}

/// A finitely supported function on the points of a level model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestFunction {
    pub name: String,
    pub values: Vec<BigRational>,
}

impl TestFunction {
    pub fn one(model: &LevelModel) -> TestFunction {
        TestFunction { name: "one".into(), values: vec![BigRational::one(); model.len()] }
    }

    /// Indicator of the invertible residues.
    pub fn units(model: &LevelModel) -> TestFunction {
        let values = (0..model.len()).map(|i| if model.is_invertible(i) { BigRational::one() } else { BigRational::zero() }).collect();
        TestFunction { name: "units".into(), values }
    }

    /// Indicator of the listed points.
    pub fn indicator(model: &LevelModel, points: &[usize]) -> Result<TestFunction> {
        let mut values = vec![BigRational::zero(); model.len()];
        for &p in points {
            if p >= model.len() {
                return invalid(format!("point {p} outside the model"));
            }
            values[p] = BigRational::one();
        }
        let name = format!("ind:{}", points.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(","));
        Ok(TestFunction { name, values })
    }

    pub fn from_values(name: &str, model: &LevelModel, values: Vec<BigRational>) -> Result<TestFunction> {
        if values.len() != model.len() {
            return invalid("one value per model point is required");
        }
        Ok(TestFunction { name: name.into(), values })
    }

    pub fn add(&self, other: &TestFunction) -> TestFunction {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        TestFunction { name: format!("{}+{}", self.name, other.name), values }
    }
}

/// A point `x = (g, omega)` with `g*omega` a unit at the primes of `m`.
#[derive(Clone, Debug)]
pub struct KmsPoint {
    pub g: Ideal,
    /// Integral lift of the component at the primes dividing `m`.
    pub omega: FieldElement,
    /// Narrow class of `g^-1`.
    pub class: usize,
}

impl KmsPoint {
    pub fn new(group: &ClassGroup, model: &LevelModel, g: Ideal, omega: FieldElement) -> Result<KmsPoint> {
        if g.field() != model.field() || omega.field() != model.field() || group.field() != model.field() {
            return Err(Error::FieldMismatch);
        }
        let m = model.modulus();
        let (a, _, c) = g.hnf();
        let norm_num = (a as u64) * (c as u64);
        if norm_num.gcd(&m) != 1 || (g.denom() as u64).gcd(&m) != 1 {
            return invalid(format!("ideal {g} is not prime to the modulus {m}"));
        }
        if !omega.is_integral() {
            return invalid("omega must be integral");
        }
        if !model.is_invertible(model.point_of(&omega)?) {
            return invalid(format!("omega = {omega} is not invertible mod {m}"));
        }
        let class = group.class_of(&g.inv()?)?;
        Ok(KmsPoint { g, omega, class })
    }

    /// `(g k^-1, k omega)`, the same point of the model space written
    /// differently, for totally positive `k` prime to `m`.
    pub fn translate(&self, group: &ClassGroup, model: &LevelModel, k: &FieldElement) -> Result<KmsPoint> {
        if !k.is_totally_positive()? {
            return invalid(format!("{k} is not totally positive"));
        }
        let g = self.g.mul(&Ideal::principal(&k.inv()?)?)?;
        let (u, v) = residue_mod(&(k * &self.omega), model.m)?;
        KmsPoint::new(group, model, g, FieldElement::from_ints(model.field(), u, v))
    }
}

/// One term of the weighted sum behind a state.
#[derive(Clone, Debug)]
pub struct MassTerm {
    /// The integral ideal `a = h g^-1`.
    pub ideal: Ideal,
    pub norm: u64,
    /// `h_a * omega`, integral at the primes of `m`.
    pub point_value: FieldElement,
    /// Model point of `point_value`.
    pub point: usize,
    /// `N(a)^-beta` in fixed point.
    pub weight: BigInt,
}

/// All terms with `N(a) <= cutoff`, sorted by ideal.
pub fn mass_terms(
    model: &LevelModel,
    x: &KmsPoint,
    beta: &Beta,
    cutoff: u64,
) -> Result<Vec<MassTerm>> {
    let field = model.field();
    let ideals: Vec<(Ideal, u64)> = enumerate_ideals(field, cutoff)?;
    let w = weight_table(beta, cutoff);
    let terms: Vec<Option<MassTerm>> = ideals
        .into_par_iter()
        .map(|(a, n)| -> Result<Option<MassTerm>> {
            let ga = x.g.mul(&a)?;
            let h = if field.is_rational() {
                let [b, _] = ga.basis();
                Some(b)
            } else {
                tp_principal_generator(&ga)?
            };
            let Some(h) = h else { return Ok(None) };
            let z = &h * &x.omega;
            let point = model.point_of(&z)?;
            Ok(Some(MassTerm { ideal: a, norm: n, point_value: z, point, weight: w[n as usize].clone() }))
        })
        .collect::<Result<_>>()?;
    let terms: Vec<MassTerm> = terms.into_iter().flatten().collect();
    if terms.is_empty() {
        return Err(Error::Check("no ideal of the required class below the cutoff".into()));
    }
    Ok(terms)
}

/// Unnormalized masses per model point and their total.
#[derive(Clone, Debug)]
pub struct PointMasses {
    pub masses: Vec<BigInt>,
    pub total: BigInt,
}

pub fn point_masses(terms: &[MassTerm], model: &LevelModel) -> PointMasses {
    let mut masses = vec![BigInt::zero(); model.len()];
    for t in terms {
        masses[t.point] += &t.weight;
    }
    let total = masses.iter().sum();
    PointMasses { masses, total }
}

#[derive(Clone, Debug)]
pub struct KmsValue {
    /// `sum f(p) mass(p) / sum mass(p)` of the truncated masses, exactly.
    pub value: BigRational,
    /// Truncated partition function, fixed point.
    pub partition: BigInt,
}

pub fn eval_with(masses: &PointMasses, f: &TestFunction) -> Result<KmsValue> {
    if f.values.len() != masses.masses.len() {
        return invalid("test function does not match the level model");
    }
    let num = f
        .values
        .iter()
        .zip(&masses.masses)
        .fold(BigRational::zero(), |acc, (v, m)| acc + v * BigRational::from_integer(m.clone()));
    Ok(KmsValue { value: num / BigRational::from_integer(masses.total.clone()), partition: masses.total.clone() })
}

/// `phi_{beta,x}(f)` truncated at ideal norm `cutoff`.
pub fn kms_eval(
    model: &LevelModel,
    x: &KmsPoint,
    f: &TestFunction,
    beta: &Beta,
    cutoff: u64,
) -> Result<KmsValue> {
    if !beta.gt_one() {
        return invalid("extremal KMS states of this form need beta > 1");
    }
    let terms = mass_terms(model, x, beta, cutoff)?;
    eval_with(&point_masses(&terms, model), f)
}

#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub mu_s: BigInt,
    pub mu_hs: BigInt,
    /// `mu(hS) / mu(S)`.
    pub ratio: Float,
    /// `N(h)^-beta`.
    pub expected: Float,
    pub deviation: f64,
}

/// Compares `mu(hS)` with `N(h)^-beta mu(S)`, both truncated at `cutoff`.
///
/// A term lies in `hS` when `h` divides its ideal and the residue of
/// `point_value / h` lies in `S`.
pub fn measure_scaling_check(
    model: &LevelModel,
    x: &KmsPoint,
    h: &FieldElement,
    s: &[usize],
    beta: &Beta,
    cutoff: u64,
) -> Result<ScalingReport> {
    if h.is_zero() || !h.is_integral() || !h.is_totally_positive()? {
        return invalid("h must be a nonzero integral totally positive element");
    }
    if s.iter().any(|&p| p >= model.len()) {
        return invalid("S escapes the level model");
    }
    let in_s = |p: usize| s.contains(&p);
    let hi = Ideal::principal(h)?;
    let hinv = h.inv()?;
    let hi_inv = hi.inv()?;
    let terms = mass_terms(model, x, beta, cutoff)?;
    let mut mu_s = BigInt::zero();
    let mut mu_hs = BigInt::zero();
    for t in &terms {
        if in_s(t.point) {
            mu_s += &t.weight;
        }
        // h | a  <=>  a * h^-1 is integral
        if t.ideal.mul(&hi_inv)?.is_integral() {
            let q = &t.point_value * &hinv;
            if in_s(model.point_of(&q)?) {
                mu_hs += &t.weight;
            }
        }
    }
    if mu_s.is_zero() {
        return invalid("S carries no mass below the cutoff");
    }
    let ratio = fixed_to_float(&mu_hs) / fixed_to_float(&mu_s);
    let nh = h.abs_norm().to_integer().to_u64().ok_or(Error::Overflow("norm of h"))?;
    let expected = neg_pow(nh, beta);
    let deviation = ((&ratio / &expected) - Float::from(1u8)).to_f64().value().abs();
    Ok(ScalingReport { mu_s, mu_hs, ratio, expected, deviation })
}

/// Whether two points lie in the same `K*+`-orbit: `g_x g_y^-1 = (k)` with
/// `k` totally positive and `omega_y` in the orbit of `k omega_x`.
pub fn same_orbit(model: &LevelModel, x: &KmsPoint, y: &KmsPoint) -> Result<bool> {
    let q = x.g.mul(&y.g.inv()?)?;
    let Some(k) = tp_principal_generator(&q)? else { return Ok(false) };
    Ok(model.point_of(&(&k * &x.omega))? == model.point_of(&y.omega)?)
}

#[derive(Clone, Debug)]
pub struct OrbitReport {
    /// `values[i][j]`: state of point `i` on function `j`.
    pub values: Vec<Vec<BigRational>>,
    pub partitions: Vec<BigInt>,
    /// Pairs in the same orbit whose values differ (must be empty).
    pub violations: Vec<(usize, usize)>,
    /// Pairs in different orbits that some function separates.
    pub separated: Vec<(usize, usize)>,
}

impl OrbitReport {
    pub fn consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn state_orbit_check(
    model: &LevelModel,
    points: &[KmsPoint],
    battery: &[TestFunction],
    beta: &Beta,
    cutoff: u64,
) -> Result<OrbitReport> {
    let mut values = Vec::new();
    let mut partitions = Vec::new();
    for x in points {
        let terms = mass_terms(model, x, beta, cutoff)?;
        let masses = point_masses(&terms, model);
        values.push(battery.iter().map(|f| eval_with(&masses, f).map(|v| v.value)).collect::<Result<Vec<_>>>()?);
        partitions.push(masses.total);
    }
    let mut violations = Vec::new();
    let mut separated = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let same = same_orbit(model, &points[i], &points[j])?;
            let equal = values[i] == values[j] && partitions[i] == partitions[j];
            if same && !equal {
                violations.push((i, j));
            }
            if !same && !equal {
                separated.push((i, j));
            }
        }
    }
    Ok(OrbitReport { values, partitions, violations, separated })
}
