//! Text syntax for fields, rationals, elements `a+b*w`, ideals, test
//! functions and finite-induction suite specs.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::ideal::Ideal;
use crate::kms::{LevelModel, TestFunction};
use crate::precision::Beta;
use crate::quad_field::{FieldElement, QuadField};

/// Largest `|d|` accepted for a field spec.
pub const MAX_D: i64 = 1_000_000_000;

/// Longest accepted numeral, in characters.
const MAX_NUMERAL: usize = 256;

fn perr<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse(msg.into()))
}

/// `d`, `Q`, `Q(i)` or `Q(sqrt(d))`.
pub fn parse_field(s: &str) -> Result<QuadField> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let body = match t.as_str() {
        "Q" | "QQ" => "1",
        "Q(i)" => "-1",
        other => other.strip_prefix("Q(sqrt(").and_then(|r| r.strip_suffix("))")).unwrap_or(other),
    };
    let d: i64 = match body.parse() {
        Ok(d) => d,
        Err(_) => return perr(format!("bad field spec {s:?}")),
    };
    if d.unsigned_abs() > MAX_D as u64 {
        return Err(Error::Validation(format!("|d| must be at most {MAX_D}")));
    }
    QuadField::new(d)
}

fn parse_digits(s: &str) -> Result<BigInt> {
    if s.is_empty() || s.len() > MAX_NUMERAL || !s.bytes().all(|b| b.is_ascii_digit()) {
        return perr(format!("bad numeral {s:?}"));
    }
    Ok(BigInt::from_str(s).expect("digits"))
}

/// `7`, `-3/4` or `1.25`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let q = if let Some((n, d)) = body.split_once('/') {
        let d = parse_digits(d)?;
        if d.is_zero() {
            return perr("zero denominator");
        }
        BigRational::new(parse_digits(n)?, d)
    } else if let Some((i, f)) = body.split_once('.') {
        let whole = if i.is_empty() { BigInt::zero() } else { parse_digits(i)? };
        let frac = parse_digits(f)?;
        let scale = num_traits::pow(BigInt::from(10), f.len());
        BigRational::new(whole * &scale + frac, scale)
    } else {
        BigRational::from_integer(parse_digits(body)?)
    };
    Ok(if neg { -q } else { q })
}

/// A positive rational exponent.
pub fn parse_beta(s: &str) -> Result<Beta> {
    Beta::new(parse_rational(s)?)
}

/// `a+b*w`, with terms in any order: `3`, `w`, `-w`, `1/2-3*w`, `2w`.
pub fn parse_element(field: QuadField, s: &str) -> Result<FieldElement> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return perr("empty element");
    }
    let mut a = BigRational::zero();
    let mut b = BigRational::zero();
    // split before every sign that starts a term
    let mut terms = Vec::new();
    let mut start = 0;
    for (i, c) in t.char_indices() {
        if (c == '+' || c == '-') && i > start {
            terms.push(&t[start..i]);
            start = i;
        }
    }
    terms.push(&t[start..]);
    for term in terms {
        let (neg, body) = match term.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, term.strip_prefix('+').unwrap_or(term)),
        };
        let (coeff, is_w) = match body.strip_suffix('w') {
            Some(c) => {
                let c = c.strip_suffix('*').unwrap_or(c);
                (if c.is_empty() { BigRational::one() } else { parse_rational(c)? }, true)
            }
            None => (parse_rational(body)?, false),
        };
        let coeff = if neg { -coeff } else { coeff };
        if is_w {
            b += coeff;
        } else {
            a += coeff;
        }
    }
    if field.is_rational() && !b.is_zero() {
        return Err(Error::Validation("Q has no w component".into()));
    }
    FieldElement::new(field, a, b)
}

/// `(g1, g2, ...)` or `g1,g2,...`: the ideal generated by the elements.
pub fn parse_ideal(field: QuadField, s: &str) -> Result<Ideal> {
    let t = s.trim();
    let inner = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(t);
    let gens = inner.split(',').map(|g| parse_element(field, g)).collect::<Result<Vec<_>>>()?;
    Ideal::from_generators(field, &gens)
}

/// A test function before it is attached to a level model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FunctionSpec {
    One,
    Units,
    /// Indicator of the model points of the listed residues.
    Indicator(Vec<String>),
}

/// `one`, `units` or `ind:r1,r2,...` with residues written as elements.
pub fn parse_function(s: &str) -> Result<FunctionSpec> {
    let t = s.trim();
    match t {
        "one" | "1" => Ok(FunctionSpec::One),
        "units" => Ok(FunctionSpec::Units),
        _ => match t.strip_prefix("ind:") {
            Some(list) if !list.trim().is_empty() => {
                Ok(FunctionSpec::Indicator(list.split(',').map(|r| r.trim().to_string()).collect()))
            }
            _ => perr(format!("bad function spec {s:?}")),
        },
    }
}

impl FunctionSpec {
    pub fn resolve(&self, model: &LevelModel) -> Result<TestFunction> {
        match self {
            FunctionSpec::One => Ok(TestFunction::one(model)),
            FunctionSpec::Units => Ok(TestFunction::units(model)),
            FunctionSpec::Indicator(residues) => {
                let mut points = Vec::with_capacity(residues.len());
                for r in residues {
                    let z = parse_element(model.field(), r)?;
                    if !z.is_integral() {
                        return Err(Error::Validation(format!("residue {r} is not integral")));
                    }
                    points.push(model.point_of(&z)?);
                }
                points.sort_unstable();
                points.dedup();
                let mut f = TestFunction::indicator(model, &points)?;
                f.name = format!("ind:{}", residues.join(","));
                Ok(f)
            }
        }
    }
}

/// Which finite-induction checks a suite runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteChecks {
    All,
    BalancedProduct,
    Involution,
    Stages,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteSpec {
    pub max_order: usize,
    pub max_x: usize,
    pub checks: SuiteChecks,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        SuiteSpec { max_order: 24, max_x: 4, checks: SuiteChecks::All }
    }
}

/// Largest group order a suite may request.
pub const MAX_SUITE_ORDER: usize = 64;

/// Comma-separated `key=value` pairs over `max_order`, `max_x` and
/// `checks` (`all`, `balanced`, `involution`, `stages`); empty means the
/// defaults.
pub fn parse_suite(s: &str) -> Result<SuiteSpec> {
    let mut spec = SuiteSpec::default();
    for pair in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let Some((k, v)) = pair.split_once('=') else {
            return perr(format!("expected key=value, got {pair:?}"));
        };
        let num = || -> Result<usize> { v.trim().parse().map_err(|_| Error::Parse(format!("bad number {v:?}"))) };
        match k.trim() {
            "max_order" => spec.max_order = num()?,
            "max_x" => spec.max_x = num()?,
            "checks" => {
                spec.checks = match v.trim() {
                    "all" => SuiteChecks::All,
                    "balanced" => SuiteChecks::BalancedProduct,
                    "involution" => SuiteChecks::Involution,
                    "stages" => SuiteChecks::Stages,
                    other => return perr(format!("unknown check set {other:?}")),
                }
            }
            other => return perr(format!("unknown suite key {other:?}")),
        }
    }
    if spec.max_order == 0 || spec.max_order > MAX_SUITE_ORDER || spec.max_x == 0 || spec.max_x > 6 {
        return Err(Error::Validation(format!("suite needs 1 <= max_order <= {MAX_SUITE_ORDER} and 1 <= max_x <= 6")));
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn fields() {
        assert_eq!(parse_field("Q").unwrap(), QuadField::rationals());
        assert_eq!(parse_field("Q(i)").unwrap().d(), -1);
        assert_eq!(parse_field("Q(sqrt(-5))").unwrap().d(), -5);
        assert_eq!(parse_field(" 3 ").unwrap().d(), 3);
        assert!(matches!(parse_field("4"), Err(Error::Validation(_))));
        assert!(matches!(parse_field("x"), Err(Error::Parse(_))));
        assert!(parse_field("-9223372036854775808").is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("-3/4").unwrap(), q(-3, 4));
        assert_eq!(parse_rational("1.25").unwrap(), q(5, 4));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1e3").is_err());
        assert!(parse_rational("--1").is_err());
        assert!(parse_beta("0").is_err());
        assert_eq!(parse_beta("1.5").unwrap().to_string(), "1.5");
    }

    #[test]
    fn elements_round_trip() {
        let k = QuadField::new(-5).unwrap();
        let z = parse_element(k, "1/2 - 3*w").unwrap();
        assert_eq!((z.a().clone(), z.b().clone()), (q(1, 2), q(-3, 1)));
        assert_eq!(parse_element(k, "2w+1").unwrap(), FieldElement::from_ints(k, 1, 2));
        assert_eq!(parse_element(k, "-w").unwrap(), FieldElement::from_ints(k, 0, -1));
        for s in ["0", "w", "-w", "3-2*w", "-1/2*w", "7/3+w"] {
            assert_eq!(parse_element(k, s).unwrap().to_string(), s);
        }
        assert!(parse_element(QuadField::rationals(), "w").is_err());
        assert!(parse_element(k, "1+").is_err());
        assert!(parse_element(k, "w*w").is_err());
    }

    #[test]
    fn ideals_and_functions() {
        let k = QuadField::new(-5).unwrap();
        let p = parse_ideal(k, "(2, 1+w)").unwrap();
        assert_eq!(p.hnf(), (2, 1, 1));
        assert!(parse_ideal(k, "()").is_err());
        assert_eq!(parse_function("ind:1, 3").unwrap(), FunctionSpec::Indicator(vec!["1".into(), "3".into()]));
        assert!(parse_function("ind:").is_err());
        let model = LevelModel::new(QuadField::rationals(), 2).unwrap();
        let f = parse_function("ind:1").unwrap().resolve(&model).unwrap();
        assert_eq!(f.values.iter().filter(|v| v.is_one()).count(), 1);
    }

    #[test]
    fn suites() {
        assert_eq!(parse_suite("").unwrap(), SuiteSpec::default());
        let s = parse_suite("max_order=8, checks=stages").unwrap();
        assert_eq!((s.max_order, s.max_x, s.checks), (8, 4, SuiteChecks::Stages));
        assert!(parse_suite("max_order=0").is_err());
        assert!(parse_suite("depth=3").is_err());
        assert!(parse_suite("max_order").is_err());
    }
}
