//! Small-integer number theory used throughout the crate.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Returns the square root if `n` is a perfect square.
pub fn exact_sqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let r = isqrt_u128(n as u128) as i128;
    (r * r == n).then_some(r)
}

pub fn is_squarefree(d: i64) -> bool {
    if d == 0 {
        return false;
    }
    let mut n = d.unsigned_abs();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut p = 3u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            return false;
        }
        p += 2;
    }
    true
}

/// Primes up to and including `n` (sieve of Eratosthenes).
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

pub fn mod_floor(a: i128, m: i128) -> i128 {
    a.mod_floor(&m)
}

pub fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u128 % m as u128;
    let m128 = m as u128;
    let mut base = (b % m) as u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * base % m128;
        }
        base = base * base % m128;
        e >>= 1;
    }
    r as u64
}

/// Legendre/Kronecker symbol (D|p) for a prime `p`.
pub fn kronecker(disc: i64, p: u64) -> i8 {
    if p == 2 {
        if disc % 2 == 0 {
            return 0;
        }
        return match disc.rem_euclid(8) {
            1 | 7 => 1,
            _ => -1,
        };
    }
    let a = disc.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// A square root of `a` modulo the odd prime `p` (Tonelli–Shanks).
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    let mut q = p - 1;
    let mut s = 0;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mulm = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mulm(tt, tt);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mulm(b, b);
        t = mulm(t, c);
        r = mulm(r, b);
    }
    Some(r)
}

/// Extended gcd: returns (g, x, y) with a*x + b*y = g >= 0.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i128, m: i128) -> Option<i128> {
    let (g, x, _) = ext_gcd(mod_floor(a, m), m);
    (g == 1).then(|| mod_floor(x, m))
}

pub fn to_i128(x: &BigInt) -> Option<i128> {
    x.to_i128()
}

/// Formats `num/den` with `sig` significant decimal digits, rounding half to even.
///
/// Plain positional notation is used when the decimal exponent lies in
/// `[-12, sig)`, scientific notation otherwise.
pub fn format_decimal(num: &BigInt, den: &BigInt, sig: usize) -> String {
    assert!(!den.is_zero(), "zero denominator");
    assert!(sig >= 1);
    if num.is_zero() {
        return "0".to_string();
    }
    let negative = (num.sign() == Sign::Minus) != (den.sign() == Sign::Minus);
    let n = num.abs();
    let d = den.abs();
    // estimate the decimal exponent e with 10^e <= n/d < 10^(e+1)
    let mut e = n.to_string().len() as i64 - d.to_string().len() as i64;
    let ten = BigInt::from(10);
    let ge = |e: i64| -> bool {
        // n/d >= 10^e
        if e >= 0 {
            n >= &d * ten.pow(e as u32)
        } else {
            &n * ten.pow((-e) as u32) >= d
        }
    };
    while !ge(e) {
        e -= 1;
    }
    while ge(e + 1) {
        e += 1;
    }
    // scaled = round(n/d * 10^(sig-1-e))
    let shift = sig as i64 - 1 - e;
    let (sn, sd) = if shift >= 0 {
        (&n * ten.pow(shift as u32), d.clone())
    } else {
        (n.clone(), &d * ten.pow((-shift) as u32))
    };
    let (mut q, r) = sn.div_rem(&sd);
    let twice = &r * 2;
    if twice > sd || (twice == sd && q.is_odd()) {
        q += 1;
    }
    let mut digits = q.to_string();
    if digits.len() > sig {
        // rounding carried into a new digit
        digits.truncate(sig);
        e += 1;
    }
    let body = if e >= -12 && e < sig as i64 {
        if e >= 0 {
            let int_len = e as usize + 1;
            let (ip, fp) = digits.split_at(int_len);
            let fp = fp.trim_end_matches('0');
            if fp.is_empty() {
                ip.to_string()
            } else {
                format!("{ip}.{fp}")
            }
        } else {
            let zeros = "0".repeat((-e - 1) as usize);
            format!("0.{zeros}{}", digits.trim_end_matches('0'))
        }
    } else {
        let (h, t) = digits.split_at(1);
        let t = t.trim_end_matches('0');
        if t.is_empty() {
            format!("{h}e{e}")
        } else {
            format!("{h}.{t}e{e}")
        }
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}
