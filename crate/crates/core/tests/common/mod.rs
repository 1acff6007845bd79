//! Independent oracles: binary quadratic forms, brute-force ideal lattices,
//! Kronecker-character ideal counts and a Pell search. None of this code
//! calls into the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(u, v, g)` with `u a + v b = g = gcd(a, b)`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        return if a >= 0 { (1, 0, a) } else { (-1, 0, -a) };
    }
    let (u, v, g) = ext_gcd(b, a.rem_euclid(b));
    (v, u - (a.div_euclid(b)) * v, g)
}

pub fn is_squarefree(n: i64) -> bool {
    let n = n.unsigned_abs();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p * p) {
            return false;
        }
        p += 1;
    }
    true
}

/// Fundamental discriminants `D` with `1 < |D| <= bound`.
pub fn fundamental_discriminants(bound: i64) -> Vec<i64> {
    let mut out = Vec::new();
    for d in -bound..=bound {
        if d == 0 || d == 1 {
            continue;
        }
        let ok = if d.rem_euclid(4) == 1 {
            is_squarefree(d)
        } else if d.rem_euclid(4) == 0 {
            let m = d / 4;
            (m.rem_euclid(4) == 2 || m.rem_euclid(4) == 3) && is_squarefree(m)
        } else {
            false
        };
        if ok {
            out.push(d);
        }
    }
    out
}

/// The squarefree `d` with `Q(sqrt d)` of discriminant `disc`.
pub fn d_of_disc(disc: i64) -> i64 {
    if disc.rem_euclid(4) == 1 {
        disc
    } else {
        disc / 4
    }
}

pub type Form = (i64, i64, i64);

fn isqrt(n: i64) -> i64 {
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Reduced positive definite forms of discriminant `disc < 0`.
pub fn reduced_definite_forms(disc: i64) -> Vec<Form> {
    let mut out = Vec::new();
    let mut a = 1;
    while 3 * a * a <= -disc {
        for b in -a + 1..=a {
            if (b * b - disc) % (4 * a) != 0 {
                continue;
            }
            let c = (b * b - disc) / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            if gcd(gcd(a, b), c) == 1 {
                out.push((a, b, c));
            }
        }
        a += 1;
    }
    out
}

/// Reduction of a positive definite form.
pub fn reduce_definite((mut a, mut b, mut c): Form) -> Form {
    loop {
        if b > a || b <= -a {
            // b -> b mod 2a into (-a, a]
            let k = (a - b).div_euclid(2 * a);
            let nb = b + 2 * k * a;
            c += k * (b + k * a);
            b = nb;
        }
        if a > c {
            (a, b, c) = (c, -b, a);
            continue;
        }
        if a == c && b < 0 {
            b = -b;
        }
        return (a, b, c);
    }
}

/// Reduced indefinite forms `0 < b < sqrt D`, `sqrt D - b < 2|a| < sqrt D + b`.
pub fn reduced_indefinite_forms(disc: i64) -> Vec<Form> {
    let s = isqrt(disc);
    let mut out = Vec::new();
    for b in 1..=s {
        if (b * b - disc) % 4 != 0 {
            continue;
        }
        let ac = (b * b - disc) / 4;
        for a in 1..=ac.abs() {
            if ac % a != 0 {
                continue;
            }
            for sa in [a, -a] {
                let c = ac / sa;
                // sqrt D is irrational, so compare squares
                let two_a = 2 * a;
                // sqrt D - b < 2a  <=>  sqrt D < 2a + b  <=>  D < (2a + b)^2
                let left = disc < (two_a + b) * (two_a + b);
                // 2a < sqrt D + b  <=>  2a - b < sqrt D  <=>  2a - b < 0 or (2a - b)^2 < D
                let right = two_a - b < 0 || (two_a - b) * (two_a - b) < disc;
                // b < sqrt D  <=> b^2 < D (D is not a square)
                if left && right && b * b < disc && gcd(gcd(sa, b), c) == 1 {
                    out.push((sa, b, c));
                }
            }
        }
    }
    out
}

/// `sqrt D` comparisons for the indefinite rho step.
fn rho((_a, b, c): Form, disc: i64) -> Form {
    let s = isqrt(disc);
    let m = 2 * c.abs();
    // r = -b mod 2|c|, chosen in (sqrt D - 2|c|, sqrt D) when |c| < sqrt D,
    // otherwise in (-|c|, |c|]
    let mut r = (-b).rem_euclid(m);
    if c.abs() * c.abs() < disc {
        // largest r < sqrt D in the class; sqrt D irrational so r <= s
        while r <= s - m {
            r += m;
        }
        while r > s {
            r -= m;
        }
    } else {
        while r > c.abs() {
            r -= m;
        }
        while r <= -c.abs() {
            r += m;
        }
    }
    (c, r, (r * r - disc) / (4 * c))
}

fn is_reduced_indefinite((a, b, _c): Form, disc: i64) -> bool {
    let two_a = 2 * a.abs();
    b > 0 && b * b < disc && disc < (two_a + b) * (two_a + b) && (two_a - b < 0 || (two_a - b) * (two_a - b) < disc)
}

/// Canonical member of the proper equivalence class of an indefinite form:
/// the least form on its rho cycle of reduced forms.
pub fn canonical_indefinite(f: Form, disc: i64) -> Form {
    let mut g = f;
    let mut steps = 0;
    while !is_reduced_indefinite(g, disc) {
        g = rho(g, disc);
        steps += 1;
        assert!(steps < 10_000, "rho did not reach a reduced form");
    }
    let start = g;
    let mut best = g;
    loop {
        g = rho(g, disc);
        best = best.min(g);
        if g == start {
            return best;
        }
    }
}

/// Dirichlet composition of two primitive forms of the same discriminant.
pub fn compose((a1, b1, _c1): Form, (a2, b2, _c2): Form, disc: i64) -> Form {
    let s = (b1 + b2) / 2;
    let (u1, v1, e1) = ext_gcd(a1, a2);
    let (u2, w, e) = ext_gcd(e1, s);
    let (u, v) = (u2 * u1, u2 * v1);
    let a3 = a1 * a2 / (e * e);
    let num = (u as i128) * (a1 as i128) * (b2 as i128)
        + (v as i128) * (a2 as i128) * (b1 as i128)
        + (w as i128) * ((b1 as i128) * (b2 as i128) + disc as i128) / 2;
    let m = 2 * a3 as i128;
    let b3 = (num / e as i128).rem_euclid(m) as i64;
    assert_eq!((b3 as i128 * b3 as i128 - disc as i128) % (4 * a3 as i128), 0, "composition produced a bad form");
    let c3 = (b3 * b3 - disc) / (4 * a3);
    (a3, b3, c3)
}

/// The narrow class group of discriminant `disc` through forms: its order
/// and invariant factors.
pub struct FormClassGroup {
    pub disc: i64,
    pub classes: Vec<Form>,
}

impl FormClassGroup {
    pub fn new(disc: i64) -> FormClassGroup {
        let classes = if disc < 0 {
            reduced_definite_forms(disc)
        } else {
            let set: BTreeSet<Form> =
                reduced_indefinite_forms(disc).into_iter().map(|f| canonical_indefinite(f, disc)).collect();
            set.into_iter().collect()
        };
        FormClassGroup { disc, classes }
    }

    pub fn order(&self) -> usize {
        self.classes.len()
    }

    fn canon(&self, f: Form) -> Form {
        if self.disc < 0 {
            reduce_definite(f)
        } else {
            canonical_indefinite(f, self.disc)
        }
    }

    fn identity(&self) -> Form {
        let b = if self.disc.rem_euclid(4) == 0 { 0 } else { 1 };
        self.canon((1, b, (b * b - self.disc) / 4))
    }

    pub fn element_order(&self, f: Form) -> u64 {
        let e = self.identity();
        let mut g = f;
        let mut k = 1;
        while g != e {
            g = self.canon(compose(g, f, self.disc));
            k += 1;
            assert!(k <= 10_000);
        }
        k
    }

    /// Invariant factors `n_1 | n_2 | ...`, from the counts of elements
    /// killed by each prime power.
    pub fn invariants(&self) -> Vec<u64> {
        let orders: Vec<u64> = self.classes.iter().map(|&f| self.element_order(f)).collect();
        let h = orders.len() as u64;
        let mut primes = Vec::new();
        let mut n = h;
        let mut p = 2;
        while n > 1 {
            if n.is_multiple_of(p) {
                primes.push(p);
                while n.is_multiple_of(p) {
                    n /= p;
                }
            }
            p += 1;
        }
        // per prime, the sizes of the cyclic p-factors, largest first
        let mut per_prime: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for &p in &primes {
            let mut killed = Vec::new();
            let mut pj = 1u64;
            loop {
                let c = orders.iter().filter(|&&o| pj.is_multiple_of(o)).count() as u64;
                let stable = killed.last() == Some(&c);
                killed.push(c);
                if stable {
                    break;
                }
                pj *= p;
            }
            // killed[j] = p^(number of factors of size >= p^i, summed over i <= j)
            let logs: Vec<u32> = killed.iter().map(|&c| log_exact(c, p)).collect();
            let mut at_least: Vec<u32> = Vec::new();
            for j in 1..logs.len() {
                at_least.push(logs[j] - logs[j - 1]);
            }
            let mut sizes = Vec::new();
            for (i, w) in at_least.iter().enumerate() {
                let next = at_least.get(i + 1).copied().unwrap_or(0);
                for _ in 0..(w - next) {
                    sizes.push(p.pow(i as u32 + 1));
                }
            }
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            per_prime.insert(p, sizes);
        }
        let len = per_prime.values().map(Vec::len).max().unwrap_or(0);
        let mut inv: Vec<u64> = (0..len).map(|i| per_prime.values().map(|s| s.get(i).copied().unwrap_or(1)).product()).collect();
        inv.reverse();
        inv
    }
}

fn log_exact(mut c: u64, p: u64) -> u32 {
    let mut k = 0;
    while c > 1 {
        assert_eq!(c % p, 0, "subgroup order is not a prime power");
        c /= p;
        k += 1;
    }
    k
}

/// Kronecker symbol `(disc / n)` by factoring `n`.
pub fn kronecker(disc: i64, n: u64) -> i64 {
    let mut result = 1i64;
    let mut n = n;
    let mut p = 2u64;
    while n > 1 {
        if p * p > n {
            p = n;
        }
        while n.is_multiple_of(p) {
            n /= p;
            result *= kronecker_prime(disc, p);
        }
        p += 1;
    }
    result
}

fn kronecker_prime(disc: i64, p: u64) -> i64 {
    if p == 2 {
        return match disc.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        };
    }
    let a = disc.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    // Euler's criterion
    let mut r = 1u64;
    let mut b = a;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    if r == 1 {
        1
    } else {
        -1
    }
}

/// Number of ideals of norm `n` as `sum_{m | n} chi_D(m)` (`D = 1` gives 1).
pub fn ideal_count_by_character(disc: i64, n: u64) -> u64 {
    if disc == 1 {
        return 1;
    }
    let s: i64 = (1..=n).filter(|m| n.is_multiple_of(*m)).map(|m| kronecker(disc, m)).sum();
    s as u64
}

/// Number of integral ideals of norm `n`, by brute force over HNF matrices
/// `[(a, 0), (b, c)]` with `ac = n` whose span is closed under `w`.
pub fn ideal_count_hnf(d: i64, n: i64) -> u64 {
    if d == 1 {
        return 1;
    }
    // w^2 = t w - m
    let (t, m) = if d.rem_euclid(4) == 1 { (1, (1 - d) / 4) } else { (0, -d) };
    let in_lattice = |x: i64, y: i64, a: i64, b: i64, c: i64| -> bool {
        if y % c != 0 {
            return false;
        }
        (x - (y / c) * b) % a == 0
    };
    let mut count = 0;
    for a in 1..=n {
        if n % a != 0 {
            continue;
        }
        let c = n / a;
        for b in 0..a {
            // w * a = a w, w * (b + c w) = -c m + (b + c t) w
            if in_lattice(0, a, a, b, c) && in_lattice(-c * m, b + c * t, a, b, c) && in_lattice(b, c, a, b, c) {
                count += 1;
            }
        }
    }
    count
}

/// Fundamental unit of `Q(sqrt d)`, `d > 1`, by brute force over
/// `x^2 - D y^2 = +-4` as `((x, y), norm)`, meaning `(x + y sqrt D)/2`.
pub fn pell_fundamental(d: i64) -> ((i128, i128), i64) {
    let disc = if d.rem_euclid(4) == 1 { d } else { 4 * d } as i128;
    for y in 1i128..10_000_000 {
        for (target, norm) in [(-4i128, -1i64), (4, 1)] {
            let x2 = disc * y * y + target;
            if x2 <= 0 {
                continue;
            }
            let x = (x2 as f64).sqrt() as i128;
            for xx in [x - 1, x, x + 1] {
                if xx > 0 && xx * xx == x2 {
                    return ((xx, y), norm);
                }
            }
        }
    }
    panic!("no unit found for d = {d}");
}

/// Zeta values used as reference constants.
pub const ZETA2: f64 = 1.644_934_066_848_226_4;
pub const ZETA4: f64 = 1.082_323_233_711_138_2;
pub const CATALAN: f64 = 0.915_965_594_177_219;

/// Mobius function up to `n` by sieving.
pub fn mobius_table(n: usize) -> Vec<i64> {
    let mut mu = vec![1i64; n + 1];
    let mut composite = vec![false; n + 1];
    for p in 2..=n {
        if composite[p] {
            continue;
        }
        for m in (p..=n).step_by(p) {
            if m > p {
                composite[m] = true;
            }
            mu[m] = -mu[m];
        }
        for m in (p * p..=n).step_by(p * p) {
            mu[m] = 0;
        }
    }
    mu
}
