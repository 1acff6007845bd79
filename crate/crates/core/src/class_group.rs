//! Narrow and wide ideal class groups from prime generators and principality
//! relations.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ideal::{enumerate_ideals, principal_generator, tp_principal_generator, Ideal, PrimeTable};
use crate::quad_field::QuadField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    /// Modulo principal ideals with a totally positive generator.
    Narrow,
    /// Modulo all principal ideals.
    Wide,
}

/// A finite abelian class group with canonical representatives.
///
/// Index 0 is always the identity class, represented by `O`. The other
/// representatives are the least-norm integral ideals of their class, ties
/// broken by HNF, and are listed in that order.
#[derive(Clone, Debug)]
pub struct ClassGroup {
    field: QuadField,
    kind: ClassKind,
    reps: Vec<Ideal>,
    table: Vec<Vec<usize>>,
    generators: Vec<Ideal>,
    invariants: Vec<u64>,
}

/// Whether `i` and `j` lie in the same class. `i * conj(j)` differs from
/// `i * j^-1` by the positive rational `N(j)`, so it suffices to test it.
fn same_class(kind: ClassKind, i: &Ideal, j: &Ideal) -> Result<bool> {
    let q = integral(i).mul(&integral(j).conj())?;
    Ok(match kind {
        ClassKind::Narrow => tp_principal_generator(&q)?.is_some(),
        ClassKind::Wide => principal_generator(&q)?.is_some(),
    })
}

/// Clearing a positive rational denominator does not change the class.
fn integral(i: &Ideal) -> Ideal {
    let (a, b, c) = i.hnf();
    Ideal::from_hnf(i.field(), a, b, c).expect("stored HNF is valid")
}

fn find_class(kind: ClassKind, reps: &[Ideal], i: &Ideal) -> Result<Option<usize>> {
    for (k, r) in reps.iter().enumerate() {
        if same_class(kind, i, r)? {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

impl ClassGroup {
    pub fn narrow(field: QuadField) -> Result<ClassGroup> {
        ClassGroup::build(field, ClassKind::Narrow)
    }

    pub fn wide(field: QuadField) -> Result<ClassGroup> {
        ClassGroup::build(field, ClassKind::Wide)
    }

    pub fn build(field: QuadField, kind: ClassKind) -> Result<ClassGroup> {
        // Primes below the Minkowski bound generate the wide group. The kernel
        // of the narrow-to-wide map is generated by the class of (sqrt d),
        // a product of ramified primes, so adding those generates Cl+.
        let bound = field.minkowski_bound().floor() as u64;
        let disc = field.disc().unsigned_abs();
        let table = PrimeTable::new(field, bound.max(disc));
        let generators: Vec<Ideal> = table
            .primes()
            .iter()
            .filter(|p| p.norm <= bound || p.ramification == 2)
            .map(|p| p.ideal.clone())
            .collect();

        // closure of the trivial class under the generators
        let mut closure = vec![Ideal::unit(field)];
        let mut frontier = 0;
        while frontier < closure.len() {
            let cur = closure[frontier].clone();
            frontier += 1;
            for g in &generators {
                let prod = cur.mul(g)?;
                if find_class(kind, &closure, &prod)?.is_none() {
                    closure.push(integral(&prod));
                }
            }
        }
        let h = closure.len();

        // least-norm representatives
        let mut best: Vec<Option<Ideal>> = vec![None; h];
        best[0] = Some(Ideal::unit(field));
        let mut found = 1;
        let mut cutoff = bound.max(4);
        let mut scanned = 1;
        while found < h {
            for (id, norm) in enumerate_ideals(field, cutoff)? {
                if norm <= scanned {
                    continue;
                }
                let k = find_class(kind, &closure, &id)?.ok_or_else(|| {
                    Error::Check(format!("ideal {id} outside the generated class group"))
                })?;
                let better = match &best[k] {
                    None => true,
                    Some(b) => id.canonical_cmp(b).is_lt(),
                };
                if better {
                    if best[k].is_none() {
                        found += 1;
                    }
                    best[k] = Some(id);
                }
            }
            scanned = cutoff;
            cutoff = cutoff.saturating_mul(2);
        }
        let mut order: Vec<Ideal> = best.into_iter().map(|b| b.expect("all found")).collect();
        order[1..].sort_by(|a, b| a.canonical_cmp(b));
        let reps = order;

        let mut mtable = vec![vec![0usize; h]; h];
        for i in 0..h {
            for j in i..h {
                let prod = reps[i].mul(&reps[j])?;
                let k = find_class(kind, &reps, &prod)?
                    .ok_or_else(|| Error::Check("class group product left the group".into()))?;
                mtable[i][j] = k;
                mtable[j][i] = k;
            }
        }
        let invariants = invariant_factors(&mtable);
        Ok(ClassGroup { field, kind, reps, table: mtable, generators, invariants })
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn kind(&self) -> ClassKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.reps.len()
    }

    pub fn representatives(&self) -> &[Ideal] {
        &self.reps
    }

    /// Prime ideals used as generators.
    pub fn generators(&self) -> &[Ideal] {
        &self.generators
    }

    /// Invariant factors `n_1 | n_2 | ...`, empty for the trivial group.
    pub fn invariants(&self) -> &[u64] {
        &self.invariants
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }

    pub fn inverse(&self, i: usize) -> usize {
        (0..self.order()).find(|&j| self.table[i][j] == 0).expect("group")
    }

    pub fn element_order(&self, i: usize) -> u64 {
        element_order(&self.table, i)
    }

    /// Index of the class containing `ideal`.
    pub fn class_of(&self, ideal: &Ideal) -> Result<usize> {
        if ideal.field() != self.field {
            return Err(Error::FieldMismatch);
        }
        find_class(self.kind, &self.reps, ideal)?
            .ok_or_else(|| Error::Check(format!("ideal {ideal} matched no class")))
    }
}

fn element_order(table: &[Vec<usize>], i: usize) -> u64 {
    let mut k = 1;
    let mut x = i;
    while x != 0 {
        x = table[x][i];
        k += 1;
    }
    k
}

/// Invariant factors of a finite abelian group given by its table, from the
/// number of elements killed by each prime power.
pub fn invariant_factors(table: &[Vec<usize>]) -> Vec<u64> {
    let n = table.len() as u64;
    let orders: Vec<u64> = (0..table.len()).map(|i| element_order(table, i)).collect();
    let mut rest = n;
    let mut p = 2;
    // elementary divisors grouped by prime: exponents sorted descending
    let mut by_prime: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    while rest > 1 {
        if rest.is_multiple_of(p) {
            while rest.is_multiple_of(p) {
                rest /= p;
            }
            // r_k = log_p #{x : p^k x = 0}; the number of cyclic factors of
            // exponent >= k is r_k - r_{k-1}
            let mut r = vec![0u32];
            let mut k = 1;
            loop {
                let pk = p.pow(k);
                let cnt = orders.iter().filter(|&&o| pk % o == 0).count() as u64;
                let mut e = 0;
                let mut c = cnt;
                while c > 1 {
                    c /= p;
                    e += 1;
                }
                r.push(e);
                if r[k as usize] == r[k as usize - 1] {
                    break;
                }
                k += 1;
            }
            let ge: Vec<u32> = (1..r.len()).map(|k| r[k] - r[k - 1]).collect();
            let mut exps = Vec::new();
            for k in 0..ge.len() {
                let next = ge.get(k + 1).copied().unwrap_or(0);
                for _ in 0..(ge[k] - next) {
                    exps.push(k as u32 + 1);
                }
            }
            exps.sort_unstable_by(|a, b| b.cmp(a));
            by_prime.insert(p, exps);
        }
        p += 1;
    }
    let width = by_prime.values().map(|v| v.len()).max().unwrap_or(0);
    let mut out = vec![1u64; width];
    for (p, exps) in &by_prime {
        for (i, e) in exps.iter().enumerate() {
            out[width - 1 - i] *= p.pow(*e);
        }
    }
    out
}
