//! Finite models of induced actions: balanced products `G ×_H X`, the
//! return-set and orbit conditions, the restricted transformation groupoid,
//! the involution `(x, y) -> (x^-1, xy)` and induction in stages.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{invalid, Result};

/// A finite group given by its multiplication table; element 0 is the
/// identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    pub name: String,
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    /// Validates the group axioms.
    pub fn from_table(name: &str, table: Vec<Vec<usize>>) -> Result<FiniteGroup> {
        let n = table.len();
        if n == 0 || table.iter().any(|r| r.len() != n || r.iter().any(|&v| v >= n)) {
            return invalid("group table must be square with entries in range");
        }
        for a in 0..n {
            if table[0][a] != a || table[a][0] != a {
                return invalid("element 0 must be the identity");
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return invalid(format!("not associative at ({a}, {b}, {c})"));
                    }
                }
            }
        }
        let mut inverse = vec![0; n];
        for (a, inv) in inverse.iter_mut().enumerate() {
            *inv = match (0..n).find(|&b| table[a][b] == 0) {
                Some(b) => b,
                None => return invalid(format!("element {a} has no inverse")),
            };
        }
        Ok(FiniteGroup { name: name.into(), table, inverse })
    }

    /// `Z/n_1 x ... x Z/n_k`, elements in mixed-radix order.
    pub fn abelian(factors: &[usize]) -> Result<FiniteGroup> {
        if factors.contains(&0) {
            return invalid("cyclic factors must be positive");
        }
        let n: usize = factors.iter().product();
        let digits = |mut a: usize| -> Vec<usize> {
            factors
                .iter()
                .map(|&f| {
                    let d = a % f;
                    a /= f;
                    d
                })
                .collect()
        };
        let encode = |ds: &[usize]| -> usize { ds.iter().zip(factors).rev().fold(0, |acc, (d, f)| acc * f + d) };
        let table = (0..n)
            .map(|a| {
                let da = digits(a);
                (0..n)
                    .map(|b| {
                        let s: Vec<usize> = digits(b).iter().zip(&da).zip(factors).map(|((x, y), f)| (x + y) % f).collect();
                        encode(&s)
                    })
                    .collect()
            })
            .collect();
        let name = if factors.is_empty() {
            "1".to_string()
        } else {
            factors.iter().map(|f| format!("Z/{f}")).collect::<Vec<_>>().join("x")
        };
        FiniteGroup::from_table(&name, table)
    }

    pub fn cyclic(n: usize) -> Result<FiniteGroup> {
        FiniteGroup::abelian(&[n])
    }

    /// `(Z/n)*`, with `labels()[i]` the residue of element `i`.
    pub fn units_mod(n: usize) -> Result<(FiniteGroup, Vec<usize>)> {
        if n < 2 {
            return invalid("modulus must be at least 2");
        }
        let labels: Vec<usize> = (1..n).filter(|&a| gcd(a, n) == 1).collect();
        let pos: BTreeMap<usize, usize> = labels.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let table = labels.iter().map(|&a| labels.iter().map(|&b| pos[&(a * b % n)]).collect()).collect();
        Ok((FiniteGroup::from_table(&format!("(Z/{n})*"), table)?, labels))
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.table[a][b] == self.table[b][a]))
    }

    /// Subgroup generated by `gens`, as a sorted element list.
    pub fn closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut set: BTreeSet<usize> = BTreeSet::from([0]);
        let mut frontier = vec![0];
        while let Some(a) = frontier.pop() {
            for &g in gens {
                let b = self.mul(a, g);
                if set.insert(b) {
                    frontier.push(b);
                }
            }
        }
        set.into_iter().collect()
    }

    /// All subgroups, sorted by order and then by elements.
    pub fn subgroups(&self) -> Vec<Vec<usize>> {
        let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut queue: Vec<Vec<usize>> = vec![vec![0]];
        found.insert(vec![0]);
        while let Some(s) = queue.pop() {
            for g in 0..self.order() {
                if s.binary_search(&g).is_ok() {
                    continue;
                }
                let mut gens = s.clone();
                gens.push(g);
                let t = self.closure(&gens);
                if found.insert(t.clone()) {
                    queue.push(t);
                }
            }
        }
        let mut out: Vec<Vec<usize>> = found.into_iter().collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    /// A small generating set of the subgroup `elements`, chosen greedily.
    pub fn generators(&self, elements: &[usize]) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span = vec![0];
        for &e in elements {
            if span.binary_search(&e).is_err() {
                gens.push(e);
                span = self.closure(&gens);
            }
        }
        gens
    }

    /// The subgroup `elements` as a group of its own, with the inclusion map.
    pub fn subgroup(&self, elements: &[usize]) -> Result<(FiniteGroup, Vec<usize>)> {
        let mut els = elements.to_vec();
        els.sort_unstable();
        els.dedup();
        if els.first() != Some(&0) {
            return invalid("a subgroup must contain the identity");
        }
        let pos: BTreeMap<usize, usize> = els.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let mut table = Vec::with_capacity(els.len());
        for &a in &els {
            let mut row = Vec::with_capacity(els.len());
            for &b in &els {
                match pos.get(&self.mul(a, b)) {
                    Some(&p) => row.push(p),
                    None => return invalid("element list is not closed under multiplication"),
                }
            }
            table.push(row);
        }
        let name = format!("{}<{}>", self.name, els.len());
        Ok((FiniteGroup::from_table(&name, table)?, els))
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// All abelian groups of order at most `max`, one per isomorphism type, by
/// invariant factors `n_1 | n_2 | ...`.
pub fn abelian_groups_up_to(max: usize) -> Vec<Vec<usize>> {
    // each factor is a multiple of the previous one
    fn rec(rest: usize, prev: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        let mut f = prev.max(2);
        while f <= rest {
            if f.is_multiple_of(prev) {
                cur.push(f);
                rec(rest / f, f, cur, out);
                cur.pop();
            }
            f += 1;
        }
    }
    let mut out = Vec::new();
    rec(max, 1, &mut Vec::new(), &mut out);
    out.sort_by_key(|v| (v.iter().product::<usize>(), v.clone()));
    out
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Dsu {
        Dsu((0..n).collect())
    }

    fn find(&mut self, a: usize) -> usize {
        let mut r = a;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut a = a;
        while self.0[a] != r {
            let next = self.0[a];
            self.0[a] = r;
            a = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Class index of every element, classes numbered by least member.
    fn labels(&mut self) -> (Vec<usize>, usize) {
        let n = self.0.len();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut out = vec![0; n];
        for (a, slot) in out.iter_mut().enumerate() {
            let r = self.find(a);
            if label[r] == usize::MAX {
                label[r] = next;
                next += 1;
            }
            *slot = label[r];
        }
        (out, next)
    }
}

/// A left action of a finite group on `{0, ..., n-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAction {
    pub size: usize,
    /// `act[g][x] = g x`.
    act: Vec<Vec<usize>>,
}

impl FiniteAction {
    /// Validates the action axioms.
    pub fn new(group: &FiniteGroup, act: Vec<Vec<usize>>) -> Result<FiniteAction> {
        if act.len() != group.order() {
            return invalid("one row per group element is required");
        }
        let size = act[0].len();
        if act.iter().any(|r| r.len() != size || r.iter().any(|&v| v >= size)) {
            return invalid("action rows must be maps of the set to itself");
        }
        if (0..size).any(|x| act[0][x] != x) {
            return invalid("the identity must act trivially");
        }
        for a in 0..group.order() {
            for b in 0..group.order() {
                for x in 0..size {
                    if act[group.mul(a, b)][x] != act[a][act[b][x]] {
                        return invalid(format!("action not compatible at ({a}, {b}, {x})"));
                    }
                }
            }
        }
        Ok(FiniteAction { size, act })
    }

    pub fn trivial(group: &FiniteGroup, size: usize) -> FiniteAction {
        FiniteAction { size, act: vec![(0..size).collect(); group.order()] }
    }

    /// `H` acting on the cosets `H/K` by left multiplication; cosets are
    /// numbered by their least element.
    pub fn cosets(group: &FiniteGroup, k: &[usize]) -> Result<FiniteAction> {
        let n = group.order();
        let mut coset_of = vec![usize::MAX; n];
        let mut count = 0;
        for a in 0..n {
            if coset_of[a] != usize::MAX {
                continue;
            }
            for &s in k {
                coset_of[group.mul(a, s)] = count;
            }
            count += 1;
        }
        if coset_of.contains(&usize::MAX) {
            return invalid("not a subgroup");
        }
        let reps: Vec<usize> = (0..count).map(|c| (0..n).find(|&a| coset_of[a] == c).expect("nonempty")).collect();
        let act = (0..n).map(|g| reps.iter().map(|&r| coset_of[group.mul(g, r)]).collect()).collect();
        FiniteAction::new(group, act)
    }

    pub fn disjoint_union(parts: &[FiniteAction]) -> FiniteAction {
        let order = parts.first().map(|p| p.act.len()).unwrap_or(1);
        let mut act = vec![Vec::new(); order];
        let mut offset = 0;
        for p in parts {
            for (g, row) in act.iter_mut().enumerate() {
                row.extend(p.act[g].iter().map(|&v| v + offset));
            }
            offset += p.size;
        }
        FiniteAction { size: offset, act }
    }

    /// The action of the subgroup with inclusion `incl`.
    pub fn restrict(&self, incl: &[usize]) -> FiniteAction {
        FiniteAction { size: self.size, act: incl.iter().map(|&g| self.act[g].clone()).collect() }
    }

    pub fn apply(&self, g: usize, x: usize) -> usize {
        self.act[g][x]
    }

    /// Orbit label of every point.
    pub fn orbits(&self) -> (Vec<usize>, usize) {
        let mut dsu = Dsu::new(self.size);
        for row in &self.act {
            for (x, &y) in row.iter().enumerate() {
                dsu.union(x, y);
            }
        }
        dsu.labels()
    }
}

/// `G ×_H X`: pairs `(g, x)` modulo `(g, x) ~ (g rho(h)^-1, h x)`.
#[derive(Clone, Debug)]
pub struct BalancedProduct {
    pub g: FiniteGroup,
    pub h: FiniteGroup,
    pub rho: Vec<usize>,
    pub x: FiniteAction,
    /// Class of the pair `(g, x)`, stored at `g * |X| + x`.
    class_of: Vec<usize>,
    pub size: usize,
    /// The induced action of `G` on the classes.
    pub action: FiniteAction,
    /// `i(x) = [(e, x)]`.
    pub embed: Vec<usize>,
}

fn check_hom(h: &FiniteGroup, g: &FiniteGroup, rho: &[usize]) -> Result<()> {
    if rho.len() != h.order() || rho.iter().any(|&v| v >= g.order()) {
        return invalid("rho must map every element of H into G");
    }
    for a in 0..h.order() {
        for b in 0..h.order() {
            if rho[h.mul(a, b)] != g.mul(rho[a], rho[b]) {
                return invalid("rho is not a homomorphism");
            }
        }
    }
    let distinct: BTreeSet<usize> = rho.iter().copied().collect();
    if distinct.len() != rho.len() {
        return invalid("rho must be injective");
    }
    Ok(())
}

pub fn balanced_product(g: &FiniteGroup, h: &FiniteGroup, rho: &[usize], x: &FiniteAction) -> Result<BalancedProduct> {
    check_hom(h, g, rho)?;
    if x.act.len() != h.order() {
        return invalid("X must be an H-set");
    }
    let nx = x.size;
    let idx = |a: usize, p: usize| a * nx + p;
    let mut dsu = Dsu::new(g.order() * nx);
    for a in 0..g.order() {
        for p in 0..nx {
            for k in 0..h.order() {
                dsu.union(idx(a, p), idx(g.mul(a, g.inv(rho[k])), x.apply(k, p)));
            }
        }
    }
    let (class_of, size) = dsu.labels();
    let mut act = vec![vec![usize::MAX; size]; g.order()];
    for b in 0..g.order() {
        for a in 0..g.order() {
            for p in 0..nx {
                act[b][class_of[idx(a, p)]] = class_of[idx(g.mul(b, a), p)];
            }
        }
    }
    let action = FiniteAction::new(g, act)?;
    let embed = (0..nx).map(|p| class_of[idx(0, p)]).collect();
    Ok(BalancedProduct { g: g.clone(), h: h.clone(), rho: rho.to_vec(), x: x.clone(), class_of, size, action, embed })
}

impl BalancedProduct {
    pub fn class(&self, g: usize, x: usize) -> usize {
        self.class_of[g * self.x.size + x]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub passed: bool,
    /// First counterexample found, if any.
    pub witness: Option<String>,
}

impl CheckReport {
    fn ok(check: &str) -> CheckReport {
        CheckReport { check: check.into(), passed: true, witness: None }
    }

    fn fail(check: &str, witness: String) -> CheckReport {
        CheckReport { check: check.into(), passed: false, witness: Some(witness) }
    }
}

/// `|G ×_H X| = |G||X|/|H|`, `i` injective and `i(hx) = rho(h) i(x)`.
pub fn structure_check(bp: &BalancedProduct) -> CheckReport {
    let name = "structure";
    let expect = bp.g.order() * bp.x.size / bp.h.order();
    if bp.size != expect {
        return CheckReport::fail(name, format!("size {} != |G||X|/|H| = {expect}", bp.size));
    }
    let distinct: BTreeSet<usize> = bp.embed.iter().copied().collect();
    if distinct.len() != bp.embed.len() {
        return CheckReport::fail(name, "i is not injective".into());
    }
    for k in 0..bp.h.order() {
        for p in 0..bp.x.size {
            if bp.embed[bp.x.apply(k, p)] != bp.action.apply(bp.rho[k], bp.embed[p]) {
                return CheckReport::fail(name, format!("i(hx) != rho(h)i(x) at h={k}, x={p}"));
            }
        }
    }
    CheckReport::ok(name)
}

/// `g i(X) ∩ i(X)` is nonempty exactly when `g ∈ rho(H)`.
pub fn clopen_return_check(bp: &BalancedProduct) -> CheckReport {
    let name = "clopen_return";
    let image: BTreeSet<usize> = bp.embed.iter().copied().collect();
    let rho_h: BTreeSet<usize> = bp.rho.iter().copied().collect();
    for a in 0..bp.g.order() {
        let meets = bp.embed.iter().any(|&y| image.contains(&bp.action.apply(a, y)));
        if meets != rho_h.contains(&a) {
            return CheckReport::fail(name, format!("g={a}: meets={meets}, in rho(H)={}", !meets));
        }
    }
    CheckReport::ok(name)
}

/// `Hx -> G i(x)` is a well-defined bijection of orbit spaces.
pub fn orbit_bijection_check(bp: &BalancedProduct) -> CheckReport {
    let name = "orbit_bijection";
    let (h_orbit, nh) = bp.x.orbits();
    let (g_orbit, ng) = bp.action.orbits();
    let mut map: Vec<Option<usize>> = vec![None; nh];
    for p in 0..bp.x.size {
        let target = g_orbit[bp.embed[p]];
        match map[h_orbit[p]] {
            None => map[h_orbit[p]] = Some(target),
            Some(t) if t != target => {
                return CheckReport::fail(name, format!("H-orbit {} maps to two G-orbits", h_orbit[p]));
            }
            _ => {}
        }
    }
    let image: BTreeSet<usize> = map.iter().flatten().copied().collect();
    if image.len() != nh || nh != ng {
        return CheckReport::fail(name, format!("{nh} H-orbits against {ng} G-orbits, image {}", image.len()));
    }
    CheckReport::ok(name)
}

/// A finite groupoid given by its arrows `(label, source, target)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupoid {
    pub objects: Vec<usize>,
    pub arrows: Vec<(usize, usize, usize)>,
}

impl FiniteGroupoid {
    /// Transformation groupoid of an action, restricted to `objects`.
    pub fn restricted(action: &FiniteAction, objects: &[usize]) -> FiniteGroupoid {
        let set: BTreeSet<usize> = objects.iter().copied().collect();
        let mut arrows = Vec::new();
        for (g, row) in action.act.iter().enumerate() {
            for &y in objects {
                if set.contains(&row[y]) {
                    arrows.push((g, y, row[y]));
                }
            }
        }
        FiniteGroupoid { objects: set.into_iter().collect(), arrows }
    }
}

/// The restriction of `G ⋉ (G ×_H X)` to `i(X)` is isomorphic to `H ⋉ X`
/// through `(h, x) -> (rho(h), i(x))`, and `G i(X)` is everything.
pub fn groupoid_corner_check(bp: &BalancedProduct) -> CheckReport {
    let name = "groupoid_corner";
    let all: Vec<usize> = (0..bp.x.size).collect();
    let small = FiniteGroupoid::restricted(&bp.x, &all);
    let corner = FiniteGroupoid::restricted(&bp.action, &bp.embed);
    if small.arrows.len() != corner.arrows.len() {
        return CheckReport::fail(name, format!("{} arrows against {}", small.arrows.len(), corner.arrows.len()));
    }
    let corner_set: BTreeSet<(usize, usize, usize)> = corner.arrows.iter().copied().collect();
    let map = |(k, s, t): (usize, usize, usize)| (bp.rho[k], bp.embed[s], bp.embed[t]);
    let mut image = BTreeSet::new();
    for &arrow in &small.arrows {
        let m = map(arrow);
        if !corner_set.contains(&m) {
            return CheckReport::fail(name, format!("arrow {arrow:?} maps outside the corner"));
        }
        image.insert(m);
    }
    if image.len() != corner_set.len() {
        return CheckReport::fail(name, "arrow map is not bijective".into());
    }
    // composition: (k', kx)(k, x) = (k'k, x)
    for &(k, s, t) in &small.arrows {
        for k2 in 0..bp.h.order() {
            let t2 = bp.x.apply(k2, t);
            let composed = map((bp.h.mul(k2, k), s, t2));
            let (a1, s1, _) = map((k, s, t));
            let (a2, _, t3) = map((k2, t, t2));
            if composed != (bp.g.mul(a2, a1), s1, t3) {
                return CheckReport::fail(name, format!("composition fails at ({k2}, {k}, {s})"));
            }
        }
    }
    let mut covered = BTreeSet::new();
    for a in 0..bp.g.order() {
        for &y in &bp.embed {
            covered.insert(bp.action.apply(a, y));
        }
    }
    if covered.len() != bp.size {
        return CheckReport::fail(name, "G i(X) is not the whole balanced product".into());
    }
    CheckReport::ok(name)
}

/// Orbits of `A × B ⊂ G × G` on `G × X` under `(a, b)(x, y) = (a x b^-1, b y)`.
fn quotient(g: &FiniteGroup, x: &FiniteAction, a_sub: &[usize], b_sub: &[usize]) -> (Vec<usize>, usize) {
    let nx = x.size;
    let mut dsu = Dsu::new(g.order() * nx);
    for e in 0..g.order() {
        for y in 0..nx {
            // (a, e) and (e, b) generate A x B
            for &a in a_sub {
                dsu.union(e * nx + y, g.mul(a, e) * nx + y);
            }
            for &b in b_sub {
                dsu.union(e * nx + y, g.mul(e, g.inv(b)) * nx + x.apply(b, y));
            }
        }
    }
    dsu.labels()
}

/// For abelian `G`, subgroups `U, W` and a `G`-set `X`: the map
/// `phi(x, y) = (x^-1, x y)` descends to a bijection
/// `(G × X)/(W × U) -> (G × X)/(U × W)` exchanging the two residual
/// `G`-actions, and `(G/U) ×_W X = (G/U) ×_{W/(U∩W)} X/(U∩W)` naturally.
pub fn involution_model_check(g: &FiniteGroup, u: &[usize], w: &[usize], x: &FiniteAction) -> Result<CheckReport> {
    if !g.is_abelian() {
        return invalid("the involution model needs an abelian group");
    }
    for s in [u, w] {
        let mut v = s.to_vec();
        v.sort_unstable();
        v.dedup();
        if g.closure(s) != v {
            return invalid("U and W must be subgroups");
        }
    }
    if x.act.len() != g.order() {
        return invalid("X must be a G-set");
    }
    let all: Vec<usize> = (0..g.order()).collect();
    Ok(involution_core(g, &g.generators(&all), u, w, x))
}

/// The involution check with inputs already validated; `gens` generates `G`.
fn involution_core(g: &FiniteGroup, gens: &[usize], u: &[usize], w: &[usize], x: &FiniteAction) -> CheckReport {
    let name = "involution_model";
    let (ug, wg) = (g.generators(u), g.generators(w));
    let nx = x.size;
    let (left, nl) = quotient(g, x, &wg, &ug);
    let (right, nr) = quotient(g, x, &ug, &wg);
    let phi = |e: usize, y: usize| (g.inv(e), x.apply(e, y));
    let mut map: Vec<Option<usize>> = vec![None; nl];
    for e in 0..g.order() {
        for y in 0..nx {
            let (e2, y2) = phi(e, y);
            let target = right[e2 * nx + y2];
            match map[left[e * nx + y]] {
                None => map[left[e * nx + y]] = Some(target),
                Some(t) if t != target => {
                    return CheckReport::fail(name, format!("phi not constant on the class of ({e}, {y})"));
                }
                _ => {}
            }
        }
    }
    let image: BTreeSet<usize> = map.iter().flatten().copied().collect();
    if image.len() != nl || nl != nr {
        return CheckReport::fail(name, format!("{nl} classes against {nr}, image {}", image.len()));
    }
    // phi((a, b) p) = (b, a) phi(p), on generators of G x G
    for (a, b) in gens.iter().flat_map(|&a| [(a, 0), (0, a)]) {
        for e in 0..g.order() {
            for y in 0..nx {
                let (me, my) = phi(g.mul(g.mul(a, e), g.inv(b)), x.apply(b, y));
                let (pe, py) = phi(e, y);
                let swapped = (g.mul(g.mul(b, pe), g.inv(a)), x.apply(a, py));
                if right[me * nx + my] != right[swapped.0 * nx + swapped.1] {
                    return CheckReport::fail(name, format!("phi does not intertwine at ({a}, {b})"));
                }
            }
        }
    }
    for (s, t) in [(u, w), (w, u)] {
        if let Some(witness) = stage_quotient_identity(g, gens, x, s, t) {
            return CheckReport::fail(name, witness);
        }
    }
    CheckReport::ok(name)
}

/// `(G/S) ×_T X -> (G/S) ×_{T/(S∩T)} X/(S∩T)` is a `G`-equivariant
/// bijection. Returns a witness on failure.
fn stage_quotient_identity(g: &FiniteGroup, gens: &[usize], x: &FiniteAction, s: &[usize], t: &[usize]) -> Option<String> {
    let nx = x.size;
    let (sg, tg) = (g.generators(s), g.generators(t));
    let (lhs, nl) = quotient(g, x, &sg, &tg);
    let meet: Vec<usize> = s.iter().copied().filter(|e| t.contains(e)).collect();
    let mut dsu = Dsu::new(nx);
    for &e in &g.generators(&meet) {
        for y in 0..nx {
            dsu.union(y, x.apply(e, y));
        }
    }
    let (xq, nxq) = dsu.labels();
    let mut gs = Dsu::new(g.order());
    for e in 0..g.order() {
        for &a in &sg {
            gs.union(e, g.mul(a, e));
        }
    }
    let (gq, ngq) = gs.labels();
    // (G/S) x X/(S∩T) modulo T
    let mut rhs = Dsu::new(ngq * nxq);
    for e in 0..g.order() {
        for y in 0..nx {
            for &b in &tg {
                let e2 = g.mul(e, g.inv(b));
                rhs.union(gq[e] * nxq + xq[y], gq[e2] * nxq + xq[x.apply(b, y)]);
            }
        }
    }
    let (rhs_label, nr) = rhs.labels();
    let target = |e: usize, y: usize| rhs_label[gq[e] * nxq + xq[y]];
    let mut map: Vec<Option<usize>> = vec![None; nl];
    for e in 0..g.order() {
        for y in 0..nx {
            match map[lhs[e * nx + y]] {
                None => map[lhs[e * nx + y]] = Some(target(e, y)),
                Some(t2) if t2 != target(e, y) => return Some(format!("natural map not well defined at ({e}, {y})")),
                _ => {}
            }
        }
    }
    let image: BTreeSet<usize> = map.iter().flatten().copied().collect();
    if image.len() != nl || nl != nr {
        return Some(format!("{nl} classes against {nr} after passing to X/(S∩T)"));
    }
    // left translation must be well defined on the target classes
    for &a in gens {
        let mut act: Vec<Option<usize>> = vec![None; nr];
        for e in 0..g.order() {
            for y in 0..nx {
                let moved = target(g.mul(a, e), y);
                match act[target(e, y)] {
                    None => act[target(e, y)] = Some(moved),
                    Some(m) if m != moved => return Some(format!("G-action not well defined at ({a}, {e}, {y})")),
                    _ => {}
                }
            }
        }
    }
    None
}

/// `G ×_H (H ×_K X) -> G ×_K X`, `[(g, [(h, x)])] -> [(gh, x)]`, is a
/// well-defined `G`-equivariant bijection for `K ≤ H ≤ G` (as element
/// lists of `G`) and a `K`-set `X`.
pub fn induction_in_stages_check(g: &FiniteGroup, h_sub: &[usize], k_sub: &[usize], x: &FiniteAction) -> Result<CheckReport> {
    let name = "induction_in_stages";
    let (h, h_incl) = g.subgroup(h_sub)?;
    let k_in_h: Vec<usize> = {
        let pos: BTreeMap<usize, usize> = h_incl.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut v = Vec::new();
        for e in k_sub {
            match pos.get(e) {
                Some(&p) => v.push(p),
                None => return invalid("K must lie in H"),
            }
        }
        v
    };
    let (k, k_in_h_sorted) = h.subgroup(&k_in_h)?;
    let k_in_g: Vec<usize> = k_in_h_sorted.iter().map(|&i| h_incl[i]).collect();
    let inner = balanced_product(&h, &k, &k_in_h_sorted, x)?;
    let outer = balanced_product(g, &h, &h_incl, &inner.action)?;
    let direct = balanced_product(g, &k, &k_in_g, x)?;
    // pick a representative (h, x) for every class of the inner product
    let mut rep = vec![None; inner.size];
    for a in 0..h.order() {
        for p in 0..x.size {
            rep[inner.class(a, p)].get_or_insert((a, p));
        }
    }
    let mut map: Vec<Option<usize>> = vec![None; outer.size];
    for a in 0..g.order() {
        for c in 0..inner.size {
            let (hh, p) = rep[c].expect("every class has a member");
            let target = direct.class(g.mul(a, h_incl[hh]), p);
            let src = outer.class(a, c);
            match map[src] {
                None => map[src] = Some(target),
                Some(t) if t != target => return Ok(CheckReport::fail(name, format!("not well defined at ({a}, {c})"))),
                _ => {}
            }
        }
    }
    let image: BTreeSet<usize> = map.iter().flatten().copied().collect();
    if image.len() != outer.size || outer.size != direct.size {
        return Ok(CheckReport::fail(name, format!("{} classes against {}", outer.size, direct.size)));
    }
    for a in 0..g.order() {
        for c in 0..outer.size {
            if map[outer.action.apply(a, c)] != Some(direct.action.apply(a, map[c].expect("total"))) {
                return Ok(CheckReport::fail(name, format!("not equivariant at g={a}")));
            }
        }
    }
    Ok(CheckReport::ok(name))
}

/// All `H`-sets of size at most `max_size` up to isomorphism, as disjoint
/// unions of coset spaces `H/K` listed in a fixed order.
pub fn small_h_sets(h: &FiniteGroup, max_size: usize) -> Result<Vec<FiniteAction>> {
    let mut transitive = Vec::new();
    for k in h.subgroups() {
        if h.order() / k.len() <= max_size {
            transitive.push(FiniteAction::cosets(h, &k)?);
        }
    }
    let mut out = Vec::new();
    fn rec(
        start: usize,
        left: usize,
        cur: &mut Vec<usize>,
        transitive: &[FiniteAction],
        out: &mut Vec<FiniteAction>,
    ) {
        if !cur.is_empty() {
            let parts: Vec<FiniteAction> = cur.iter().map(|&i| transitive[i].clone()).collect();
            out.push(FiniteAction::disjoint_union(&parts));
        }
        for i in start..transitive.len() {
            if transitive[i].size <= left {
                cur.push(i);
                rec(i, left - transitive[i].size, cur, transitive, out);
                cur.pop();
            }
        }
    }
    rec(0, max_size, &mut Vec::new(), &transitive, &mut out);
    Ok(out)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteSummary {
    pub groups: usize,
    pub instances: usize,
    pub checks: usize,
    pub failures: Vec<SuiteFailure>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteFailure {
    pub group: String,
    pub subgroup: Vec<usize>,
    pub x_size: usize,
    pub report: CheckReport,
}

/// Runs the balanced-product checks on every abelian `G` of order at most
/// `max_order`, every subgroup `H` and every `H`-set of size at most
/// `max_x`.
pub fn balanced_product_suite(max_order: usize, max_x: usize) -> Result<SuiteSummary> {
    use rayon::prelude::*;
    let groups = abelian_groups_up_to(max_order);
    let per_group: Vec<Result<SuiteSummary>> = groups
        .par_iter()
        .map(|factors| -> Result<SuiteSummary> {
            let g = FiniteGroup::abelian(factors)?;
            let mut s = SuiteSummary { groups: 1, ..Default::default() };
            for hs in g.subgroups() {
                let (h, incl) = g.subgroup(&hs)?;
                for x in small_h_sets(&h, max_x)? {
                    let bp = balanced_product(&g, &h, &incl, &x)?;
                    s.instances += 1;
                    for r in [
                        structure_check(&bp),
                        clopen_return_check(&bp),
                        orbit_bijection_check(&bp),
                        groupoid_corner_check(&bp),
                    ] {
                        s.checks += 1;
                        if !r.passed {
                            s.failures.push(SuiteFailure { group: g.name.clone(), subgroup: hs.clone(), x_size: x.size, report: r });
                        }
                    }
                }
            }
            Ok(s)
        })
        .collect();
    merge(per_group)
}

/// Involution checks for every pair of subgroups `U, W` of every abelian `G`
/// of order at most `max_order`, with `X` ranging over the `G`-sets of size
/// at most `max_x`.
pub fn involution_suite(max_order: usize, max_x: usize) -> Result<SuiteSummary> {
    use rayon::prelude::*;
    let groups = abelian_groups_up_to(max_order);
    let per_group: Vec<Result<SuiteSummary>> = groups
        .par_iter()
        .map(|factors| -> Result<SuiteSummary> {
            let g = FiniteGroup::abelian(factors)?;
            let subs = g.subgroups();
            let xs = small_h_sets(&g, max_x)?;
            let all: Vec<usize> = (0..g.order()).collect();
            let gens = g.generators(&all);
            let mut s = SuiteSummary { groups: 1, ..Default::default() };
            for u in &subs {
                for w in &subs {
                    for x in &xs {
                        s.instances += 1;
                        s.checks += 1;
                        let r = involution_core(&g, &gens, u, w, x);
                        if !r.passed {
                            s.failures.push(SuiteFailure { group: g.name.clone(), subgroup: u.clone(), x_size: x.size, report: r });
                        }
                    }
                }
            }
            Ok(s)
        })
        .collect();
    merge(per_group)
}

/// Induction in stages for every tower `K ≤ H ≤ G` with `G` abelian of order
/// at most `max_order` and `X` a `K`-set of size at most `max_x`.
pub fn stages_suite(max_order: usize, max_x: usize) -> Result<SuiteSummary> {
    use rayon::prelude::*;
    let groups = abelian_groups_up_to(max_order);
    let per_group: Vec<Result<SuiteSummary>> = groups
        .par_iter()
        .map(|factors| -> Result<SuiteSummary> {
            let g = FiniteGroup::abelian(factors)?;
            let subs = g.subgroups();
            let mut s = SuiteSummary { groups: 1, ..Default::default() };
            for hs in &subs {
                for ks in subs.iter().filter(|k| k.iter().all(|e| hs.contains(e))) {
                    let (k, _) = g.subgroup(ks)?;
                    for x in small_h_sets(&k, max_x)? {
                        s.instances += 1;
                        s.checks += 1;
                        let r = induction_in_stages_check(&g, hs, ks, &x)?;
                        if !r.passed {
                            s.failures.push(SuiteFailure { group: g.name.clone(), subgroup: hs.clone(), x_size: x.size, report: r });
                        }
                    }
                }
            }
            Ok(s)
        })
        .collect();
    merge(per_group)
}

fn merge(parts: Vec<Result<SuiteSummary>>) -> Result<SuiteSummary> {
    let mut total = SuiteSummary::default();
    for p in parts {
        let p = p?;
        total.groups += p.groups;
        total.instances += p.instances;
        total.checks += p.checks;
        total.failures.extend(p.failures);
    }
    Ok(total)
}
