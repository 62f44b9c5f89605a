//! Non-existence rules and exhaustive searches built on class lists of
//! cyclotomic integers of prescribed absolute value.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::criteria::{CellQuery, Certificate, Rule};
use crate::cyclotomic::units;
use crate::exec::Exec;
use crate::grouprings::{orbits_under_power, AbelianGroup, GroupElem, GroupRingElem};
use crate::numtheory::{divisors, exact_sqrt, gcd, prime_divisors};

use super::idempotent::integrality_search_limited;
use super::{
    class_divisibility, reconstruct, split_primes, SolutionCache, SolutionSet, WeilError,
    WeilOptions,
};

/// Resource limits for the class-list rules.
#[derive(Debug, Clone, Copy)]
pub struct WeilPolicy {
    /// Largest estimated lattice-point count for one enumeration.
    pub max_points: f64,
    /// Largest number of partial assignments in an integrality search.
    pub node_limit: u64,
    /// Largest number of reconstructed candidates checked per search.
    pub candidate_limit: usize,
    pub exec: Exec,
}

impl Default for WeilPolicy {
    fn default() -> Self {
        WeilPolicy {
            max_points: 2e7,
            node_limit: 5_000_000,
            candidate_limit: 2_000_000,
            exec: Exec::default(),
        }
    }
}

impl WeilPolicy {
    fn options(&self) -> WeilOptions {
        WeilOptions {
            max_points: self.max_points,
            exec: self.exec,
            ..WeilOptions::default()
        }
    }
}

/// True iff every coefficient is an integer in [−a, a] and D·D^{(−1)} = n.
pub fn verify_weighing(d: &GroupRingElem, n: u64, a: u64) -> bool {
    let Some(cs) = d.int_coeffs() else {
        return false;
    };
    if cs.values().any(|c| c.unsigned_abs() > a) {
        return false;
    }
    if cs.values().map(|c| (c * c) as u64).sum::<u64>() != n {
        return false;
    }
    let dinv = d.apply_t(-1).expect("−1 is a unit");
    let g = d.group();
    d.convolve(&dinv).expect("same group") == GroupRingElem::scalar(g, d.conductor(), n as i64)
}

/// Dense autocorrelation check for a coefficient vector on C_v.
fn is_cyclic_weighing(d: &[i64], n: u64, a: u64) -> bool {
    if d.iter().any(|c| c.unsigned_abs() > a) || d.iter().map(|c| c * c).sum::<i64>() != n as i64 {
        return false;
    }
    let v = d.len();
    let nz: Vec<usize> = (0..v).filter(|&i| d[i] != 0).collect();
    (1..v).all(|s| nz.iter().map(|&i| d[i] * d[(i + s) % v]).sum::<i64>() == 0)
}

/// True iff no translate of D lies in the group ring of a proper subgroup.
pub fn is_proper(d: &GroupRingElem) -> bool {
    let g = d.group();
    let supp = d.support();
    let Some(x0) = supp.first() else { return false };
    let inv = g.inverse(x0);
    let gens: Vec<GroupElem> = supp.iter().map(|x| g.op(x, &inv)).collect();
    g.subgroup(&gens)
        .map(|h| h.len() as u64 == g.order())
        .unwrap_or(false)
}

/// Lexicographically least coefficient vector over ±, automorphisms and translates.
fn canonical_cyclic(d: &[i64]) -> Vec<i64> {
    let v = d.len() as u64;
    let mut best: Option<Vec<i64>> = None;
    let mut img = vec![0i64; d.len()];
    for s in units(v) {
        for sign in [1i64, -1] {
            for shift in 0..v {
                for (k, &c) in d.iter().enumerate() {
                    img[((k as u64 * s + shift) % v) as usize] = sign * c;
                }
                if best.as_ref().is_none_or(|b| img < *b) {
                    best = Some(img.clone());
                }
            }
        }
    }
    best.unwrap_or_default()
}

/// All ICW_a(v, n) fixed by x ↦ x^t, up to sign, automorphism and translation.
/// Returned as canonical coefficient vectors, sorted.
pub fn orbit_search(v: u64, n: u64, a: u64, t: u64) -> Vec<Vec<i64>> {
    let Some(k) = exact_sqrt(n) else {
        return Vec::new();
    };
    let group = AbelianGroup::cyclic(v);
    let orbits: Vec<Vec<u64>> = orbits_under_power(&group, t as i64)
        .expect("t coprime to v")
        .into_iter()
        .filter(|o| o.len() as u64 <= n)
        .map(|o| o.iter().map(|g| g.0[0]).collect())
        .collect();
    let sizes: Vec<i64> = orbits.iter().map(|o| o.len() as i64).collect();
    let mut suffix = vec![0i64; sizes.len() + 1];
    for i in (0..sizes.len()).rev() {
        suffix[i] = suffix[i + 1] + sizes[i];
    }
    let mut found = Vec::new();
    let mut cur = vec![0i64; sizes.len()];
    orbit_dfs(
        &sizes,
        &suffix,
        a as i64,
        0,
        k as i64,
        n as i64,
        &mut cur,
        &mut |c| {
            let mut d = vec![0i64; v as usize];
            for (o, &ci) in orbits.iter().zip(c) {
                for &x in o {
                    d[x as usize] = ci;
                }
            }
            if is_cyclic_weighing(&d, n, a) {
                found.push(canonical_cyclic(&d));
            }
        },
    );
    found.sort();
    found.dedup();
    found
}

#[allow(clippy::too_many_arguments)]
fn orbit_dfs(
    s: &[i64],
    suffix: &[i64],
    a: i64,
    i: usize,
    t1: i64,
    t2: i64,
    cur: &mut Vec<i64>,
    visit: &mut dyn FnMut(&[i64]),
) {
    if i == s.len() {
        if t1 == 0 && t2 == 0 {
            visit(cur);
        }
        return;
    }
    if (t1 - t2).rem_euclid(2) != 0 || (t1 as i128).pow(2) > suffix[i] as i128 * t2 as i128 {
        return;
    }
    for c in -a..=a {
        let w = c * c * s[i];
        if w > t2 {
            continue;
        }
        cur[i] = c;
        orbit_dfs(s, suffix, a, i + 1, t1 - c * s[i], t2 - w, cur, visit);
    }
    cur[i] = 0;
}

/// A CW-type witness ICW_a(v, n) found by [`orbit_search`] under some
/// multiplier t: powers of primes dividing n when gcd(v, n) = 1, and the
/// trivial t = 1 for small v. `None` proves nothing.
pub fn find_witness(v: u64, n: u64, a: u64) -> Option<Vec<i64>> {
    const MAX_ORBITS: usize = 24;
    exact_sqrt(n)?;
    let mut ts: Vec<u64> = Vec::new();
    if gcd(v, n) == 1 {
        for p in prime_divisors(n) {
            let mut x = p % v;
            for _ in 0..v {
                if x > 1 && !ts.contains(&x) {
                    ts.push(x);
                }
                x = x * p % v;
            }
        }
    }
    ts.sort_by_key(|&t| (std::cmp::Reverse(crate::numtheory::ord(t as i64, v)), t));
    ts.push(1);
    let group = AbelianGroup::cyclic(v);
    for t in ts {
        let orbits = orbits_under_power(&group, t as i64).ok()?;
        if orbits.len() > MAX_ORBITS {
            continue;
        }
        if let Some(d) = orbit_search(v, n, a, t).into_iter().next() {
            return Some(d);
        }
    }
    None
}

/// 2·D1·(1 − Δ) + D2·(Δ − 1) on C_77 = ⟨α⟩ × ⟨β⟩ with α = x^11, β = x^7.
pub fn icw2_77_100_reference() -> Vec<i64> {
    let d1 = [1u64, 3, 4, 5, 9];
    let d2 = [2u64, 6, 7, 8, 10];
    let delta = [1u64, 2, 4];
    let mut e = vec![0i64; 77];
    let at = |i: u64, j: u64| ((11 * i + 7 * j) % 77) as usize;
    for &j in &d1 {
        e[at(0, j)] += 2;
        for &i in &delta {
            e[at(i, j)] -= 2;
        }
    }
    for &j in &d2 {
        e[at(0, j)] -= 1;
        for &i in &delta {
            e[at(i, j)] += 1;
        }
    }
    e
}

/// All ICW_2(77, 100) up to equivalence, from the multiplier 9.
pub fn classify_icw2_77_100() -> Vec<Vec<i64>> {
    orbit_search(77, 100, 2, 9)
}

fn fetch(
    cache: &SolutionCache,
    w: u64,
    n: u64,
    policy: &WeilPolicy,
) -> Result<Arc<SolutionSet>, WeilError> {
    cache.get_or_compute(w, n, &policy.options())
}

/// NONEXISTENT when, for every w | v, every solution of X·X̄ = n in Z[ζ_w] is
/// divisible by the prime q (q ∤ v, q > a): inversion then makes every
/// coefficient of D divisible by q, forcing D = 0.
pub fn weil_divisibility_rule(
    q: &CellQuery,
    prime: u64,
    cache: &SolutionCache,
    policy: &WeilPolicy,
) -> Certificate {
    let rule = Rule::WeilDivisibility;
    if !q.group.is_cyclic() {
        return Certificate::inconclusive(q, rule, "cyclic groups only");
    }
    let v = q.order();
    if prime_divisors(prime) != [prime] || gcd(prime, v) != 1 || prime <= q.a {
        return Certificate::inconclusive(q, rule, "q must be a prime coprime to v exceeding a");
    }
    let Some(k) = exact_sqrt(q.n) else {
        return Certificate::inconclusive(q, rule, "n is not a square");
    };
    let mut levels = Vec::new();
    let mut imported = Vec::new();
    for w in divisors(v) {
        if w == 1 {
            if k % prime != 0 {
                return Certificate::inconclusive(
                    q,
                    rule,
                    "the rational solution is not divisible by q",
                );
            }
            levels.push(serde_json::json!({"w": 1, "classes": 1}));
            continue;
        }
        let set = match fetch(cache, w, q.n, policy) {
            Ok(s) => s,
            Err(e) => {
                return Certificate::inconclusive(q, rule, "class list unavailable")
                    .param("missing", w)
                    .param("error", e.to_string())
                    .param("levels", levels)
            }
        };
        if let Some(c) = set
            .classes
            .iter()
            .position(|c| class_divisibility(&c.representative, prime) == 0)
        {
            return Certificate::inconclusive(q, rule, "a class is not divisible by q")
                .param("w", w)
                .param("class", c)
                .param("levels", levels);
        }
        if !set.complete {
            imported.push(w);
        }
        levels.push(
            serde_json::json!({"w": w, "classes": set.classes.len(), "complete": set.complete}),
        );
    }
    Certificate::nonexistent(q, rule)
        .param("q", prime)
        .param("levels", levels)
        .param("imported", imported)
}

/// NONEXISTENT when no integer vector with entries in [−a, a] matches any
/// assignment of character values of orders divisible by some r ∥ v.
/// A verified reconstruction is returned as a witness (INCONCLUSIVE).
pub fn idempotent_integrality_search(
    q: &CellQuery,
    classes: &BTreeMap<u64, Arc<SolutionSet>>,
    policy: &WeilPolicy,
) -> Certificate {
    let rule = Rule::Idempotent;
    if !q.group.is_cyclic() || q.order() < 2 {
        return Certificate::inconclusive(q, rule, "cyclic groups of order > 1 only");
    }
    let (v, n, a) = (q.order(), q.n, q.a);
    // Cheapest decomposition first.
    let mut plans: Vec<(u128, u64)> = split_primes(v)
        .into_iter()
        .filter_map(|r| {
            let mut prod = 1u128;
            for w in divisors(v).into_iter().filter(|w| w % r == 0) {
                let set = classes.get(&w).filter(|s| s.complete)?;
                let per = if w == v {
                    set.classes.len() as u128
                } else {
                    set.classes.iter().map(|c| c.orbit_size as u128).sum()
                };
                prod = prod.saturating_mul(per.max(1));
            }
            Some((prod, r))
        })
        .collect();
    plans.sort();
    let mut notes = Vec::new();
    for (_, r) in plans {
        let out =
            match integrality_search_limited(v, n, a, r, classes, policy.exec, policy.node_limit) {
                Ok(o) => o,
                Err(e) => {
                    notes.push(format!("r={r}: {e}"));
                    continue;
                }
            };
        let mut candidates = 0usize;
        let mut witness = None;
        let mut over = false;
        for (_, nk) in &out.survivors {
            let Some(cands) = reconstruct(
                v,
                a,
                r,
                nk,
                policy.candidate_limit.saturating_sub(candidates),
            ) else {
                over = true;
                break;
            };
            candidates += cands.len();
            if let Some(d) = cands.into_iter().find(|d| is_cyclic_weighing(d, n, a)) {
                witness = Some(d);
                break;
            }
        }
        if let Some(d) = witness {
            return Certificate::inconclusive(q, rule, "a reconstruction is a weighing matrix")
                .param("r", r)
                .param("witness", d);
        }
        if over {
            notes.push(format!(
                "r={r}: more than {} candidates",
                policy.candidate_limit
            ));
            continue;
        }
        return Certificate::nonexistent(q, rule)
            .param("r", r)
            .param("levels", &out.levels)
            .param("choices", &out.choices)
            .param("nodes", out.nodes)
            .param("survivors", out.survivors.len())
            .param("candidates", candidates);
    }
    Certificate::inconclusive(q, rule, "no decomposition completed").param("notes", notes)
}

/// Class lists for the levels used by split prime `r`, computed within the policy.
fn classes_for(
    v: u64,
    n: u64,
    r: u64,
    cache: &SolutionCache,
    policy: &WeilPolicy,
    into: &mut BTreeMap<u64, Arc<SolutionSet>>,
) -> Result<(), WeilError> {
    for w in divisors(v).into_iter().filter(|w| w % r == 0) {
        if !into.contains_key(&w) {
            into.insert(w, fetch(cache, w, n, policy)?);
        }
    }
    Ok(())
}

/// The integrality search with class lists fetched from (or added to) the cache.
pub fn rule_idempotent(q: &CellQuery, cache: &SolutionCache, policy: &WeilPolicy) -> Certificate {
    if !q.group.is_cyclic() || q.order() < 2 {
        return Certificate::inconclusive(q, Rule::Idempotent, "cyclic groups of order > 1 only");
    }
    let v = q.order();
    let mut classes = BTreeMap::new();
    let mut missing = Vec::new();
    for r in split_primes(v) {
        let mut local = classes.clone();
        match classes_for(v, q.n, r, cache, policy, &mut local) {
            Ok(()) => classes = local,
            Err(e) => missing.push(format!("r={r}: {e}")),
        }
    }
    if classes.is_empty() {
        return Certificate::inconclusive(
            q,
            Rule::Idempotent,
            "no split prime with available class lists",
        )
        .param("notes", missing);
    }
    idempotent_integrality_search(q, &classes, policy)
}

pub(crate) fn recheck(c: &Certificate, cache: &SolutionCache) -> bool {
    let policy = WeilPolicy {
        max_points: 2e9,
        node_limit: u64::MAX,
        candidate_limit: usize::MAX,
        ..Default::default()
    };
    match c.rule {
        Rule::Idempotent => {
            let Some(r) = c.get_u64("r") else {
                return false;
            };
            let mut classes = BTreeMap::new();
            if classes_for(c.query.order(), c.query.n, r, cache, &policy, &mut classes).is_err() {
                return false;
            }
            let again = idempotent_integrality_search(&c.query, &classes, &policy);
            again.is_nonexistent() && again.get_u64("r") == Some(r)
        }
        Rule::WeilDivisibility => c
            .get_u64("q")
            .is_some_and(|p| weil_divisibility_rule(&c.query, p, cache, &policy).is_nonexistent()),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyc(d: &[i64]) -> GroupRingElem {
        GroupRingElem::cyclic(d)
    }

    #[test]
    fn verify_examples() {
        assert!(verify_weighing(&cyc(&[-1, 1, 1, 0, 1, 0, 0]), 4, 1));
        assert!(!verify_weighing(&cyc(&[0; 7]), 4, 1));
        let e = icw2_77_100_reference();
        assert!(verify_weighing(&cyc(&e), 100, 2));
        assert!(is_proper(&cyc(&e)));
    }

    #[test]
    fn properness() {
        let mut d = vec![0i64; 35];
        for k in [0, 7, 14] {
            d[k] = 1;
        }
        assert!(!is_proper(&cyc(&d)));
        d[1] = 1;
        assert!(is_proper(&cyc(&d)));
    }

    #[test]
    fn orbit_search_examples() {
        let want = canonical_cyclic(&[-1, 1, 1, 0, 1, 0, 0]);
        assert_eq!(orbit_search(7, 4, 1, 2), vec![want]);
        assert!(!orbit_search(13, 9, 1, 3).is_empty());
        for t in 1..5 {
            assert!(orbit_search(5, 4, 1, t).is_empty());
        }
    }

    #[test]
    fn icw2_77_100_unique() {
        let classes = classify_icw2_77_100();
        assert_eq!(classes, vec![canonical_cyclic(&icw2_77_100_reference())]);
    }

    #[test]
    fn idempotent_sanity_direction() {
        let cache = SolutionCache::in_memory();
        let c = rule_idempotent(&CellQuery::cyclic(7, 4), &cache, &WeilPolicy::default());
        assert!(!c.is_nonexistent());
        assert!(c.params.contains_key("witness"));
    }

    #[test]
    fn divisibility_sub_checks() {
        let cache = SolutionCache::in_memory();
        let c =
            weil_divisibility_rule(&CellQuery::cyclic(5, 36), 2, &cache, &WeilPolicy::default());
        assert!(c.is_nonexistent());
        let c = weil_divisibility_rule(&CellQuery::cyclic(7, 4), 2, &cache, &WeilPolicy::default());
        assert!(!c.is_nonexistent());
    }
}
