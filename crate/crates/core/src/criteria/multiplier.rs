//! Rules built on a multiplier t of an invariant weighing element, applied
//! through a character of the p'-part.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::cyclotomic::CycInt;
use crate::grouprings::AbelianGroup;
use crate::numtheory::{
    f_value, fixes_prime_ideals, gcd, is_self_conjugate, nu, ord, phi, pow_mod, prime_divisors,
};
use crate::weilsearch::{weil_enumerate, WeilError};

use super::{is_quotient_type, quotient_types, CellQuery, Certificate, Rule};

/// A quotient H with exponent u·p^d, p an odd prime, gcd(u, p) = 1.
#[derive(Debug, Clone)]
struct Setting {
    group: AbelianGroup,
    a: u64,
    p: u64,
    d: u32,
    u: u64,
    /// The p'-part of H is cyclic (|H| = u·p^{d'}).
    u_cyclic: bool,
}

impl Setting {
    fn new(group: AbelianGroup, a: u64, p: u64) -> Option<Setting> {
        let e = group.exponent();
        if p == 2 || e % p != 0 || !crate::numtheory::is_prime(p) {
            return None;
        }
        let d = nu(p, e);
        let u = e / p.pow(d);
        let order = group.order();
        let u_cyclic = order / p.pow(nu(p, order)) == u;
        Some(Setting {
            group,
            a,
            p,
            d,
            u,
            u_cyclic,
        })
    }

    fn exponent(&self) -> u64 {
        self.u * self.p.pow(self.d)
    }

    /// 2^{δ(u)}·a.
    fn coeff_bound(&self) -> u64 {
        (1u64 << prime_divisors(self.u).len()) * self.a
    }
}

fn settings(q: &CellQuery) -> Vec<Setting> {
    let mut out = Vec::new();
    for qt in quotient_types(q) {
        for p in prime_divisors(qt.group.exponent()) {
            if let Some(s) = Setting::new(qt.group.clone(), qt.a, p) {
                out.push(s);
            }
        }
    }
    out
}

fn eligible(k: u64, v: u64) -> Arc<Vec<u64>> {
    static MEMO: OnceLock<Mutex<HashMap<(u64, u64), Arc<Vec<u64>>>>> = OnceLock::new();
    let memo = MEMO.get_or_init(Default::default);
    if let Some(x) = memo.lock().expect("memo lock").get(&(k, v)) {
        return x.clone();
    }
    let list = Arc::new(crate::numtheory::eligible_multipliers(k, v));
    memo.lock().expect("memo lock").insert((k, v), list.clone());
    list
}

fn is_eligible(t: u64, k: u64, v: u64) -> bool {
    t >= 1 && gcd(t, v) == 1 && fixes_prime_ideals(t as i64, k, v).unwrap_or(false)
}

fn square_root(q: &CellQuery) -> Option<u64> {
    q.k().filter(|&k| k > 1)
}

/// w = ord_p(q)/gcd(ord_u(q), ord_p(q)) combined by gcd with the same
/// expression for r. Passing r = q gives the single-prime value.
pub fn cor46_w(u: u64, p: u64, q: u64, r: u64) -> u64 {
    let part = |x: u64| {
        let op = ord(x as i64, p);
        op / gcd(ord(x as i64, u), op)
    };
    gcd(part(q), part(r))
}

/// w = gcd(ord_p(3)/gcd(ord_p(3), ord_{2^c}(3)), ord_p(2)).
pub fn thm410_w(p: u64, c: u32) -> u64 {
    let o3 = ord(3, p);
    gcd(o3 / gcd(o3, ord(3, 1u64 << c)), ord(2, p))
}

fn thm45_holds(k: u64, s: &Setting, t: u64) -> bool {
    let e = s.exponent();
    gcd(s.u, k) == 1
        && gcd(s.p, k) == 1
        && k > s.a
        && is_self_conjugate(k, s.u)
        && is_eligible(t, k, e)
        && ord(t as i64, s.p) > k + s.a
}

fn cor46_holds(k: u64, s: &Setting, t: u64) -> bool {
    let ps = prime_divisors(k);
    let (q, r) = match ps.as_slice() {
        [q] => (*q, *q),
        [q, r] => (*q, *r),
        _ => return false,
    };
    if gcd(s.u, k) != 1 || gcd(s.p, k) != 1 {
        return false;
    }
    let w = cor46_w(s.u, s.p, q, r);
    is_self_conjugate(k, s.u)
        && s.a < k
        && k + s.a < w
        && t % s.u.max(1) == 1 % s.u.max(1)
        && ord(t as i64, s.p) == w
        && is_eligible(t, k, s.exponent())
}

fn thm48_holds(k: u64, s: &Setting, t: u64) -> bool {
    if !s.u_cyclic || gcd(s.p, k) != 1 || t % s.u != 1 % s.u || !is_eligible(t, k, s.exponent()) {
        return false;
    }
    let w = ord(t as i64, s.p) as u128;
    let b = s.coeff_bound() as u128;
    let k = k as u128;
    let branch1 = is_self_conjugate(k as u64, s.u) && b < k && k + b < w;
    let (u, a, ph) = (s.u as u128, s.a as u128, phi(s.u) as u128);
    let branch2 = u * u * a * a < k * k * ph && 4 * k * k * ph < w * w;
    branch1 || branch2
}

/// k = 2^m·3^n, returning (m, n).
fn two_three(k: u64) -> Option<(u32, u32)> {
    let (m, n) = (nu(2, k), nu(3, k));
    (2u64.pow(m) * 3u64.pow(n) == k).then_some((m, n))
}

fn thm410_holds(k: u64, s: &Setting, t: u64) -> bool {
    let Some((m, n)) = two_three(k) else {
        return false;
    };
    if !(m > 0 || n >= 2) || s.p <= 3 || !s.u_cyclic || !s.u.is_power_of_two() {
        return false;
    }
    let c = s.u.trailing_zeros();
    let w = thm410_w(s.p, c);
    let b = s.coeff_bound();
    if !(k + b < w
        && t % s.u == 1 % s.u
        && ord(t as i64, s.p) == w
        && is_eligible(t, k, s.exponent()))
    {
        return false;
    }
    let l = if s.u > 1 { f_value(s.u, k * k) } else { 1 };
    zeta_gate(l, k, b).unwrap_or(false)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SelfConj {
    /// k self-conjugate modulo u.
    Literal,
    /// All Y ∈ Z[ζ_L] with |Y|² = k² compatible with the coefficient
    /// congruences are k times a root of unity.
    Forced,
}

fn thm412_holds(k: u64, s: &Setting, t: u64, mode: SelfConj) -> bool {
    let (p, u) = (s.p, s.u);
    if !s.group.is_cyclic() || p % 4 != 3 || gcd(p, k) != 1 {
        return false;
    }
    let b = s.coeff_bound();
    if k <= b {
        return false;
    }
    let size_ok = if s.d > 1 {
        (p as u128) * (p as u128 - 1) > 2 * (k + b) as u128 + 2 * b as u128 * (p as u128 - 1)
    } else {
        p > 2 * b + 1
    };
    if !size_ok {
        return false;
    }
    let half = (p - 1) / 2;
    let t_ok = t % u == 1 % u
        && ord(t as i64, p) == half
        && (s.d == 1 || pow_mod(t, half, p * p) != 1)
        && is_eligible(t, k, s.exponent());
    if !t_ok || !m_condition(k, p, u, b) {
        return false;
    }
    match mode {
        SelfConj::Literal => is_self_conjugate(k, u),
        SelfConj::Forced => {
            let l = if u > 1 { f_value(u, k * k) } else { 1 };
            u.is_power_of_two() && forced_trivial(l, k, b, half).unwrap_or(false)
        }
    }
}

/// For every M with 1 ≤ |M| ≤ 2B and |k − M(p−1)/2| ≤ B, the equation
/// (Y1 − Y2)² = M(4k − Mp) with Y1 + Y2 = M has no solution Y1, Y2 ∈ Z[ζ_u]
/// of coefficient size at most B: either M(4k − Mp) is not a square in
/// Q(ζ_u), or it is s² and the integers (M ± s)/2 are not both bounded by B.
fn m_condition(k: u64, p: u64, u: u64, b: u64) -> bool {
    let (k, p, b) = (k as i128, p as i128, b as i128);
    for m in (-2 * b..=2 * b).filter(|&m| m != 0) {
        if (2 * k - m * (p - 1)).abs() > 2 * b {
            continue;
        }
        let x = m * (4 * k - m * p);
        if x >= 0 {
            if let Some(s) = crate::numtheory::exact_sqrt(x as u64) {
                let s = s as i128;
                if (m + s) % 2 == 0 && (m + s).abs() <= 2 * b && (m - s).abs() <= 2 * b {
                    return false;
                }
                continue;
            }
        }
        if square_in_cyclotomic(x as i64, u) {
            return false;
        }
    }
    true
}

/// Whether the nonzero integer x is a square in Q(ζ_u): its squarefree part
/// m must be 1 or have Q(√m) of conductor dividing u.
fn square_in_cyclotomic(x: i64, u: u64) -> bool {
    let mut m: i64 = x.signum();
    for (q, e) in crate::numtheory::factorize(x.unsigned_abs()).factors {
        if e % 2 == 1 {
            m *= q as i64;
        }
    }
    if m == 1 {
        return true;
    }
    let disc = if m.rem_euclid(4) == 1 {
        m.unsigned_abs()
    } else {
        4 * m.unsigned_abs()
    };
    u % disc == 0
}

/// Every Y with |Y|² = n in Z[ζ_l]: all Galois images and root-of-unity multiples.
fn all_solutions(l: u64, n: u64) -> Result<Arc<Vec<CycInt>>, WeilError> {
    static MEMO: OnceLock<Mutex<HashMap<(u64, u64), Arc<Vec<CycInt>>>>> = OnceLock::new();
    let memo = MEMO.get_or_init(Default::default);
    if let Some(x) = memo.lock().expect("memo lock").get(&(l, n)) {
        return Ok(x.clone());
    }
    let set = weil_enumerate(l, n)?;
    let mut all: Vec<CycInt> = set
        .classes
        .iter()
        .flat_map(|c| c.representative.orbit())
        .collect();
    all.sort();
    all.dedup();
    let all = Arc::new(all);
    memo.lock().expect("memo lock").insert((l, n), all.clone());
    Ok(all)
}

/// For every Y ∈ Z[ζ_l] with |Y|² = k² some root-of-unity multiple has a
/// basis coefficient of absolute value above `bound`.
pub fn zeta_gate(l: u64, k: u64, bound: u64) -> Result<bool, WeilError> {
    // The solution set is closed under multiplication by roots of unity.
    Ok(all_solutions(l, k * k)?
        .iter()
        .all(|y| y.max_abs_coeff() as u64 > bound))
}

fn forced_trivial(l: u64, k: u64, bound: u64, w: u64) -> Result<bool, WeilError> {
    let compatible = |y: &CycInt| {
        y.coeffs().iter().all(|&d| {
            let r = d.rem_euclid(w as i64) as u64;
            r.min(w - r) <= bound
        })
    };
    let trivial = |y: &CycInt| {
        let nz: Vec<i64> = y.coeffs().iter().copied().filter(|&c| c != 0).collect();
        nz.len() == 1 && nz[0].unsigned_abs() == k
    };
    Ok(all_solutions(l, k * k)?
        .iter()
        .filter(|y| compatible(y))
        .all(trivial))
}

/// Outcome of checking the ζ_8 coefficient lemma against enumerated classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Zeta8Record {
    pub k: u64,
    pub m: u32,
    pub n: u32,
    pub classes: usize,
    pub solutions: usize,
    /// None when the claim does not apply to k.
    pub property1: Option<bool>,
    pub property2: Option<bool>,
    /// Solutions violating an applicable claim, as coefficient vectors.
    pub discrepancies: Vec<Vec<i64>>,
}

/// Enumerate Y ∈ Z[ζ_8] with |Y|² = k² (k = 2^m·3^n) and check: if m > 0,
/// some multiple ηY has a coefficient above 2 in absolute value; if m = 0 and
/// n ≥ 2, some ηY is ±k or has every coefficient above 2.
pub fn lemma_zeta8_classes(k: u64) -> Result<Zeta8Record, WeilError> {
    let (m, n) = two_three(k)
        .ok_or_else(|| WeilError::Invalid(format!("{k} is not of the form 2^m 3^n")))?;
    let set = weil_enumerate(8, k * k)?;
    let all = all_solutions(8, k * k)?;
    let multiples = |y: &CycInt| -> Vec<CycInt> { (0..8).map(|j| y.mul_root(j)).collect() };
    let mut rec = Zeta8Record {
        k,
        m,
        n,
        classes: set.classes.len(),
        solutions: all.len(),
        property1: None,
        property2: None,
        discrepancies: Vec::new(),
    };
    if m > 0 {
        let bad: Vec<&CycInt> = all
            .iter()
            .filter(|y| !multiples(y).iter().any(|z| z.max_abs_coeff() > 2))
            .collect();
        rec.property1 = Some(bad.is_empty());
        rec.discrepancies
            .extend(bad.into_iter().map(|y| y.coeffs().to_vec()));
    } else if n >= 2 {
        let ok = |z: &CycInt| {
            z.as_integer().map(|c| c.unsigned_abs()) == Some(k)
                || z.coeffs().iter().all(|c| c.abs() > 2)
        };
        let bad: Vec<&CycInt> = all
            .iter()
            .filter(|y| !multiples(y).iter().any(ok))
            .collect();
        rec.property2 = Some(bad.is_empty());
        rec.discrepancies
            .extend(bad.into_iter().map(|y| y.coeffs().to_vec()));
    }
    Ok(rec)
}

type Holds = fn(u64, &Setting, u64) -> bool;

fn search(q: &CellQuery, rule: Rule, holds: Holds) -> Certificate {
    let Some(k) = square_root(q) else {
        return Certificate::inconclusive(q, rule, "n is not a square k^2 with k > 1");
    };
    for s in settings(q) {
        let e = s.exponent();
        // Larger ord_p(t) satisfies more of these bounds: try those first.
        let mut ts: Vec<u64> = eligible(k, e).to_vec();
        ts.sort_by_key(|&t| (std::cmp::Reverse(ord(t as i64, s.p)), t));
        if let Some(&t) = ts.iter().find(|&&t| holds(k, &s, t)) {
            return Certificate::nonexistent(q, rule)
                .param("quotient", s.group.factors())
                .param("a", s.a)
                .param("p", s.p)
                .param("d", s.d)
                .param("u", s.u)
                .param("k", k)
                .param("t", t)
                .param("w", ord(t as i64, s.p));
        }
    }
    Certificate::inconclusive(q, rule, "no quotient and multiplier satisfy the hypotheses")
}

pub fn rule_thm45(q: &CellQuery) -> Certificate {
    search(q, Rule::Thm45, thm45_holds)
}

pub fn rule_cor46(q: &CellQuery) -> Certificate {
    search(q, Rule::Cor46, cor46_holds)
}

pub fn rule_thm48(q: &CellQuery) -> Certificate {
    search(q, Rule::Thm48, thm48_holds)
}

pub fn rule_thm410(q: &CellQuery) -> Certificate {
    let c = search(q, Rule::Thm410, thm410_holds);
    match (c.is_nonexistent(), c.get_u64("k")) {
        (true, Some(k)) => match lemma_zeta8_classes(k) {
            Ok(rec) => c.param("zeta8", rec),
            Err(_) => c,
        },
        _ => c,
    }
}

pub fn rule_thm412(q: &CellQuery) -> Certificate {
    search(q, Rule::Thm412, |k, s, t| {
        thm412_holds(k, s, t, SelfConj::Literal)
    })
}

/// [`rule_thm412`] for u a power of 2, with the self-conjugacy hypothesis
/// replaced by an exhaustive check that ρ(X) is forced to be ±k up to a
/// root of unity. CW(2^c·23^d, 81) is the motivating family.
pub fn rule_cor415(q: &CellQuery) -> Certificate {
    search(q, Rule::Cor415, |k, s, t| {
        thm412_holds(k, s, t, SelfConj::Forced)
    })
}

pub(crate) fn recheck(c: &Certificate) -> bool {
    let q = &c.query;
    let (Some(g), Some(a), Some(p), Some(t), Some(k)) = (
        c.get_group("quotient"),
        c.get_u64("a"),
        c.get_u64("p"),
        c.get_u64("t"),
        c.get_u64("k"),
    ) else {
        return false;
    };
    if q.k() != Some(k) || !is_quotient_type(q, &g, a) {
        return false;
    }
    let Some(s) = Setting::new(g, a, p) else {
        return false;
    };
    match c.rule {
        Rule::Thm45 => thm45_holds(k, &s, t),
        Rule::Cor46 => cor46_holds(k, &s, t),
        Rule::Thm48 => thm48_holds(k, &s, t),
        Rule::Thm410 => thm410_holds(k, &s, t),
        Rule::Thm412 => thm412_holds(k, &s, t, SelfConj::Literal),
        Rule::Cor415 => thm412_holds(k, &s, t, SelfConj::Forced),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cw(v: u64, n: u64) -> CellQuery {
        CellQuery::cyclic(v, n)
    }

    #[test]
    fn cor46_w_values() {
        assert_eq!(cor46_w(1, 79, 2, 5), 39);
        assert_eq!(cor46_w(1, 23, 2, 3), gcd(ord(2, 23), ord(3, 23)));
    }

    #[test]
    fn thm45_examples() {
        assert!(rule_thm45(&cw(158, 100)).is_nonexistent());
        let g = AbelianGroup::from_cyclic_factors(&[2, 2, 11]);
        assert!(rule_thm45(&CellQuery::new(g, 9, 1)).is_nonexistent());
        let g = AbelianGroup::from_cyclic_factors(&[2, 2, 23]);
        let c = rule_thm45(&CellQuery::new(g, 36, 1));
        assert!(c.is_nonexistent());
        assert_eq!(c.get_u64("a"), Some(4));
        assert!(!rule_thm45(&cw(7, 4)).is_nonexistent());
        assert!(!rule_thm45(&cw(13, 9)).is_nonexistent());
    }

    #[test]
    fn thm48_examples() {
        assert!(rule_thm48(&cw(138, 36)).is_nonexistent());
        assert!(rule_thm48(&cw(184, 64)).is_nonexistent());
    }

    #[test]
    fn thm410_examples() {
        let c = rule_thm410(&cw(184, 36));
        assert!(c.is_nonexistent(), "{c:?}");
        assert!(super::super::recheck(&c));
        assert!(!rule_thm410(&cw(184, 9)).is_nonexistent());
    }

    #[test]
    fn zeta8_lemma() {
        let r = lemma_zeta8_classes(6).unwrap();
        assert_eq!(r.property1, Some(true));
        let r = lemma_zeta8_classes(12).unwrap();
        assert_eq!(r.property1, Some(true));
        // −7 − 4(ζ + ζ³) = −7 − 4√−2 has norm 81; every unit multiple keeps a
        // zero coefficient, so the second claim fails for k = 9.
        let r = lemma_zeta8_classes(9).unwrap();
        assert_eq!(r.property2, Some(false));
        assert!(r.discrepancies.contains(&vec![-7, -4, 0, -4]));
        // The weaker statement used by the rules still holds.
        assert!(zeta_gate(8, 9, 2).unwrap());
        let r = lemma_zeta8_classes(3).unwrap();
        assert_eq!((r.property1, r.property2), (None, None));
    }

    #[test]
    fn thm412_examples() {
        for (v, n) in [(190, 100), (133, 100), (112, 64)] {
            let c = rule_thm412(&cw(v, n));
            assert!(c.is_nonexistent(), "({v},{n})");
            assert!(super::super::recheck(&c));
        }
    }

    #[test]
    fn m_condition_squares() {
        // p = 23, k = 6, B = 5: M = 1 gives 24 − 23 = 1 = 1², split (1, 0).
        assert!(!m_condition(6, 23, 1, 5));
        // p = 7, k = 8, B = 2: M = 2 gives 36 = 6², split (4, −2) out of range.
        assert!(m_condition(8, 7, 16, 2));
        // p = 11, k = 8, u = 8, B = 2: M = 2 gives 20, and √5 ∉ Q(ζ_8).
        assert!(m_condition(8, 11, 8, 2));
        assert!(!m_condition(8, 11, 40, 2));
        // p = 11, k = 6, B = 4: M = 2 gives 4 = 2², split (2, 0) in range.
        assert!(!m_condition(6, 11, 6, 4));
    }

    #[test]
    fn squares_in_cyclotomic_fields() {
        assert!(square_in_cyclotomic(-1, 4));
        assert!(!square_in_cyclotomic(-1, 6));
        assert!(square_in_cyclotomic(-3, 3));
        assert!(square_in_cyclotomic(12, 12));
        assert!(!square_in_cyclotomic(3, 6));
        assert!(square_in_cyclotomic(8, 8));
        assert!(square_in_cyclotomic(5 * 9, 5));
        assert!(!square_in_cyclotomic(13, 1));
    }

    #[test]
    fn cor415_examples() {
        for (v, n) in [(184, 81), (23, 81), (46, 81), (92, 81), (152, 100)] {
            let c = rule_cor415(&cw(v, n));
            assert!(c.is_nonexistent(), "({v},{n})");
            assert!(super::super::recheck(&c));
        }
        // 10 is not self-conjugate modulo 8, so only the forced variant applies.
        assert!(!rule_thm412(&cw(152, 100)).is_nonexistent());
        assert!(!rule_cor415(&cw(13, 9)).is_nonexistent());
        // M = 2 gives 4 = 2² with the split (2, 0) inside the bound.
        assert!(!rule_cor415(&cw(88, 36)).is_nonexistent());
    }
}
