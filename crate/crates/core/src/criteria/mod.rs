//! The non-existence rule battery. Every rule is total: a failed hypothesis
//! yields an INCONCLUSIVE certificate, never an error.

mod battery;
mod certificate;
mod multiplier;
mod normalize;
mod reduction;

use serde::{Deserialize, Serialize};

use crate::grouprings::AbelianGroup;
use crate::numtheory::{exact_sqrt, factorize};

pub use battery::{run_battery, BatteryOptions, WeilPolicy};
pub use certificate::{recheck, Certificate, Conclusion, Rule};
pub use multiplier::{
    cor46_w, lemma_zeta8_classes, rule_cor415, rule_cor46, rule_thm410, rule_thm412, rule_thm45,
    rule_thm48, thm410_w, zeta_gate, Zeta8Record,
};
pub use normalize::{normalize_multiplier_translate, NoNormalization, Normalized};
pub use reduction::{
    orbit_diophantine_naive, refute_any, refute_proper, rule_icw_reduction, rule_orbit_cell,
    rule_orbit_diophantine, OrbitDiophantine,
};

/// A query: does a G-invariant ICW_a(|G|, n) exist?
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellQuery {
    pub group: AbelianGroup,
    pub n: u64,
    pub a: u64,
}

impl CellQuery {
    pub fn new(group: AbelianGroup, n: u64, a: u64) -> CellQuery {
        assert!(
            n >= 1 && a >= 1,
            "weight and coefficient bound must be positive"
        );
        CellQuery { group, n, a }
    }

    /// A circulant query CW(v, n) (a = 1).
    pub fn cyclic(v: u64, n: u64) -> CellQuery {
        CellQuery::new(AbelianGroup::cyclic(v), n, 1)
    }

    pub fn order(&self) -> u64 {
        self.group.order()
    }

    /// k with n = k², when n is a square.
    pub fn k(&self) -> Option<u64> {
        exact_sqrt(self.n)
    }
}

/// A quotient type H of the query group with the induced coefficient bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct QuotientType {
    pub group: AbelianGroup,
    pub a: u64,
}

/// Isomorphism types of all quotients of `q.group`, the group itself first,
/// then by decreasing order. The image of an ICW_a under G → H has
/// coefficients bounded by a·|G|/|H|.
pub(crate) fn quotient_types(q: &CellQuery) -> Vec<QuotientType> {
    // Per prime: exponents of the p-part, descending; a quotient's p-part has
    // exponents f_i ≤ e_i componentwise (both sorted descending).
    let mut per_prime: Vec<(u64, Vec<u32>)> = Vec::new();
    for &f in q.group.factors() {
        for (p, e) in factorize(f).factors {
            match per_prime.iter_mut().find(|x| x.0 == p) {
                Some(x) => x.1.push(e),
                None => per_prime.push((p, vec![e])),
            }
        }
    }
    let mut options: Vec<Vec<Vec<u64>>> = Vec::new();
    for (p, mut es) in per_prime {
        es.sort_unstable_by(|a, b| b.cmp(a));
        let mut out = Vec::new();
        let mut cur = Vec::new();
        dominated(&es, 0, u32::MAX, &mut cur, &mut out);
        options.push(
            out.into_iter()
                .map(|fs| fs.iter().filter(|&&f| f > 0).map(|&f| p.pow(f)).collect())
                .collect(),
        );
    }
    let mut types: Vec<Vec<u64>> = vec![Vec::new()];
    for opts in options {
        types = types
            .into_iter()
            .flat_map(|t| {
                opts.iter()
                    .map(move |o| t.iter().chain(o).copied().collect::<Vec<u64>>())
            })
            .collect();
    }
    let order = q.order();
    let mut out: Vec<QuotientType> = types
        .into_iter()
        .map(|cs| {
            let group = AbelianGroup::from_cyclic_factors(&cs);
            let a = q.a * (order / group.order());
            QuotientType { group, a }
        })
        .collect();
    out.sort_by(|x, y| {
        y.group
            .order()
            .cmp(&x.group.order())
            .then_with(|| x.group.cmp(&y.group))
    });
    out.dedup();
    out
}

fn dominated(es: &[u32], i: usize, cap: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if i == es.len() {
        out.push(cur.clone());
        return;
    }
    for f in 0..=es[i].min(cap) {
        cur.push(f);
        dominated(es, i + 1, f, cur, out);
        cur.pop();
    }
}

/// Whether `group` with bound `a` is one of the quotient types of `q`.
pub(crate) fn is_quotient_type(q: &CellQuery, group: &AbelianGroup, a: u64) -> bool {
    quotient_types(q)
        .iter()
        .any(|t| &t.group == group && t.a == a)
}

/// (F, numerator, denominator) of the F-bound for a quotient, when n exceeds it.
fn fbound_violation(n: u64, group: &AbelianGroup, a: u64) -> Option<(u64, u128, u128)> {
    use crate::numtheory::{f_value, phi};
    let w = group.exponent();
    let h = group.order() / w;
    let (f, num, den) = if w > 1 && n > 1 {
        let f = f_value(w, n);
        (f, ((a * h * f) as u128).pow(2), phi(f) as u128)
    } else {
        // Trivial exponent: X ∈ Z with |X| ≤ a·h.
        (1, ((a * h) as u128).pow(2), 1)
    };
    (n as u128 * den > num).then_some((f, num, den))
}

/// The F-bound: a G-invariant ICW_a(|G|, n) needs n ≤ a²h²F(w,n)²/φ(F(w,n)),
/// w = exp(G), h = |G|/w. Applied to every quotient type.
pub fn rule_fbound(q: &CellQuery) -> Certificate {
    for qt in quotient_types(q) {
        if let Some((f, num, den)) = fbound_violation(q.n, &qt.group, qt.a) {
            return Certificate::nonexistent(q, Rule::Fbound)
                .param("quotient", qt.group.factors())
                .param("a", qt.a)
                .param("F", f)
                .param("bound_num", num as u64)
                .param("bound_den", den as u64);
        }
    }
    Certificate::inconclusive(q, Rule::Fbound, "n within the F-bound for every quotient")
}

pub(crate) fn recheck_fbound(c: &Certificate) -> bool {
    let (Some(g), Some(a)) = (c.get_group("quotient"), c.get_u64("a")) else {
        return false;
    };
    is_quotient_type(&c.query, &g, a) && fbound_violation(c.query.n, &g, a).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotient_types_of_cyclic() {
        let q = CellQuery::cyclic(12, 36);
        let got: Vec<(Vec<u64>, u64)> = quotient_types(&q)
            .into_iter()
            .map(|t| (t.group.factors().to_vec(), t.a))
            .collect();
        assert_eq!(got.len(), 6);
        assert_eq!(got[0], (vec![12], 1));
        assert!(got.contains(&(vec![3], 4)));
        assert!(got.contains(&(vec![], 12)));
    }

    #[test]
    fn quotient_types_of_noncyclic() {
        let q = CellQuery::new(AbelianGroup::from_cyclic_factors(&[2, 2, 23]), 36, 1);
        let got: Vec<(Vec<u64>, u64)> = quotient_types(&q)
            .into_iter()
            .map(|t| (t.group.factors().to_vec(), t.a))
            .collect();
        assert!(got.contains(&(vec![23], 4)));
        assert!(got.contains(&(vec![2, 46], 1)));
        assert!(got.contains(&(vec![46], 2)));
        assert!(!got.iter().any(|g| g.0 == vec![4]));
    }

    #[test]
    fn fbound_examples() {
        for (v, n) in [
            (128, 49),
            (147, 64),
            (117, 81),
            (160, 100),
            (176, 100),
            (192, 100),
        ] {
            assert!(
                rule_fbound(&CellQuery::cyclic(v, n)).is_nonexistent(),
                "({v},{n})"
            );
        }
        assert!(!rule_fbound(&CellQuery::cyclic(7, 4)).is_nonexistent());
        let g = AbelianGroup::new(vec![2, 16]).unwrap();
        assert!(rule_fbound(&CellQuery::new(g, 64, 1)).is_nonexistent());
        let g = AbelianGroup::new(vec![3, 9]).unwrap();
        assert!(rule_fbound(&CellQuery::new(g, 49, 1)).is_nonexistent());
    }
}
