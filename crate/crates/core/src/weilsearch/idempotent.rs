//! Reconstruction of a cyclic weighing matrix from its character values on
//! the orders divisible by a prime r with r ∥ v.
//!
//! With e the rational idempotent killing characters trivial on C_r, the
//! component P = eD has P_k = N_k / v where
//! N_k = Σ_{w ∈ W} Tr_{Q(ζ_w)/Q}(X_w ζ_w^{-k}). Since rP = rD − C_r·ρ(D) is
//! integral and D has entries in [−a, a], on every C_r coset the values N_k
//! are congruent mod v and spread by at most 2av. The same holds at every
//! quotient C_{w2} with w2 ∈ W, using only the X_w with w | w2.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::cyclotomic::CycInt;
use crate::exec::Exec;
use crate::numtheory::{divisors, factorize, ramanujan_sum};

use super::{SolutionSet, WeilError};

/// Result of an integrality search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdempotentOutcome {
    pub v: u64,
    pub n: u64,
    pub a: u64,
    pub r: u64,
    /// Character orders whose values enter the reconstruction, ascending.
    pub levels: Vec<u64>,
    /// Number of choices tried at each level (top level: class count).
    pub choices: Vec<usize>,
    /// Partial assignments that passed their level check.
    pub nodes: u64,
    /// Top-level class indices and the numerators N_k (k = 0..v) of every
    /// complete assignment passing all checks.
    pub survivors: Vec<(usize, Vec<i64>)>,
}

impl IdempotentOutcome {
    pub fn refuted(&self) -> bool {
        self.survivors.is_empty()
    }
}

/// Primes r with r ∥ v, largest first.
pub fn split_primes(v: u64) -> Vec<u64> {
    let mut ps: Vec<u64> = factorize(v)
        .factors
        .iter()
        .filter(|f| f.1 == 1)
        .map(|f| f.0)
        .collect();
    ps.reverse();
    ps
}

/// Trace vector k ↦ Tr(x·ζ_w^{-k}) for k in 0..w.
fn trace_vector(x: &CycInt) -> Vec<i64> {
    let w = x.conductor();
    let p = x.to_power_coeffs();
    (0..w as i64)
        .map(|k| {
            p.iter()
                .enumerate()
                .filter(|(_, &b)| b != 0)
                .map(|(j, &b)| b * ramanujan_sum(w, j as i64 - k))
                .sum()
        })
        .collect()
}

struct Level {
    w: u64,
    /// Earlier level indices whose order divides w.
    below: Vec<usize>,
    options: Vec<Vec<i64>>,
}

fn level_ok(w2: u64, r: u64, a: u64, v: u64, nk: &[i64]) -> bool {
    let w2i = w2 as i64;
    if nk.iter().any(|&x| (x * r as i64) % w2i != 0) {
        return false;
    }
    let step = (w2 / r) as usize;
    let spread = 2 * (a * v) as i64;
    for start in 0..step {
        let first = nk[start];
        let (mut lo, mut hi) = (first, first);
        for &x in nk[start..].iter().step_by(step) {
            if (x - first) % w2i != 0 {
                return false;
            }
            lo = lo.min(x);
            hi = hi.max(x);
        }
        if hi - lo > spread {
            return false;
        }
    }
    true
}

/// Search all assignments of character values on the orders divisible by `r`.
/// `classes` must hold complete class lists for every such order.
pub fn integrality_search(
    v: u64,
    n: u64,
    a: u64,
    r: u64,
    classes: &BTreeMap<u64, Arc<SolutionSet>>,
    exec: Exec,
) -> Result<IdempotentOutcome, WeilError> {
    integrality_search_limited(v, n, a, r, classes, exec, u64::MAX)
}

/// As [`integrality_search`], failing with `SearchTooLarge` once the partial
/// assignments below the top level, or the top-level work, exceed `node_limit`.
pub fn integrality_search_limited(
    v: u64,
    n: u64,
    a: u64,
    r: u64,
    classes: &BTreeMap<u64, Arc<SolutionSet>>,
    exec: Exec,
    node_limit: u64,
) -> Result<IdempotentOutcome, WeilError> {
    assert!(
        v % r == 0 && (v / r) % r != 0,
        "r must divide v exactly once"
    );
    let orders: Vec<u64> = divisors(v).into_iter().filter(|w| w % r == 0).collect();
    let mut levels: Vec<Level> = Vec::new();
    for (i, &w) in orders.iter().enumerate() {
        let set = classes.get(&w).ok_or(WeilError::Incomplete { v: w, n })?;
        if !set.complete {
            return Err(WeilError::Incomplete { v: w, n });
        }
        let elems: Vec<CycInt> = if w == v {
            set.representatives().cloned().collect()
        } else {
            set.representatives().flat_map(|x| x.orbit()).collect()
        };
        let options = elems.iter().map(trace_vector).collect();
        let below = (0..i).filter(|&j| w % orders[j] == 0).collect();
        levels.push(Level { w, below, options });
    }
    let top = levels.len() - 1;
    let choices: Vec<usize> = levels.iter().map(|l| l.options.len()).collect();

    // Partial assignments through all levels below the top, then the top
    // level per class in parallel.
    let mut partial: Vec<Vec<usize>> = vec![Vec::new()];
    let mut nodes = 0u64;
    for li in 0..top {
        let lev = &levels[li];
        let work = partial.len() as u64 * lev.options.len() as u64;
        if work > node_limit {
            return Err(WeilError::SearchTooLarge {
                v,
                n,
                estimate: work as f64,
            });
        }
        let mut next = Vec::new();
        for assign in &partial {
            for (oi, opt) in lev.options.iter().enumerate() {
                let nk = numerators(&levels, assign, li, opt);
                if level_ok(lev.w, r, a, v, &nk) {
                    let mut ext = assign.clone();
                    ext.push(oi);
                    next.push(ext);
                }
            }
        }
        nodes += next.len() as u64;
        partial = next;
    }
    let work = partial.len() as u64 * levels[top].options.len() as u64;
    if work > node_limit {
        return Err(WeilError::SearchTooLarge {
            v,
            n,
            estimate: work as f64,
        });
    }
    let top_idx: Vec<usize> = (0..levels[top].options.len()).collect();
    let survivors: Vec<(usize, Vec<i64>)> = exec.flat_map(&top_idx, |&ci| {
        let opt = &levels[top].options[ci];
        partial
            .iter()
            .filter_map(|assign| {
                let nk = numerators(&levels, assign, top, opt);
                level_ok(v, r, a, v, &nk).then_some((ci, nk))
            })
            .collect::<Vec<_>>()
    });
    nodes += survivors.len() as u64;
    Ok(IdempotentOutcome {
        v,
        n,
        a,
        r,
        levels: orders,
        choices,
        nodes,
        survivors,
    })
}

fn numerators(levels: &[Level], assign: &[usize], li: usize, opt: &[i64]) -> Vec<i64> {
    let lev = &levels[li];
    let w2 = lev.w as usize;
    let mut nk = vec![0i64; w2];
    for (k, slot) in nk.iter_mut().enumerate() {
        *slot = opt[k];
    }
    for &j in &lev.below {
        let t = &levels[j].options[assign[j]];
        let w = t.len();
        for (k, slot) in nk.iter_mut().enumerate() {
            *slot += t[k % w];
        }
    }
    nk
}

/// Candidate matrices with entries in [−a, a] compatible with a surviving
/// numerator vector: on each C_r coset D_k = N_k / v + c for a shift c.
/// Returns None when more than `limit` combinations would be needed.
pub fn reconstruct(v: u64, a: u64, r: u64, nk: &[i64], limit: usize) -> Option<Vec<Vec<i64>>> {
    let step = (v / r) as usize;
    let vi = v as i64;
    let ai = a as i64;
    // Per coset, the admissible integer values D_k = (N_k + c') / v with
    // c' ≡ −N_k (mod v) shared across the coset.
    let mut per_coset: Vec<Vec<Vec<i64>>> = Vec::with_capacity(step);
    let mut total: usize = 1;
    for start in 0..step {
        let vals: Vec<i64> = nk[start..].iter().step_by(step).copied().collect();
        let base = (-vals[0]).rem_euclid(vi);
        let lo = vals.iter().map(|&x| -ai * vi - x).max().unwrap();
        let hi = vals.iter().map(|&x| ai * vi - x).min().unwrap();
        let mut opts = Vec::new();
        let mut c = lo + (base - lo).rem_euclid(vi);
        while c <= hi {
            opts.push(vals.iter().map(|&x| (x + c) / vi).collect());
            c += vi;
        }
        total = total.saturating_mul(opts.len());
        if total > limit {
            return None;
        }
        per_coset.push(opts);
    }
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; step];
    if per_coset.iter().any(|o| o.is_empty()) {
        return Some(out);
    }
    loop {
        let mut d = vec![0i64; v as usize];
        for (start, &i) in idx.iter().enumerate() {
            for (m, &val) in per_coset[start][i].iter().enumerate() {
                d[start + m * step] = val;
            }
        }
        out.push(d);
        let mut p = 0;
        while p < step {
            idx[p] += 1;
            if idx[p] < per_coset[p].len() {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
        if p == step {
            return Some(out);
        }
    }
}
