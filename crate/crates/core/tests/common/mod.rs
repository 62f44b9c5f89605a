//! Randomized identity checks shared by the property suite and the
//! acceptance harness. Each check draws its inputs from the given RNG and
//! returns a description of the first mismatch.

#![allow(dead_code)]

use std::collections::BTreeMap;

use cwm_core::criteria::{orbit_diophantine_naive, rule_orbit_diophantine};
use cwm_core::cyclotomic::CycInt;
use cwm_core::grouprings::{
    char_eval, idempotent_components, inversion, AbelianGroup, GroupRingElem, RationalElem,
};
use cwm_core::numtheory::{gcd, lcm};
use cwm_core::weilsearch::verify_weighing;
use rand::rngs::StdRng;
use rand::Rng;

pub type Check = fn(&mut StdRng) -> Result<(), String>;

pub const CHECKS: [(&str, Check); 5] = [
    ("inversion roundtrip", inversion_roundtrip),
    ("convolution vs characters", convolution_vs_characters),
    ("galois action", galois_action),
    ("idempotent orthogonality", idempotent_orthogonality),
    ("orbit diophantine oracle", orbit_diophantine_oracle),
];

/// A random abelian group of order at most `max_order`.
pub fn random_group(rng: &mut StdRng, max_order: u64) -> AbelianGroup {
    let mut cs = Vec::new();
    let mut order = 1;
    loop {
        let f = rng.gen_range(2..=12u64);
        if order * f > max_order || (!cs.is_empty() && rng.gen_bool(0.4)) {
            break;
        }
        cs.push(f);
        order *= f;
    }
    AbelianGroup::from_cyclic_factors(&cs)
}

fn random_cyc(rng: &mut StdRng, u: u64) -> CycInt {
    let terms: Vec<(i64, i64)> = (0..rng.gen_range(0..=3))
        .map(|_| (rng.gen_range(0..u as i64), rng.gen_range(-3..=3)))
        .collect();
    CycInt::from_terms(u, &terms)
}

/// A sparse element with random coefficients in Z[ζ_u].
pub fn random_elem(rng: &mut StdRng, group: &AbelianGroup, u: u64) -> GroupRingElem {
    let mut terms = Vec::new();
    for g in group.elements() {
        if rng.gen_bool(0.4) {
            terms.push((g, random_cyc(rng, u)));
        }
    }
    GroupRingElem::from_terms(group, u, terms).expect("valid terms")
}

pub fn random_int_elem(rng: &mut StdRng, group: &AbelianGroup, a: i64) -> GroupRingElem {
    let terms: Vec<_> = group
        .elements()
        .into_iter()
        .map(|g| (g, rng.gen_range(-a..=a)))
        .collect();
    GroupRingElem::from_int_terms(group, terms).expect("valid terms")
}

fn random_unit(rng: &mut StdRng, m: u64) -> i64 {
    loop {
        let t = rng.gen_range(1..=m.max(2) as i64);
        if gcd(t as u64, m) == 1 {
            return t;
        }
    }
}

/// Known circulant weighing matrices, used as building blocks.
const BLOCKS: [&[i64]; 7] = [
    &[1],
    &[0, 1],
    &[0, 0, 1],
    &[-1, 1, 1, 1],
    &[0, 1, 0, 0, 0],
    &[-1, 1, 1, 0, 1, 0, 0],
    &[0, -1, -1, -1, 1, -1, -1, 0, 0, -1, 1, 0, 1],
];

/// A ±1/0 element that is a weighing matrix: a Kronecker product of blocks of
/// coprime orders, or a Hadamard element of C2×C2, moved by a random
/// translate, sign and multiplier.
fn structured_weighing(rng: &mut StdRng) -> GroupRingElem {
    if rng.gen_bool(0.15) {
        let g = AbelianGroup::new(vec![2, 2]).unwrap();
        let terms =
            [([0, 0], 1), ([1, 0], 1), ([0, 1], 1), ([1, 1], -1)].map(|(e, c)| (g.elem(&e), c));
        return GroupRingElem::from_int_terms(&g, terms).unwrap();
    }
    let mut d: Vec<i64> = vec![1];
    for _ in 0..rng.gen_range(1..=3) {
        let b = BLOCKS[rng.gen_range(0..BLOCKS.len())];
        let (m1, m2) = (d.len(), b.len());
        if gcd(m1 as u64, m2 as u64) != 1 || m1 * m2 > 60 {
            continue;
        }
        let mut out = vec![0i64; m1 * m2];
        for (i, &x) in d.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                // CRT: the k with k ≡ i (mod m1), k ≡ j (mod m2).
                let k = (0..m1 * m2).find(|k| k % m1 == i && k % m2 == j).unwrap();
                out[k] = x * y;
            }
        }
        d = out;
    }
    let x = GroupRingElem::cyclic(&d);
    let g = x.group().clone();
    let h = g.element(rng.gen_range(0..g.order()));
    let t = random_unit(rng, g.exponent());
    let x = x.translate(&h).apply_t(t).unwrap();
    if rng.gen_bool(0.5) {
        x.neg()
    } else {
        x
    }
}

/// Change one coefficient to a different value in {−1, 0, 1}.
fn perturb(rng: &mut StdRng, x: &GroupRingElem) -> GroupRingElem {
    let g = x.group();
    let e = g.element(rng.gen_range(0..g.order()));
    let old = x.coeff(&e).as_integer().unwrap();
    let choices: Vec<i64> = [-1, 0, 1].into_iter().filter(|&c| c != old).collect();
    let new = choices[rng.gen_range(0..2)];
    let delta = GroupRingElem::from_int_terms(g, [(e, new - old)]).unwrap();
    x.add(&delta).unwrap()
}

pub fn inversion_roundtrip(rng: &mut StdRng) -> Result<(), String> {
    let group = random_group(rng, 60);
    let u = [1, 3, 4, 5, 8][rng.gen_range(0..5)];
    let x = random_elem(rng, &group, u);
    let values: BTreeMap<_, _> = group
        .characters()
        .into_iter()
        .map(|chi| {
            let v = char_eval(&chi, &x).unwrap();
            (chi, v)
        })
        .collect();
    let back = inversion(&values, &group, u).map_err(|e| e.to_string())?;
    if back != x {
        return Err(format!("{group}, u = {u}: {x:?} came back as {back:?}"));
    }
    Ok(())
}

pub fn convolution_vs_characters(rng: &mut StdRng) -> Result<(), String> {
    let kind = rng.gen_range(0..3);
    let x = match kind {
        0 => {
            let group = random_group(rng, 60);
            random_int_elem(rng, &group, 1)
        }
        1 => structured_weighing(rng),
        _ => {
            let x = structured_weighing(rng);
            perturb(rng, &x)
        }
    };
    let n = x.weight().unwrap() as u64;
    let by_convolution = verify_weighing(&x, n, 1);
    let by_characters = x
        .group()
        .characters()
        .iter()
        .all(|chi| char_eval(chi, &x).unwrap().abs_sq().as_integer() == Some(n as i64));
    if by_convolution != by_characters {
        return Err(format!(
            "{x:?}: convolution says {by_convolution}, characters say {by_characters}"
        ));
    }
    if kind == 1 && !by_convolution {
        return Err(format!("{x:?} is built as a weighing matrix but fails"));
    }
    Ok(())
}

pub fn galois_action(rng: &mut StdRng) -> Result<(), String> {
    let group = random_group(rng, 60);
    let u = [1, 3, 4, 5][rng.gen_range(0..4)];
    let x = random_elem(rng, &group, u);
    let y = random_elem(rng, &group, u);
    let l = lcm(u, group.exponent());
    let t = random_unit(rng, l);
    let xt = x.apply_t(t).unwrap();
    for chi in group.characters() {
        // χ(X^{(t)}) = σ_t(χ(X)).
        let lhs = char_eval(&chi, &xt).unwrap();
        let rhs = char_eval(&chi, &x).unwrap().galois(t).unwrap();
        if lhs != rhs {
            return Err(format!("{group}, t = {t}, {chi:?}: {lhs:?} != {rhs:?}"));
        }
    }
    // σ_t is a ring automorphism of Z[ζ_u], and σ_{−1} is conjugation.
    let (a, b) = (random_cyc(rng, l), random_cyc(rng, l));
    let sum = (&a + &b).galois(t).unwrap();
    let prod = a.try_mul(&b).unwrap().galois(t).unwrap();
    let (at, bt) = (a.galois(t).unwrap(), b.galois(t).unwrap());
    if sum != &at + &bt || prod != at.try_mul(&bt).unwrap() || a.galois(-1).unwrap() != a.conj() {
        return Err(format!("σ_{t} not a ring automorphism on {a:?}, {b:?}"));
    }
    // (XY)^{(t)} = X^{(t)}Y^{(t)}.
    let lhs = x.convolve(&y).unwrap().apply_t(t).unwrap();
    let rhs = xt.convolve(&y.apply_t(t).unwrap()).unwrap();
    if lhs != rhs {
        return Err(format!("{group}, t = {t}: (XY)^(t) != X^(t)Y^(t)"));
    }
    Ok(())
}

pub fn idempotent_orthogonality(rng: &mut StdRng) -> Result<(), String> {
    let v = rng.gen_range(1..=60u64);
    let group = AbelianGroup::cyclic(v);
    let comps = idempotent_components(v);
    let mut total = RationalElem::zero(&group);
    for (d, e) in &comps {
        total = total.add(e);
        for (d2, e2) in &comps {
            let p = e.mul(e2);
            let want = if d == d2 {
                e.clone()
            } else {
                RationalElem::zero(&group)
            };
            if p != want {
                return Err(format!("v = {v}: e_{d}·e_{d2} is wrong"));
            }
        }
    }
    if total != RationalElem::one(&group) {
        return Err(format!("v = {v}: the components do not sum to 1"));
    }
    // χ(e_d) = 1 for χ of order d and 0 otherwise, checked on v·e_d.
    for (d, e) in &comps {
        let scaled: Vec<_> = e
            .numer
            .iter()
            .map(|(g, c)| (g.clone(), c * (v as i64 / e.denom)))
            .collect();
        let ve = GroupRingElem::from_int_terms(&group, scaled).unwrap();
        for chi in group.characters() {
            let want = if chi.order() == *d { v as i64 } else { 0 };
            if char_eval(&chi, &ve).unwrap().as_integer() != Some(want) {
                return Err(format!(
                    "v = {v}: character of order {} on e_{d}",
                    chi.order()
                ));
            }
        }
    }
    // X = Σ_d e_d·X.
    let x = random_int_elem(rng, &group, 2);
    let rx = RationalElem::from_int(&x).unwrap();
    let sum = comps
        .iter()
        .fold(RationalElem::zero(&group), |acc, (_, e)| {
            acc.add(&e.mul(&rx))
        });
    if sum != rx {
        return Err(format!("v = {v}: components of X do not sum to X"));
    }
    Ok(())
}

pub fn orbit_diophantine_oracle(rng: &mut StdRng) -> Result<(), String> {
    let sizes: Vec<u64> = (0..rng.gen_range(1..=5))
        .map(|_| rng.gen_range(1..=6))
        .collect();
    let a = rng.gen_range(1..=2u64);
    let total: u64 = sizes.iter().sum();
    let (t1, t2) = if rng.gen_bool(0.5) {
        let c: Vec<i64> = sizes
            .iter()
            .map(|_| rng.gen_range(-(a as i64)..=a as i64))
            .collect();
        let s1 = c.iter().zip(&sizes).map(|(c, &s)| c * s as i64).sum();
        let s2 = c.iter().zip(&sizes).map(|(c, &s)| (c * c) as u64 * s).sum();
        (s1, s2)
    } else {
        (
            rng.gen_range(-(total as i64)..=total as i64),
            rng.gen_range(0..=total * a * a),
        )
    };
    let got = rule_orbit_diophantine(&sizes, a, t1, t2);
    let want = orbit_diophantine_naive(&sizes, a, t1, t2);
    if !got.complete || got.feasible != want {
        return Err(format!(
            "sizes {sizes:?}, a = {a}, ({t1}, {t2}): got {}",
            got.feasible
        ));
    }
    for c in &got.solutions {
        let s1: i64 = c.iter().zip(&sizes).map(|(c, &s)| c * s as i64).sum();
        let s2: i64 = c.iter().zip(&sizes).map(|(c, &s)| c * c * s as i64).sum();
        if s1 != t1 || s2 != t2 as i64 || c.iter().any(|c| c.unsigned_abs() > a) {
            return Err(format!("sizes {sizes:?}: bad solution {c:?}"));
        }
    }
    Ok(())
}

/// Run `check` on `cases` consecutive seeds starting at `seed`.
pub fn run_seeded(check: Check, seed: u64, cases: u64) -> Result<(), String> {
    use rand::SeedableRng;
    for s in seed..seed + cases {
        check(&mut StdRng::seed_from_u64(s)).map_err(|e| format!("seed {s}: {e}"))?;
    }
    Ok(())
}
