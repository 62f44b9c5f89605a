use std::fmt;

use serde::{Deserialize, Serialize};

use crate::numtheory::{factorize, gcd, lcm, modulo};

use super::GroupError;

/// An element of an abelian group, component i reduced mod the i-th invariant factor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElem(pub Vec<u64>);

impl fmt::Display for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// A finite abelian group Z/v_1 × … × Z/v_r with v_1 | v_2 | … | v_r, all v_i ≥ 2.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct AbelianGroup {
    factors: Vec<u64>,
}

impl TryFrom<Vec<u64>> for AbelianGroup {
    type Error = GroupError;
    fn try_from(v: Vec<u64>) -> Result<Self, GroupError> {
        AbelianGroup::new(v)
    }
}

impl From<AbelianGroup> for Vec<u64> {
    fn from(g: AbelianGroup) -> Vec<u64> {
        g.factors
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(u64::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl AbelianGroup {
    pub fn new(factors: Vec<u64>) -> Result<AbelianGroup, GroupError> {
        let ok = factors.iter().all(|&f| f >= 2) && factors.windows(2).all(|w| w[1] % w[0] == 0);
        if ok {
            Ok(AbelianGroup { factors })
        } else {
            Err(GroupError::NotInvariantFactors(factors))
        }
    }

    /// C_v; v = 1 gives the trivial group.
    pub fn cyclic(v: u64) -> AbelianGroup {
        assert!(v >= 1, "group order must be positive");
        AbelianGroup {
            factors: if v == 1 { vec![] } else { vec![v] },
        }
    }

    /// Invariant-factor form of C_{c_1} × … × C_{c_k} for arbitrary c_i ≥ 1.
    pub fn from_cyclic_factors(cs: &[u64]) -> AbelianGroup {
        let mut by_prime: std::collections::BTreeMap<u64, Vec<u64>> = Default::default();
        for &c in cs {
            assert!(c >= 1, "cyclic factor must be positive");
            for (p, e) in factorize(c).factors {
                by_prime.entry(p).or_default().push(p.pow(e));
            }
        }
        let rank = by_prime.values().map(Vec::len).max().unwrap_or(0);
        let mut factors = vec![1u64; rank];
        for pps in by_prime.values_mut() {
            pps.sort_unstable();
            for (i, &q) in pps.iter().rev().enumerate() {
                factors[rank - 1 - i] *= q;
            }
        }
        AbelianGroup { factors }
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn exponent(&self) -> u64 {
        self.factors.last().copied().unwrap_or(1)
    }

    pub fn is_cyclic(&self) -> bool {
        self.factors.len() <= 1
    }

    pub fn identity(&self) -> GroupElem {
        GroupElem(vec![0; self.rank()])
    }

    pub fn contains(&self, g: &GroupElem) -> bool {
        g.0.len() == self.rank() && g.0.iter().zip(&self.factors).all(|(x, v)| x < v)
    }

    pub fn check(&self, g: &GroupElem) -> Result<(), GroupError> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(GroupError::BadElement(g.clone()))
        }
    }

    /// Reduce an arbitrary integer tuple into the group.
    pub fn elem(&self, xs: &[i64]) -> GroupElem {
        assert_eq!(xs.len(), self.rank(), "tuple length must equal the rank");
        GroupElem(
            xs.iter()
                .zip(&self.factors)
                .map(|(&x, &v)| modulo(x, v))
                .collect(),
        )
    }

    /// The i-th element in lexicographic order.
    pub fn element(&self, mut i: u64) -> GroupElem {
        let mut xs = vec![0; self.rank()];
        for (x, &v) in xs.iter_mut().zip(&self.factors).rev() {
            *x = i % v;
            i /= v;
        }
        GroupElem(xs)
    }

    /// Position of g in lexicographic order.
    pub fn index(&self, g: &GroupElem) -> usize {
        g.0.iter()
            .zip(&self.factors)
            .fold(0u64, |acc, (&x, &v)| acc * v + x) as usize
    }

    pub fn elements(&self) -> Vec<GroupElem> {
        (0..self.order()).map(|i| self.element(i)).collect()
    }

    pub fn op(&self, g: &GroupElem, h: &GroupElem) -> GroupElem {
        GroupElem(
            g.0.iter()
                .zip(&h.0)
                .zip(&self.factors)
                .map(|((a, b), v)| (a + b) % v)
                .collect(),
        )
    }

    pub fn inverse(&self, g: &GroupElem) -> GroupElem {
        self.pow(g, -1)
    }

    pub fn pow(&self, g: &GroupElem, t: i64) -> GroupElem {
        GroupElem(
            g.0.iter()
                .zip(&self.factors)
                .map(|(&a, &v)| modulo((a as i128 * t as i128).rem_euclid(v as i128) as i64, v))
                .collect(),
        )
    }

    pub fn elem_order(&self, g: &GroupElem) -> u64 {
        g.0.iter()
            .zip(&self.factors)
            .fold(1, |acc, (&a, &v)| lcm(acc, v / gcd(a, v)))
    }

    /// The subgroup generated by `gens`, sorted.
    pub fn subgroup(&self, gens: &[GroupElem]) -> Result<Vec<GroupElem>, GroupError> {
        for g in gens {
            self.check(g)?;
        }
        let mut seen = vec![false; self.order() as usize];
        let id = self.identity();
        seen[self.index(&id)] = true;
        let mut elems = vec![id];
        let mut i = 0;
        while i < elems.len() {
            for g in gens {
                let h = self.op(&elems[i], g);
                let k = self.index(&h);
                if !seen[k] {
                    seen[k] = true;
                    elems.push(h);
                }
            }
            i += 1;
        }
        elems.sort();
        Ok(elems)
    }

    /// All characters, in lexicographic order of their exponent tuples.
    pub fn characters(&self) -> Vec<Character> {
        self.elements()
            .into_iter()
            .map(|g| Character {
                group: self.clone(),
                exps: g.0,
            })
            .collect()
    }

    pub fn character(&self, exps: &[i64]) -> Character {
        Character {
            group: self.clone(),
            exps: self.elem(exps).0,
        }
    }

    /// G/H for H generated by `gens`, via Smith normal form.
    pub fn quotient(&self, gens: &[GroupElem]) -> Result<Quotient, GroupError> {
        for g in gens {
            self.check(g)?;
        }
        let r = self.rank();
        let mut rows: Vec<Vec<i64>> = Vec::new();
        for (i, &v) in self.factors.iter().enumerate() {
            let mut row = vec![0i64; r];
            row[i] = v as i64;
            rows.push(row);
        }
        for g in gens {
            rows.push(g.0.iter().map(|&x| x as i64).collect());
        }
        let (diag, cols) = smith_columns(rows, r);
        let mut factors = Vec::new();
        let mut keep = Vec::new();
        for (k, &d) in diag.iter().enumerate() {
            if d != 1 {
                factors.push(d);
                keep.push(k);
            }
        }
        let target = AbelianGroup::new(factors).expect("smith form gives invariant factors");
        let map: Vec<Vec<i64>> = keep
            .iter()
            .map(|&k| (0..r).map(|i| cols[i][k]).collect())
            .collect();
        Ok(Quotient {
            source: self.clone(),
            target,
            map,
        })
    }
}

/// A surjection G → G/H with G/H in invariant-factor form.
#[derive(Debug, Clone)]
pub struct Quotient {
    source: AbelianGroup,
    target: AbelianGroup,
    /// Row k gives target coordinate k as a linear form in source coordinates.
    map: Vec<Vec<i64>>,
}

impl Quotient {
    pub fn source(&self) -> &AbelianGroup {
        &self.source
    }

    pub fn target(&self) -> &AbelianGroup {
        &self.target
    }

    pub fn image(&self, g: &GroupElem) -> GroupElem {
        let xs = self
            .map
            .iter()
            .zip(&self.target.factors)
            .map(|(row, &d)| {
                let s: i128 = row
                    .iter()
                    .zip(&g.0)
                    .map(|(&c, &x)| c as i128 * x as i128)
                    .sum();
                s.rem_euclid(d as i128) as u64
            })
            .collect();
        GroupElem(xs)
    }
}

/// Diagonal of the Smith form of the relation rows (length `r`) and the
/// unimodular column transform V with x ↦ xV realizing Z^r/R ≅ ⊕ Z/d_k.
fn smith_columns(mut m: Vec<Vec<i64>>, r: usize) -> (Vec<u64>, Vec<Vec<i64>>) {
    let mut v: Vec<Vec<i64>> = (0..r)
        .map(|i| (0..r).map(|j| i64::from(i == j)).collect())
        .collect();
    let rows = m.len();
    for t in 0..r {
        loop {
            // Pivot: smallest nonzero |entry| in the remaining block.
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..r {
                    if m[i][j] != 0 && best.map_or(true, |(a, b)| m[i][j].abs() < m[a][b].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return (finish_diag(&m, r), v);
            };
            m.swap(t, pi);
            for row in m.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.iter_mut() {
                row.swap(t, pj);
            }
            let p = m[t][t];
            let mut clean = true;
            for i in t + 1..rows {
                let q = m[i][t].div_euclid(p);
                if q != 0 {
                    for j in t..r {
                        m[i][j] -= q * m[t][j];
                    }
                }
                clean &= m[i][t] == 0;
            }
            for j in t + 1..r {
                let q = m[t][j].div_euclid(p);
                if q != 0 {
                    for i in 0..rows {
                        m[i][j] -= q * m[i][t];
                    }
                    for row in v.iter_mut() {
                        row[j] -= q * row[t];
                    }
                }
                clean &= m[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // Divisibility: fold any entry not divisible by the pivot into row t.
            let bad = (t + 1..rows).find(|&i| (t + 1..r).any(|j| m[i][j] % p != 0));
            match bad {
                Some(i) => {
                    for j in t..r {
                        m[t][j] += m[i][j];
                    }
                }
                None => break,
            }
        }
    }
    (finish_diag(&m, r), v)
}

fn finish_diag(m: &[Vec<i64>], r: usize) -> Vec<u64> {
    (0..r)
        .map(|k| {
            if k < m.len() {
                m[k][k].unsigned_abs()
            } else {
                0
            }
        })
        .collect()
}

/// A linear character χ(e_i) = ζ_{v_i}^{exps_i}.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Character {
    group: AbelianGroup,
    exps: Vec<u64>,
}

impl Character {
    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn exps(&self) -> &[u64] {
        &self.exps
    }

    pub fn trivial(group: &AbelianGroup) -> Character {
        Character {
            group: group.clone(),
            exps: vec![0; group.rank()],
        }
    }

    pub fn order(&self) -> u64 {
        self.group.elem_order(&GroupElem(self.exps.clone()))
    }

    /// j with χ(g) = ζ_E^j, E the group exponent.
    pub fn value_exp(&self, g: &GroupElem) -> u64 {
        let e = self.group.exponent();
        self.exps
            .iter()
            .zip(&g.0)
            .zip(&self.group.factors)
            .map(|((&a, &x), &v)| a * x % v * (e / v))
            .sum::<u64>()
            % e.max(1)
    }

    pub fn mul(&self, other: &Character) -> Character {
        Character {
            group: self.group.clone(),
            exps: self
                .group
                .op(
                    &GroupElem(self.exps.clone()),
                    &GroupElem(other.exps.clone()),
                )
                .0,
        }
    }

    pub fn pow(&self, t: i64) -> Character {
        Character {
            group: self.group.clone(),
            exps: self.group.pow(&GroupElem(self.exps.clone()), t).0,
        }
    }

    /// Elements on which χ is trivial.
    pub fn kernel(&self) -> Vec<GroupElem> {
        self.group
            .elements()
            .into_iter()
            .filter(|g| self.value_exp(g) == 0)
            .collect()
    }
}
