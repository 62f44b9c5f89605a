//! Group rings Z[ζ_u][G] over finite abelian groups, characters, the
//! inversion formula, projections, and rational idempotents of cyclic groups.

mod group;
mod idempotent;

use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::cyclotomic::{CycError, CycInt};
use crate::numtheory::{gcd, lcm};

pub use group::{AbelianGroup, Character, GroupElem, Quotient};
pub use idempotent::{idempotent_component, idempotent_components, RationalElem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("{0:?} is not an invariant-factor list")]
    NotInvariantFactors(Vec<u64>),
    #[error("element {0} does not belong to the group")]
    BadElement(GroupElem),
    #[error("group mismatch: {0} vs {1}")]
    GroupMismatch(AbelianGroup, AbelianGroup),
    #[error("{t} is not coprime to {m}")]
    NotCoprime { t: i64, m: u64 },
    #[error("coefficient at {g} is not integral")]
    NonIntegral { g: GroupElem },
    #[error("coefficient at {g} does not lie in Z[zeta_{u}]")]
    OutsideCoefficientRing { g: GroupElem, u: u64 },
    #[error("expected a value for each of the {expected} characters, got {got}")]
    MissingCharacters { expected: usize, got: usize },
    #[error("{d} does not divide {v}")]
    NotDivisor { d: u64, v: u64 },
    #[error("subgroups do not give a direct product decomposition")]
    InvalidFactorization,
    #[error(transparent)]
    Cyclotomic(#[from] CycError),
}

/// A finitely supported Σ X_g g with X_g ∈ Z[ζ_u]; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupRingElem {
    group: AbelianGroup,
    u: u64,
    terms: BTreeMap<GroupElem, CycInt>,
}

impl GroupRingElem {
    pub fn zero(group: &AbelianGroup, u: u64) -> GroupRingElem {
        GroupRingElem {
            group: group.clone(),
            u,
            terms: BTreeMap::new(),
        }
    }

    /// n·1_G.
    pub fn scalar(group: &AbelianGroup, u: u64, n: i64) -> GroupRingElem {
        let mut x = GroupRingElem::zero(group, u);
        x.add_term(group.identity(), CycInt::from_int(u, n));
        x
    }

    pub fn from_terms(
        group: &AbelianGroup,
        u: u64,
        terms: impl IntoIterator<Item = (GroupElem, CycInt)>,
    ) -> Result<GroupRingElem, GroupError> {
        let mut x = GroupRingElem::zero(group, u);
        for (g, c) in terms {
            group.check(&g)?;
            if c.conductor() != u {
                return Err(CycError::ConductorMismatch(c.conductor(), u).into());
            }
            x.add_term(g, c);
        }
        Ok(x)
    }

    /// An integer group-ring element.
    pub fn from_int_terms(
        group: &AbelianGroup,
        terms: impl IntoIterator<Item = (GroupElem, i64)>,
    ) -> Result<GroupRingElem, GroupError> {
        GroupRingElem::from_terms(
            group,
            1,
            terms.into_iter().map(|(g, c)| (g, CycInt::from_int(1, c))),
        )
    }

    /// Σ d_k x^k in Z[C_v] from a length-v coefficient vector.
    pub fn cyclic(d: &[i64]) -> GroupRingElem {
        let group = AbelianGroup::cyclic(d.len() as u64);
        let terms = d
            .iter()
            .enumerate()
            .map(|(k, &c)| (group.element(k as u64), c));
        GroupRingElem::from_int_terms(&group, terms).expect("elements in range")
    }

    fn add_term(&mut self, g: GroupElem, c: CycInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(g) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn conductor(&self) -> u64 {
        self.u
    }

    pub fn terms(&self) -> &BTreeMap<GroupElem, CycInt> {
        &self.terms
    }

    pub fn coeff(&self, g: &GroupElem) -> CycInt {
        self.terms
            .get(g)
            .cloned()
            .unwrap_or_else(|| CycInt::zero(self.u))
    }

    pub fn support(&self) -> Vec<GroupElem> {
        self.terms.keys().cloned().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Rational integer coefficients, when every coefficient is rational.
    pub fn int_coeffs(&self) -> Option<BTreeMap<GroupElem, i64>> {
        self.terms
            .iter()
            .map(|(g, c)| c.as_integer().map(|x| (g.clone(), x)))
            .collect()
    }

    /// Coefficient vector indexed by lexicographic element order (integer elements only).
    pub fn dense(&self) -> Option<Vec<i64>> {
        let mut out = vec![0i64; self.group.order() as usize];
        for (g, c) in self.int_coeffs()? {
            out[self.group.index(&g)] = c;
        }
        Some(out)
    }

    fn same(&self, other: &GroupRingElem) -> Result<(), GroupError> {
        if self.group != other.group {
            return Err(GroupError::GroupMismatch(
                self.group.clone(),
                other.group.clone(),
            ));
        }
        if self.u != other.u {
            return Err(CycError::ConductorMismatch(self.u, other.u).into());
        }
        Ok(())
    }

    pub fn add(&self, other: &GroupRingElem) -> Result<GroupRingElem, GroupError> {
        self.same(other)?;
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.add_term(g.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &GroupRingElem) -> Result<GroupRingElem, GroupError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> GroupRingElem {
        self.scale(-1)
    }

    pub fn scale(&self, k: i64) -> GroupRingElem {
        let mut out = GroupRingElem::zero(&self.group, self.u);
        for (g, c) in &self.terms {
            out.add_term(g.clone(), c.scale(k));
        }
        out
    }

    /// X·g.
    pub fn translate(&self, h: &GroupElem) -> GroupRingElem {
        let mut out = GroupRingElem::zero(&self.group, self.u);
        for (g, c) in &self.terms {
            out.add_term(self.group.op(g, h), c.clone());
        }
        out
    }

    /// Lift coefficients to Z[ζ_w] for u | w.
    pub fn lift(&self, w: u64) -> Result<GroupRingElem, GroupError> {
        let mut out = GroupRingElem::zero(&self.group, w);
        for (g, c) in &self.terms {
            out.add_term(g.clone(), c.lift(w)?);
        }
        Ok(out)
    }

    /// The group-ring product.
    pub fn convolve(&self, other: &GroupRingElem) -> Result<GroupRingElem, GroupError> {
        self.same(other)?;
        let mut out = GroupRingElem::zero(&self.group, self.u);
        if self.u == 1 {
            // Integer fast path on a dense accumulator.
            let n = self.group.order() as usize;
            let mut acc = vec![0i64; n];
            for (g, a) in &self.terms {
                let a = a.as_integer().expect("conductor 1");
                for (h, b) in &other.terms {
                    acc[self.group.index(&self.group.op(g, h))] +=
                        a * b.as_integer().expect("conductor 1");
                }
            }
            for (i, c) in acc.into_iter().enumerate() {
                out.add_term(self.group.element(i as u64), CycInt::from_int(1, c));
            }
            return Ok(out);
        }
        for (g, a) in &self.terms {
            for (h, b) in &other.terms {
                out.add_term(self.group.op(g, h), a * b);
            }
        }
        Ok(out)
    }

    /// X^{(t)} = Σ σ_t(X_g) g^t.
    pub fn apply_t(&self, t: i64) -> Result<GroupRingElem, GroupError> {
        let m = lcm(self.u, self.group.exponent());
        if gcd(crate::numtheory::modulo(t, m.max(1)), m) != 1 && m > 1 {
            return Err(GroupError::NotCoprime { t, m });
        }
        let mut out = GroupRingElem::zero(&self.group, self.u);
        for (g, c) in &self.terms {
            out.add_term(self.group.pow(g, t), c.galois(t)?);
        }
        Ok(out)
    }

    /// Σ c_g² over integer coefficients, or None for non-rational coefficients.
    pub fn weight(&self) -> Option<i64> {
        self.int_coeffs().map(|m| m.values().map(|c| c * c).sum())
    }
}

impl fmt::Debug for GroupRingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupRingElem({} over Z[z{}]: ", self.group, self.u)?;
        let mut first = true;
        for (g, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c}){g}")?;
        }
        write!(f, ")")
    }
}

/// χ(X) = Σ X_g χ(g) at conductor lcm(u, exp G).
pub fn char_eval(chi: &Character, x: &GroupRingElem) -> Result<CycInt, GroupError> {
    if chi.group() != x.group() {
        return Err(GroupError::GroupMismatch(
            chi.group().clone(),
            x.group().clone(),
        ));
    }
    let e = x.group.exponent();
    let l = lcm(x.u, e);
    let mut out = CycInt::zero(l);
    for (g, c) in &x.terms {
        let j = chi.value_exp(g) * (l / e);
        out = &out + &c.lift(l)?.mul_root(j as i64);
    }
    Ok(out)
}

/// Recover X from its character values: X_g = |G|^{-1} Σ_χ χ(X)·conj(χ(g)).
/// Coefficients are returned in Z[ζ_u].
pub fn inversion(
    values: &BTreeMap<Character, CycInt>,
    group: &AbelianGroup,
    u: u64,
) -> Result<GroupRingElem, GroupError> {
    let order = group.order();
    if values.len() as u64 != order || values.keys().any(|c| c.group() != group) {
        return Err(GroupError::MissingCharacters {
            expected: order as usize,
            got: values.len(),
        });
    }
    let e = group.exponent();
    let l = values
        .values()
        .fold(lcm(u, e), |acc, v| lcm(acc, v.conductor()));
    let lifted: Vec<(&Character, CycInt)> = values
        .iter()
        .map(|(c, v)| Ok((c, v.lift(l)?)))
        .collect::<Result<_, CycError>>()?;
    let mut out = GroupRingElem::zero(group, u);
    for g in group.elements() {
        let mut s = CycInt::zero(l);
        for (chi, v) in &lifted {
            let j = chi.value_exp(&g) * (l / e);
            s = &s + &v.mul_root(-(j as i64));
        }
        let c = s
            .divisible_by_integer(order as i64)
            .ok_or_else(|| GroupError::NonIntegral { g: g.clone() })?;
        let c = c
            .descend(u)?
            .ok_or_else(|| GroupError::OutsideCoefficientRing { g: g.clone(), u })?;
        out.add_term(g, c);
    }
    Ok(out)
}

/// Image of X in Z[ζ_u][G/H], H generated by `kernel`.
pub fn project(
    x: &GroupRingElem,
    kernel: &[GroupElem],
) -> Result<(Quotient, GroupRingElem), GroupError> {
    let q = x.group.quotient(kernel)?;
    let mut out = GroupRingElem::zero(q.target(), x.u);
    for (g, c) in &x.terms {
        out.add_term(q.image(g), c.clone());
    }
    Ok((q, out))
}

/// For G = U×V (U, V generated by the given elements), the map g = hv ↦ χ(h)·v
/// into Z[ζ][G/U], G/U identified with V.
pub fn partial_char(
    x: &GroupRingElem,
    u_gens: &[GroupElem],
    v_gens: &[GroupElem],
    chi: &Character,
) -> Result<(Quotient, GroupRingElem), GroupError> {
    let g = &x.group;
    if chi.group() != g {
        return Err(GroupError::GroupMismatch(chi.group().clone(), g.clone()));
    }
    let us = g.subgroup(u_gens)?;
    let vs = g.subgroup(v_gens)?;
    if us.len() as u64 * vs.len() as u64 != g.order() {
        return Err(GroupError::InvalidFactorization);
    }
    // Decomposition table g ↦ (h, v).
    let mut split: Vec<Option<(usize, usize)>> = vec![None; g.order() as usize];
    for (i, h) in us.iter().enumerate() {
        for (j, v) in vs.iter().enumerate() {
            let k = g.index(&g.op(h, v));
            if split[k].is_some() {
                return Err(GroupError::InvalidFactorization);
            }
            split[k] = Some((i, j));
        }
    }
    let q = g.quotient(u_gens)?;
    let e = g.exponent();
    let l = lcm(x.u, e);
    let mut out = GroupRingElem::zero(q.target(), l);
    for (elem, c) in &x.terms {
        let (i, j) = split[g.index(elem)].expect("decomposition is total");
        let j_exp = chi.value_exp(&us[i]) * (l / e);
        out.add_term(q.image(&vs[j]), c.lift(l)?.mul_root(j_exp as i64));
    }
    Ok((q, out))
}

/// Orbits of g ↦ g^t, each sorted, ordered by size then least element.
pub fn orbits_under_power(group: &AbelianGroup, t: i64) -> Result<Vec<Vec<GroupElem>>, GroupError> {
    let m = group.exponent();
    if m > 1 && gcd(crate::numtheory::modulo(t, m), m) != 1 {
        return Err(GroupError::NotCoprime { t, m });
    }
    let mut seen = vec![false; group.order() as usize];
    let mut orbits = Vec::new();
    for g in group.elements() {
        if seen[group.index(&g)] {
            continue;
        }
        let mut orbit = Vec::new();
        let mut h = g.clone();
        while !seen[group.index(&h)] {
            seen[group.index(&h)] = true;
            orbit.push(h.clone());
            h = group.pow(&h, t);
        }
        orbit.sort();
        orbits.push(orbit);
    }
    orbits.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a[0].cmp(&b[0])));
    Ok(orbits)
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    g: GroupElem,
    c: CoeffJson,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoeffJson {
    Int(i64),
    Cyc(CycInt),
}

#[derive(Serialize, Deserialize)]
struct ElemJson {
    group: Vec<u64>,
    u: u64,
    terms: Vec<TermJson>,
}

impl Serialize for GroupRingElem {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ElemJson {
            group: self.group.factors().to_vec(),
            u: self.u,
            terms: self
                .terms
                .iter()
                .map(|(g, c)| TermJson {
                    g: g.clone(),
                    c: CoeffJson::Cyc(c.clone()),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupRingElem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = ElemJson::deserialize(d)?;
        let group = AbelianGroup::new(j.group).map_err(D::Error::custom)?;
        let terms: Vec<(GroupElem, CycInt)> = j
            .terms
            .into_iter()
            .map(|t| {
                let c = match t.c {
                    CoeffJson::Int(n) => CycInt::from_int(j.u, n),
                    CoeffJson::Cyc(c) => c,
                };
                (t.g, c)
            })
            .collect();
        GroupRingElem::from_terms(&group, j.u, terms).map_err(D::Error::custom)
    }
}
