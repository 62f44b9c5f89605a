use std::collections::BTreeMap;

use crate::numtheory::{divisors, gcd, ramanujan_sum};

use super::{AbelianGroup, GroupElem, GroupError, GroupRingElem};

/// A rational element (1/denom)·Σ numer_g g of Q[G], kept in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalElem {
    pub group: AbelianGroup,
    pub denom: i64,
    pub numer: BTreeMap<GroupElem, i64>,
}

impl RationalElem {
    fn normalized(
        group: AbelianGroup,
        mut denom: i64,
        mut numer: BTreeMap<GroupElem, i64>,
    ) -> RationalElem {
        numer.retain(|_, c| *c != 0);
        let g = numer
            .values()
            .fold(denom.unsigned_abs(), |acc, &c| gcd(acc, c.unsigned_abs()))
            as i64;
        let g = if denom < 0 { -g } else { g };
        if g != 0 {
            denom /= g;
            for c in numer.values_mut() {
                *c /= g;
            }
        }
        RationalElem {
            group,
            denom,
            numer,
        }
    }

    pub fn from_int(x: &GroupRingElem) -> Option<RationalElem> {
        Some(RationalElem::normalized(
            x.group().clone(),
            1,
            x.int_coeffs()?,
        ))
    }

    pub fn one(group: &AbelianGroup) -> RationalElem {
        RationalElem::normalized(group.clone(), 1, [(group.identity(), 1)].into())
    }

    pub fn zero(group: &AbelianGroup) -> RationalElem {
        RationalElem::normalized(group.clone(), 1, BTreeMap::new())
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_empty()
    }

    pub fn add(&self, other: &RationalElem) -> RationalElem {
        let d = self.denom * other.denom;
        let mut numer: BTreeMap<GroupElem, i64> = BTreeMap::new();
        for (g, c) in &self.numer {
            *numer.entry(g.clone()).or_default() += c * other.denom;
        }
        for (g, c) in &other.numer {
            *numer.entry(g.clone()).or_default() += c * self.denom;
        }
        RationalElem::normalized(self.group.clone(), d, numer)
    }

    pub fn mul(&self, other: &RationalElem) -> RationalElem {
        let mut numer: BTreeMap<GroupElem, i64> = BTreeMap::new();
        for (g, a) in &self.numer {
            for (h, b) in &other.numer {
                *numer.entry(self.group.op(g, h)).or_default() += a * b;
            }
        }
        RationalElem::normalized(self.group.clone(), self.denom * other.denom, numer)
    }

    /// The integer element, when every coefficient is integral.
    pub fn to_integral(&self) -> Result<GroupRingElem, GroupError> {
        if self.denom != 1 {
            let g = self
                .numer
                .iter()
                .find(|(_, &c)| c % self.denom != 0)
                .map(|(g, _)| g.clone());
            return Err(GroupError::NonIntegral {
                g: g.expect("lowest terms"),
            });
        }
        GroupRingElem::from_int_terms(&self.group, self.numer.clone())
    }
}

/// The idempotent of Q[C_v] projecting onto the characters of order exactly d:
/// (1/v)·Σ_k c_d(k) x^k with c_d the Ramanujan sum.
pub fn idempotent_component(v: u64, d: u64) -> Result<RationalElem, GroupError> {
    if v == 0 || d == 0 || v % d != 0 {
        return Err(GroupError::NotDivisor { d, v });
    }
    let group = AbelianGroup::cyclic(v);
    let numer = (0..v)
        .map(|k| (group.element(k), ramanujan_sum(d, k as i64)))
        .collect();
    Ok(RationalElem::normalized(group, v as i64, numer))
}

/// All components of Q[C_v], by ascending d | v.
pub fn idempotent_components(v: u64) -> Vec<(u64, RationalElem)> {
    divisors(v)
        .into_iter()
        .map(|d| (d, idempotent_component(v, d).expect("divisor")))
        .collect()
}
