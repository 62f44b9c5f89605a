use serde::Serialize;
use thiserror::Error;

use crate::cyclotomic::roots_of_unity;
use crate::grouprings::{GroupElem, GroupRingElem};
use crate::numtheory::{gcd, inv_mod, lcm, modulo};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NoNormalization {
    #[error("X^(t) is not a signed root-of-unity multiple of a translate of X")]
    NotAMultiplier,
    #[error("gcd(t-1, u) and gcd(t-1, exp G) both exceed 1")]
    NoCoprimality,
    #[error("t is not coprime to lcm(u, exp G)")]
    NotCoprime,
}

/// A translate Y = ε·ζ_u^f·h·X with Y^{(t)} = sign·ζ_u^e·g·Y.
#[derive(Debug, Clone, Serialize)]
pub struct Normalized {
    #[serde(skip)]
    pub y: GroupRingElem,
    /// Exponent f of the root of unity applied.
    pub f: u64,
    /// Group element h applied.
    pub h: GroupElem,
    /// The relation satisfied by Y.
    pub sign: i64,
    pub e: u64,
    pub g: GroupElem,
    /// Which gcd(t−1, ·) = 1 condition was used: "v", "u" or "exp".
    pub case: &'static str,
}

fn mul_root(x: &GroupRingElem, s: i64, j: u64) -> GroupRingElem {
    let terms = x
        .terms()
        .iter()
        .map(|(g, c)| (g.clone(), c.mul_root(j as i64).scale(s)));
    GroupRingElem::from_terms(x.group(), x.conductor(), terms).expect("same group and conductor")
}

/// (sign, e, g) with X^{(t)} = sign·ζ_u^e·g·X.
fn relation(x: &GroupRingElem, t: i64) -> Result<(i64, u64, GroupElem), NoNormalization> {
    let xt = x.apply_t(t).map_err(|_| NoNormalization::NotCoprime)?;
    let group = x.group();
    let Some((h0, c0)) = x.terms().iter().next() else {
        return Ok((1, 0, group.identity()));
    };
    for (k, ck) in xt.terms() {
        // Candidate g maps h0 to k.
        let g = group.op(k, &group.inverse(h0));
        for (s, j) in roots_of_unity(x.conductor()) {
            if &c0.mul_root(j as i64).scale(s) != ck {
                continue;
            }
            if mul_root(&x.translate(&g), s, j) == xt {
                return Ok((s, j, g));
            }
        }
    }
    Err(NoNormalization::NotAMultiplier)
}

/// The h with h^{t−1} = g^{−1}, when t − 1 is invertible modulo exp(G).
fn root_of_translation(x: &GroupRingElem, t: i64, g: &GroupElem) -> Option<GroupElem> {
    let group = x.group();
    let m = group.exponent();
    let inv = inv_mod(t - 1, m)?;
    Some(group.pow(&group.inverse(g), inv as i64))
}

/// Translate X so that the multiplier t acts as simply as the coprimality of
/// t − 1 allows: Y^{(t)} = ±Y, ±g·Y or ±ζ_u^e·Y.
pub fn normalize_multiplier_translate(
    x: &GroupRingElem,
    t: i64,
) -> Result<Normalized, NoNormalization> {
    let u = x.conductor();
    let ex = x.group().exponent();
    let (sign, e, g) = relation(x, t)?;
    let id = x.group().identity();
    if modulo(t, lcm(u, ex).max(1)) == 1 % lcm(u, ex).max(1)
        && sign == 1
        && e % u.max(1) == 0
        && g == id
    {
        return Ok(Normalized {
            y: x.clone(),
            f: 0,
            h: id.clone(),
            sign,
            e: 0,
            g: id,
            case: "identity",
        });
    }
    // (1 − t)·f ≡ e (mod u) removes the root of unity.
    let root_fix = || -> Option<u64> {
        if u <= 1 {
            return Some(0);
        }
        let inv = inv_mod(1 - t, u)?;
        Some(modulo(inv as i64 * e as i64, u))
    };
    let coprime_u = u <= 1 || gcd(modulo(t - 1, u), u) == 1;
    let coprime_exp = ex <= 1 || gcd(modulo(t - 1, ex), ex) == 1;
    let build = |f: u64, h: GroupElem, e2: u64, g2: GroupElem, case| {
        let y = mul_root(&x.translate(&h), 1, f);
        Normalized {
            y,
            f,
            h,
            sign,
            e: e2,
            g: g2,
            case,
        }
    };
    if coprime_u && coprime_exp {
        let f = root_fix().expect("coprime");
        let h = root_of_translation(x, t, &g).expect("coprime");
        return Ok(build(f, h, 0, id.clone(), "v"));
    }
    if coprime_u {
        return Ok(build(root_fix().expect("coprime"), id.clone(), 0, g, "u"));
    }
    if coprime_exp {
        let h = root_of_translation(x, t, &g).expect("coprime");
        return Ok(build(0, h, e, id, "exp"));
    }
    Err(NoNormalization::NoCoprimality)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::CycInt;
    use crate::grouprings::AbelianGroup;

    #[test]
    fn fixed_translate_of_cw13_9() {
        // A CW(13, 9) moved off its fixed translate: 3 is a multiplier.
        let d = crate::weilsearch::orbit_search(13, 9, 1, 3).remove(0);
        let c13 = AbelianGroup::cyclic(13);
        let x = (0..13)
            .map(|i| GroupRingElem::cyclic(&d).translate(&c13.element(i)))
            .find(|x| x.apply_t(3).unwrap() != *x)
            .unwrap();
        let nm = normalize_multiplier_translate(&x, 3).unwrap();
        assert_eq!(nm.y.apply_t(3).unwrap(), mul_root(&nm.y, nm.sign, 0));
    }

    #[test]
    fn identity_multiplier() {
        let x = GroupRingElem::cyclic(&[1, 1, -1, 0, 0, 0, 0]);
        let nm = normalize_multiplier_translate(&x, 1).unwrap();
        assert_eq!(nm.y, x);
        assert_eq!(nm.case, "identity");
    }

    #[test]
    fn cyclotomic_coefficients() {
        // X = ζ_3·g over C_5 with t = 2: t − 1 = 1 is a unit everywhere.
        let g5 = AbelianGroup::cyclic(5);
        let x = GroupRingElem::from_terms(&g5, 3, [(g5.element(2), CycInt::root(3, 1))]).unwrap();
        let nm = normalize_multiplier_translate(&x, 2).unwrap();
        assert_eq!(nm.case, "v");
        assert_eq!(nm.y.apply_t(2).unwrap(), mul_root(&nm.y, nm.sign, 0));
    }

    #[test]
    fn not_a_multiplier() {
        let x = GroupRingElem::cyclic(&[1, 1, 0, 0, 0, 0, 0]);
        assert_eq!(
            normalize_multiplier_translate(&x, 3).unwrap_err(),
            NoNormalization::NotAMultiplier
        );
    }
}
