//! Elementary number theory: factorization, multiplicative orders,
//! self-conjugacy and the field-descent value F(v, n).

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumTheoryError {
    #[error("{t} is not a unit modulo {m}")]
    NotCoprime { t: i64, m: u64 },
    #[error("zero has no squarefree decision")]
    Zero,
}

/// Canonical prime factorization of a positive integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub value: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// The set D(n) of prime divisors, ascending.
    pub fn primes(&self) -> Vec<u64> {
        self.factors.iter().map(|&(p, _)| p).collect()
    }

    /// Exponent of `p` in the value (0 when `p` does not divide it).
    pub fn exponent(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    /// Number of distinct prime divisors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    /// Prime-power components p^e, ascending in p.
    pub fn prime_powers(&self) -> Vec<u64> {
        self.factors.iter().map(|&(p, e)| p.pow(e)).collect()
    }
}

/// Trial-division factorization.
///
/// # Panics
/// Panics when `n == 0`.
pub fn factorize(n: u64) -> Factorization {
    assert!(n >= 1, "factorize requires a positive integer");
    let mut rest = n;
    let mut factors = Vec::new();
    let mut p = 2u64;
    while p * p <= rest {
        if rest % p == 0 {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Factorization { value: n, factors }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).factors == [(n, 1)]
}

/// D(n): prime divisors of `n`, ascending.
pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n).primes()
}

/// ν_p(x), the exponent of `p` in `x` (x ≠ 0).
pub fn nu(p: u64, mut x: u64) -> u32 {
    debug_assert!(x != 0);
    let mut e = 0;
    while x % p == 0 {
        x /= p;
        e += 1;
    }
    e
}

/// x(p): the p-free part of `x`.
pub fn p_free_part(x: u64, p: u64) -> u64 {
    let mut x = x;
    while x % p == 0 {
        x /= p;
    }
    x
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// Euler's totient.
pub fn phi(n: u64) -> u64 {
    factorize(n)
        .factors
        .iter()
        .fold(1, |acc, &(p, e)| acc * (p - 1) * p.pow(e - 1))
}

/// Möbius function.
pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.factors.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.omega() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// All positive divisors, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n).factors {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Reduce a signed integer into [0, m).
pub fn modulo(t: i64, m: u64) -> u64 {
    t.rem_euclid(m as i64) as u64
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

/// Inverse of `t` modulo `m`, if it exists.
pub fn inv_mod(t: i64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let e = (t.rem_euclid(m as i64)).extended_gcd(&(m as i64));
    (e.gcd == 1).then(|| e.x.rem_euclid(m as i64) as u64)
}

/// ord_m(t). Modulus 1 gives 1.
pub fn mult_ord(t: i64, m: u64) -> Result<u64, NumTheoryError> {
    assert!(m >= 1, "modulus must be positive");
    let r = modulo(t, m);
    if m == 1 {
        return Ok(1);
    }
    if gcd(r, m) != 1 {
        return Err(NumTheoryError::NotCoprime { t, m });
    }
    // The order divides the exponent of (Z/m)*, which divides phi(m).
    let mut ord = phi(m);
    for (p, _) in factorize(ord).factors {
        while ord % p == 0 && pow_mod(r, ord / p, m) == 1 {
            ord /= p;
        }
    }
    Ok(ord)
}

/// Multiplicative order, with the caller guaranteeing coprimality.
pub(crate) fn ord(t: i64, m: u64) -> u64 {
    mult_ord(t, m).expect("coprime arguments")
}

/// True iff every prime p | n has a power ≡ −1 modulo the p-free part of v.
pub fn is_self_conjugate(n: u64, v: u64) -> bool {
    prime_divisors(n).into_iter().all(|p| {
        let m = p_free_part(v, p);
        if m <= 2 {
            return true;
        }
        let o = ord(p as i64, m);
        o % 2 == 0 && pow_mod(p, o / 2, m) == m - 1
    })
}

/// ν_r(q^e − 1) for q coprime to r, computed without overflow.
fn nu_of_power_minus_one(r: u64, q: u64, e: u64) -> u32 {
    let mut k = 0u32;
    let mut modulus = r as u128;
    while modulus <= u64::MAX as u128 && pow_mod(q, e, modulus as u64) == 1 {
        k += 1;
        modulus *= r as u128;
    }
    k
}

/// μ_q of the field-descent definition.
fn mu(q: u64, v_primes: &[u64], v_odd: bool) -> u64 {
    if v_odd || q == 2 {
        v_primes.iter().filter(|&&p| p != q).product()
    } else {
        4 * v_primes
            .iter()
            .filter(|&&p| p != q && p != 2)
            .product::<u64>()
    }
}

/// The exponent b(r, v, n) of the field-descent definition.
pub fn descent_exponent(r: u64, v: u64, n: u64) -> u32 {
    let vp = prime_divisors(v);
    let np = prime_divisors(n);
    let v_odd = v % 2 == 1;
    if np == [r] {
        return if r == 2 { 2 } else { 1 };
    }
    np.iter()
        .filter(|&&q| q != r)
        .map(|&q| {
            let o = ord(q as i64, mu(q, &vp, v_odd));
            if r == 2 {
                nu(2, q * q - 1) + nu(2, o) - 1
            } else {
                nu_of_power_minus_one(r, q, r - 1) + nu(r, o)
            }
        })
        .max()
        .unwrap_or(0)
}

/// F(v, n) for v, n > 1.
pub fn f_value(v: u64, n: u64) -> u64 {
    assert!(v > 1 && n > 1, "F(v,n) needs v, n > 1");
    factorize(v)
        .factors
        .iter()
        .map(|&(p, e)| p.pow(e.min(descent_exponent(p, v, n))))
        .product()
}

/// Whether σ_t fixes every prime ideal above every prime divisor of n in Z[ζ_v].
pub fn fixes_prime_ideals(t: i64, n: u64, v: u64) -> Result<bool, NumTheoryError> {
    if gcd(modulo(t, v), v) != 1 {
        return Err(NumTheoryError::NotCoprime { t, m: v });
    }
    Ok(prime_divisors(n).into_iter().all(|q| {
        let m = p_free_part(v, q);
        if m == 1 {
            return true;
        }
        let target = modulo(t, m);
        let qm = q % m;
        let mut x = qm;
        loop {
            if x == target {
                return true;
            }
            if x == 1 {
                return false;
            }
            x = x * qm % m;
        }
    }))
}

/// Units t in [1, v) fixing all prime ideals of n, ascending.
pub fn eligible_multipliers(n: u64, v: u64) -> Vec<u64> {
    (1..v.max(2))
        .filter(|&t| gcd(t, v) == 1 && fixes_prime_ideals(t as i64, n, v).unwrap_or(false))
        .collect()
}

pub fn is_squarefree(n: i64) -> Result<bool, NumTheoryError> {
    if n == 0 {
        return Err(NumTheoryError::Zero);
    }
    Ok(factorize(n.unsigned_abs())
        .factors
        .iter()
        .all(|&(_, e)| e == 1))
}

/// Integer square root when `n` is a perfect square.
pub fn exact_sqrt(n: u64) -> Option<u64> {
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Ramanujan sum c_w(j) = Tr_{Q(ζ_w)/Q}(ζ_w^j).
pub fn ramanujan_sum(w: u64, j: i64) -> i64 {
    let g = gcd(modulo(j, w), w);
    let g = if g == 0 { w } else { g };
    let q = w / g;
    mobius(q) * (phi(w) / phi(q)) as i64
}
