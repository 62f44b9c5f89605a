//! Exact arithmetic in Z[ζ_u] over the tensor integral basis.
//!
//! For u = ∏ q_i^{a_i} the basis is the product over i of ζ_{m_i}^{y_i},
//! m_i = q_i^{a_i}, 0 ≤ y_i < φ(m_i), with ζ_{m_i} = ζ_u^{u/m_i}. Basis
//! indices are mixed-radix in ascending prime order, last prime fastest.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::numtheory::{factorize, gcd, inv_mod, modulo, ramanujan_sum};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycError {
    #[error("conductor mismatch: {0} vs {1}")]
    ConductorMismatch(u64, u64),
    #[error("expected {expected} coefficients, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{t} is not a unit modulo {u}")]
    NotCoprime { t: i64, u: u64 },
    #[error("cannot lift from conductor {from} to {to}")]
    NotDivisor { from: u64, to: u64 },
    #[error("conductor must be positive")]
    ZeroConductor,
}

#[derive(Debug, Clone)]
struct Component {
    m: u64,
    q: u64,
    qa1: u64,
    phi_m: u64,
    /// Inverse of u/m modulo m.
    cofactor_inv: u64,
}

/// Integral basis tables for one conductor.
#[derive(Debug)]
pub struct Basis {
    u: u64,
    comps: Vec<Component>,
    exps: Vec<u64>,
    reduce: Vec<Vec<(u32, i8)>>,
}

impl Basis {
    fn build(u: u64) -> Basis {
        let comps: Vec<Component> = factorize(u)
            .factors
            .iter()
            .map(|&(q, a)| {
                let m = q.pow(a);
                Component {
                    m,
                    q,
                    qa1: m / q,
                    phi_m: m - m / q,
                    cofactor_inv: inv_mod((u / m) as i64, m).expect("coprime cofactor"),
                }
            })
            .collect();
        let dim: u64 = comps.iter().map(|c| c.phi_m).product();
        let mut exps = Vec::with_capacity(dim as usize);
        for idx in 0..dim {
            let mut rest = idx;
            let mut e = 0u64;
            for c in comps.iter().rev() {
                let y = rest % c.phi_m;
                rest /= c.phi_m;
                e = (e + y * (u / c.m)) % u;
            }
            exps.push(e);
        }
        let mut reduce = Vec::with_capacity(u as usize);
        for j in 0..u {
            let mut terms: Vec<(u64, i8)> = vec![(0, 1)];
            for c in &comps {
                let x = j % c.m * c.cofactor_inv % c.m;
                let local: Vec<(u64, i8)> = if x < c.phi_m {
                    vec![(x, 1)]
                } else {
                    let l = x - c.phi_m;
                    (0..c.q - 1).map(|k| (k * c.qa1 + l, -1)).collect()
                };
                terms = terms
                    .iter()
                    .flat_map(|&(idx, s)| {
                        local.iter().map(move |&(y, t)| (idx * c.phi_m + y, s * t))
                    })
                    .collect();
            }
            reduce.push(terms.into_iter().map(|(i, s)| (i as u32, s)).collect());
        }
        Basis {
            u,
            comps,
            exps,
            reduce,
        }
    }

    pub fn conductor(&self) -> u64 {
        self.u
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    /// Exponent j with basis element i equal to ζ_u^j.
    pub fn exponent(&self, i: usize) -> u64 {
        self.exps[i]
    }

    /// Prime powers of the tensor decomposition, ascending.
    pub fn prime_powers(&self) -> Vec<u64> {
        self.comps.iter().map(|c| c.m).collect()
    }

    /// Basis expansion of ζ_u^j.
    pub fn expand(&self, j: u64) -> &[(u32, i8)] {
        &self.reduce[(j % self.u) as usize]
    }

    fn reduce_into(&self, power: &[i64], out: &mut [i64]) {
        for (j, &b) in power.iter().enumerate() {
            if b != 0 {
                for &(i, s) in &self.reduce[j] {
                    out[i as usize] += b * s as i64;
                }
            }
        }
    }

    /// Gram matrix of the trace form Tr(x·conj(y)) on the basis.
    pub fn trace_gram(&self) -> Vec<Vec<i64>> {
        let n = self.dim();
        let u = self.u;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| ramanujan_sum(u, self.exps[i] as i64 - self.exps[j] as i64))
                    .collect()
            })
            .collect()
    }
}

/// Shared basis tables for conductor `u`.
pub fn basis(u: u64) -> Arc<Basis> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<Basis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(b) = cache.read().expect("basis cache").get(&u) {
        return b.clone();
    }
    let built = Arc::new(Basis::build(u));
    cache
        .write()
        .expect("basis cache")
        .entry(u)
        .or_insert(built)
        .clone()
}

/// Units modulo u in ascending order; conductor 1 yields [1].
pub fn units(u: u64) -> Vec<u64> {
    if u <= 2 {
        return vec![1];
    }
    (1..u).filter(|&t| gcd(t, u) == 1).collect()
}

/// Roots of unity in Q(ζ_u) as (sign, exponent) pairs.
pub fn roots_of_unity(u: u64) -> Vec<(i64, u64)> {
    if u % 2 == 0 {
        (0..u).map(|j| (1, j)).collect()
    } else {
        (0..u).flat_map(|j| [(1, j), (-1, j)]).collect()
    }
}

/// An element of Z[ζ_u] in integral-basis coordinates.
#[derive(Clone)]
pub struct CycInt {
    basis: Arc<Basis>,
    coeffs: Vec<i64>,
}

impl CycInt {
    pub fn zero(u: u64) -> CycInt {
        let basis = basis(u);
        let coeffs = vec![0; basis.dim()];
        CycInt { basis, coeffs }
    }

    pub fn from_int(u: u64, n: i64) -> CycInt {
        let mut x = CycInt::zero(u);
        x.coeffs[0] = n;
        x
    }

    pub fn one(u: u64) -> CycInt {
        CycInt::from_int(u, 1)
    }

    /// ζ_u^j.
    pub fn root(u: u64, j: i64) -> CycInt {
        let mut x = CycInt::zero(u);
        let j = modulo(j, u);
        for &(i, s) in x.basis.clone().expand(j) {
            x.coeffs[i as usize] += s as i64;
        }
        x
    }

    pub fn from_power_coeffs(u: u64, b: &[i64]) -> Result<CycInt, CycError> {
        if u == 0 {
            return Err(CycError::ZeroConductor);
        }
        if b.len() as u64 != u {
            return Err(CycError::LengthMismatch {
                expected: u as usize,
                got: b.len(),
            });
        }
        let mut x = CycInt::zero(u);
        x.basis.clone().reduce_into(b, &mut x.coeffs);
        Ok(x)
    }

    /// Σ b_j ζ_u^j from sparse (exponent, coefficient) terms.
    pub fn from_terms(u: u64, terms: &[(i64, i64)]) -> CycInt {
        let mut power = vec![0i64; u as usize];
        for &(j, c) in terms {
            power[modulo(j, u) as usize] += c;
        }
        CycInt::from_power_coeffs(u, &power).expect("length matches")
    }

    pub fn from_basis_coeffs(u: u64, c: Vec<i64>) -> Result<CycInt, CycError> {
        if u == 0 {
            return Err(CycError::ZeroConductor);
        }
        let basis = basis(u);
        if c.len() != basis.dim() {
            return Err(CycError::LengthMismatch {
                expected: basis.dim(),
                got: c.len(),
            });
        }
        Ok(CycInt { basis, coeffs: c })
    }

    pub fn conductor(&self) -> u64 {
        self.basis.u
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// A length-u power representation (basis element i at its exponent).
    pub fn to_power_coeffs(&self) -> Vec<i64> {
        let mut out = vec![0i64; self.basis.u as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[self.basis.exps[i] as usize] += c;
        }
        out
    }

    fn same(&self, other: &CycInt) -> Result<(), CycError> {
        if self.basis.u == other.basis.u {
            Ok(())
        } else {
            Err(CycError::ConductorMismatch(self.basis.u, other.basis.u))
        }
    }

    pub fn try_add(&self, other: &CycInt) -> Result<CycInt, CycError> {
        self.same(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CycInt {
            basis: self.basis.clone(),
            coeffs,
        })
    }

    pub fn try_sub(&self, other: &CycInt) -> Result<CycInt, CycError> {
        self.same(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(CycInt {
            basis: self.basis.clone(),
            coeffs,
        })
    }

    pub fn try_mul(&self, other: &CycInt) -> Result<CycInt, CycError> {
        self.same(other)?;
        let u = self.basis.u;
        let mut power = vec![0i64; u as usize];
        let rhs: Vec<(u64, i64)> = other
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(j, &c)| (other.basis.exps[j], c))
            .collect();
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let ei = self.basis.exps[i];
            for &(ej, b) in &rhs {
                power[((ei + ej) % u) as usize] += a * b;
            }
        }
        let mut out = CycInt::zero(u);
        self.basis.reduce_into(&power, &mut out.coeffs);
        Ok(out)
    }

    pub fn scale(&self, k: i64) -> CycInt {
        CycInt {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// ζ_u^j · x.
    pub fn mul_root(&self, j: i64) -> CycInt {
        let u = self.basis.u;
        let shift = modulo(j, u);
        self.permute_exponents(|e| (e + shift) % u)
    }

    fn permute_exponents(&self, f: impl Fn(u64) -> u64) -> CycInt {
        let mut out = CycInt::zero(self.basis.u);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                for &(k, s) in self.basis.expand(f(self.basis.exps[i])) {
                    out.coeffs[k as usize] += c * s as i64;
                }
            }
        }
        out
    }

    /// Image under σ_t: ζ_u ↦ ζ_u^t.
    pub fn galois(&self, t: i64) -> Result<CycInt, CycError> {
        let u = self.basis.u;
        let tm = modulo(t, u);
        if gcd(tm, u) != 1 && u > 1 {
            return Err(CycError::NotCoprime { t, u });
        }
        Ok(self.permute_exponents(|e| e * tm % u))
    }

    pub fn conj(&self) -> CycInt {
        self.galois(-1).expect("-1 is a unit")
    }

    pub fn abs_sq(&self) -> CycInt {
        self.try_mul(&self.conj()).expect("same conductor")
    }

    /// The rational integer value, when x lies in Z.
    pub fn as_integer(&self) -> Option<i64> {
        self.coeffs[1..]
            .iter()
            .all(|&c| c == 0)
            .then(|| self.coeffs[0])
    }

    pub fn divisible_by_integer(&self, m: i64) -> Option<CycInt> {
        assert!(m >= 1, "divisor must be positive");
        self.coeffs.iter().all(|c| c % m == 0).then(|| CycInt {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|c| c / m).collect(),
        })
    }

    /// Embed into Z[ζ_w] for u | w.
    pub fn lift(&self, w: u64) -> Result<CycInt, CycError> {
        let u = self.basis.u;
        if w == 0 || w % u != 0 {
            return Err(CycError::NotDivisor { from: u, to: w });
        }
        let r = w / u;
        let mut power = vec![0i64; w as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            power[(self.basis.exps[i] * r) as usize] += c;
        }
        CycInt::from_power_coeffs(w, &power)
    }

    /// The element of Z[ζ_w] lifting to x, for w | u, when x lies in that subring.
    pub fn descend(&self, w: u64) -> Result<Option<CycInt>, CycError> {
        let u = self.basis.u;
        if w == 0 || u % w != 0 {
            return Err(CycError::NotDivisor { from: w, to: u });
        }
        let target = basis(w);
        let r = u / w;
        // Each basis element of Z[ζ_w] lifts to a single basis element of Z[ζ_u].
        let mut hit = vec![None; self.coeffs.len()];
        for i in 0..target.dim() {
            match self.basis.expand(target.exps[i] * r) {
                [(k, 1)] => hit[*k as usize] = Some(i),
                _ => unreachable!("tensor basis lifts monomially"),
            }
        }
        let mut out = CycInt::zero(w);
        for (k, &c) in self.coeffs.iter().enumerate() {
            match hit[k] {
                Some(i) => out.coeffs[i] = c,
                None if c != 0 => return Ok(None),
                None => {}
            }
        }
        Ok(Some(out))
    }

    /// Exact trace down to Q.
    pub fn trace(&self) -> i64 {
        let u = self.basis.u;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| c * ramanujan_sum(u, self.basis.exps[i] as i64))
            .sum()
    }

    /// Σ over all embeddings of |σ(x)|², exactly.
    pub fn t2(&self) -> i64 {
        self.abs_sq().trace()
    }

    pub fn coeff_bound_check(&self, bound: i64) -> bool {
        self.coeffs.iter().all(|c| c.abs() <= bound)
    }

    pub fn max_abs_coeff(&self) -> i64 {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    /// Values under σ_t for t in `units(u)` ascending.
    pub fn embeddings(&self, precision: u32) -> Embeddings {
        assert!(precision >= 53, "precision below double precision");
        let u = self.basis.u;
        let nnz: Vec<(u64, i64)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (self.basis.exps[i], c))
            .collect();
        let table = root_table(u);
        let values = units(u)
            .into_iter()
            .map(|t| {
                nnz.iter()
                    .map(|&(e, c)| table[(e * t % u) as usize] * c as f64)
                    .sum::<Complex64>()
            })
            .collect();
        let l1: f64 = nnz.iter().map(|&(_, c)| c.abs() as f64).sum();
        let error_bound = l1 * (nnz.len() as f64 + 4.0) * f64::EPSILON;
        Embeddings {
            values,
            error_bound,
            precision: 53,
        }
    }

    /// Every η·σ_t(x) with η a root of unity of Q(ζ_u).
    pub fn orbit(&self) -> Vec<CycInt> {
        let u = self.basis.u;
        let mut out: Vec<CycInt> = Vec::new();
        for t in units(u) {
            let y = self.galois(t as i64).expect("unit");
            for (s, j) in roots_of_unity(u) {
                out.push(y.mul_root(j as i64).scale(s));
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Lexicographically least coefficient vector in the orbit.
    pub fn canonical(&self) -> CycInt {
        self.orbit().into_iter().next().expect("orbit contains x")
    }

    pub fn is_equivalent(&self, other: &CycInt) -> bool {
        self.conductor() == other.conductor() && self.canonical() == other.canonical()
    }
}

/// Complex values of ζ_u^j for j in [0, u).
pub fn root_table(u: u64) -> Vec<Complex64> {
    (0..u)
        .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / u as f64))
        .collect()
}

/// Numeric embeddings with an absolute error bound per value.
#[derive(Debug, Clone)]
pub struct Embeddings {
    pub values: Vec<Complex64>,
    pub error_bound: f64,
    /// Working precision actually used, in bits.
    pub precision: u32,
}

impl PartialEq for CycInt {
    fn eq(&self, other: &Self) -> bool {
        self.basis.u == other.basis.u && self.coeffs == other.coeffs
    }
}

impl Eq for CycInt {}

impl Hash for CycInt {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.basis.u.hash(state);
        self.coeffs.hash(state);
    }
}

impl PartialOrd for CycInt {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CycInt {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.basis.u, &self.coeffs).cmp(&(other.basis.u, &other.coeffs))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&CycInt> for &CycInt {
            type Output = CycInt;
            /// # Panics
            /// Panics on a conductor mismatch; use the `try_` form to recover.
            fn $m(self, rhs: &CycInt) -> CycInt {
                self.$f(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl std::ops::$tr<CycInt> for CycInt {
            type Output = CycInt;
            fn $m(self, rhs: CycInt) -> CycInt {
                (&self).$m(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl std::ops::Neg for &CycInt {
    type Output = CycInt;
    fn neg(self) -> CycInt {
        self.scale(-1)
    }
}

impl std::ops::Neg for CycInt {
    type Output = CycInt;
    fn neg(self) -> CycInt {
        self.scale(-1)
    }
}

impl fmt::Debug for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycInt({}; {:?})", self.basis.u, self.coeffs)
    }
}

impl fmt::Display for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let u = self.basis.u;
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let e = self.basis.exps[i];
            let sign = if c < 0 {
                "-"
            } else if first {
                ""
            } else {
                "+"
            };
            if !first {
                write!(f, " ")?;
            }
            let mag = c.abs();
            match (e, mag) {
                (0, _) => write!(f, "{sign}{mag}")?,
                (_, 1) => write!(f, "{sign}z{u}^{e}")?,
                _ => write!(f, "{sign}{mag}*z{u}^{e}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct CycIntJson {
    u: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    basis_coeffs: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    power_coeffs: Option<Vec<i64>>,
}

impl Serialize for CycInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CycIntJson {
            u: self.basis.u,
            basis_coeffs: Some(self.coeffs.clone()),
            power_coeffs: None,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = CycIntJson::deserialize(d)?;
        match (j.basis_coeffs, j.power_coeffs) {
            (Some(c), None) => CycInt::from_basis_coeffs(j.u, c).map_err(D::Error::custom),
            (None, Some(b)) => CycInt::from_power_coeffs(j.u, &b).map_err(D::Error::custom),
            _ => Err(D::Error::custom(
                "exactly one of basis_coeffs or power_coeffs is required",
            )),
        }
    }
}
