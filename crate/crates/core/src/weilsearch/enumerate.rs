//! Complete enumeration of X ∈ Z[ζ_v] with X·conj(X) = n up to equivalence.
//!
//! Pipeline: Turyn divisibility strips the self-conjugate part of n, field
//! descent shrinks the conductor, then either a direct short-vector search
//! on the trace form or a search over a relative quadratic decomposition
//! X = A + Bθ with A, B in a subfield of index 2.

use std::collections::HashSet;

use num_complex::Complex64;

use crate::cyclotomic::{basis, root_table, units, CycInt};
use crate::exec::Exec;
use crate::lattice::Lattice;
use crate::numtheory::{exact_sqrt, f_value, factorize, is_self_conjugate, nu, phi};

use super::{SolutionSet, WeilClass, WeilError};

/// Limits for the enumeration backend.
#[derive(Debug, Clone, Copy)]
pub struct WeilOptions {
    /// Largest φ(v) accepted.
    pub phi_cap: u64,
    /// Largest estimated number of lattice points a single search may visit.
    pub max_points: f64,
    pub exec: Exec,
}

impl Default for WeilOptions {
    fn default() -> Self {
        WeilOptions {
            phi_cap: 32,
            max_points: 2e9,
            exec: Exec::default(),
        }
    }
}

/// The Turyn factor: ∏ q^{⌊ν_q(n)/2⌋} over primes q | n self-conjugate mod v.
pub fn turyn_factor(v: u64, n: u64) -> u64 {
    factorize(n)
        .factors
        .iter()
        .filter(|&&(q, _)| is_self_conjugate(q, v))
        .map(|&(q, e)| q.pow(e / 2))
        .product()
}

/// Natural log of the discriminant of Q(ζ_u).
fn ln_disc(u: u64) -> f64 {
    let d = phi(u) as f64;
    let mut s = d * (u as f64).ln();
    for (p, _) in factorize(u).factors {
        s -= d / (p as f64 - 1.0) * (p as f64).ln();
    }
    s
}

fn ln_gamma_half(twice: u64) -> f64 {
    // ln Γ(twice / 2)
    let mut x = if twice % 2 == 0 { 1.0f64 } else { 0.5f64 };
    let mut acc = if twice % 2 == 0 {
        0.0
    } else {
        std::f64::consts::PI.sqrt().ln()
    };
    while 2.0 * x < twice as f64 {
        acc += x.ln();
        x += 1.0;
    }
    acc
}

/// Estimated number of lattice points of Z[ζ_u] with trace form ≤ r.
pub fn estimate_points(u: u64, r: f64) -> f64 {
    let d = phi(u);
    let ln_vol = d as f64 / 2.0 * std::f64::consts::PI.ln() - ln_gamma_half(d + 2);
    (ln_vol + d as f64 / 2.0 * r.ln() - ln_disc(u) / 2.0).exp()
}

fn reduce_conductor(u: u64) -> u64 {
    if u % 4 == 2 {
        u / 2
    } else {
        u
    }
}

/// A relative quadratic decomposition Z[ζ_f] = Z[ζ_sub] ⊕ Z[ζ_sub]·ζ_f^theta.
#[derive(Debug, Clone, Copy)]
struct Split {
    f: u64,
    sub: u64,
    theta: u64,
}

impl Split {
    /// Squared distance |θ1 − θ2|² between the two lifts of an embedding.
    fn gap_sq(&self) -> f64 {
        if self.f % 4 == 0 && self.sub * 2 == self.f {
            4.0
        } else {
            3.0
        }
    }

    fn a_bound(&self, m: u64) -> f64 {
        4.0 * m as f64 / self.gap_sq()
    }

    fn estimate(&self, m: u64) -> f64 {
        let d = phi(self.sub) as f64;
        estimate_points(self.sub, self.a_bound(m) * d) / 2.0
    }
}

fn splits(f: u64) -> Vec<Split> {
    let mut out = Vec::new();
    if f % 4 == 0 && f / 2 > 2 {
        out.push(Split {
            f,
            sub: f / 2,
            theta: 1,
        });
    }
    if f % 3 == 0 && f % 9 != 0 && f / 3 > 2 {
        out.push(Split {
            f,
            sub: f / 3,
            theta: f / 3,
        });
    }
    out
}

/// Class representatives (not necessarily canonical) of all solutions in
/// Z[ζ_u], complete up to equivalence in Z[ζ_u].
pub(crate) fn class_reps(u: u64, n: u64, opts: &WeilOptions) -> Result<Vec<CycInt>, WeilError> {
    let u = reduce_conductor(u);
    let t = turyn_factor(u, n);
    let m = n / (t * t);
    let scale =
        |xs: Vec<CycInt>| -> Vec<CycInt> { xs.into_iter().map(|x| x.scale(t as i64)).collect() };
    if m == 1 {
        return Ok(vec![CycInt::from_int(u, t as i64)]);
    }
    if u == 1 {
        return Ok(
            exact_sqrt(m).map_or_else(Vec::new, |r| vec![CycInt::from_int(1, (r * t) as i64)])
        );
    }
    let f = reduce_conductor(f_value(u, m));
    if f < u {
        let reps = class_reps(f, m, opts)?;
        return Ok(scale(
            reps.into_iter()
                .map(|x| x.lift(u).expect("f divides u"))
                .collect(),
        ));
    }
    let direct = estimate_points(u, (m * phi(u)) as f64) / 2.0;
    let best = splits(u)
        .into_iter()
        .map(|s| (s.estimate(m), s))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    let solutions = match best {
        Some((est, split)) if est < direct => {
            if est > opts.max_points {
                return Err(WeilError::SearchTooLarge {
                    v: u,
                    n: m,
                    estimate: est,
                });
            }
            relative_search(split, m, opts)?
        }
        _ => {
            if direct > opts.max_points {
                return Err(WeilError::SearchTooLarge {
                    v: u,
                    n: m,
                    estimate: direct,
                });
            }
            direct_search(u, m, opts.exec)
        }
    };
    Ok(scale(dedupe(solutions)))
}

/// Reduce a list of solutions to one element per equivalence class.
fn dedupe(mut xs: Vec<CycInt>) -> Vec<CycInt> {
    xs.sort();
    xs.dedup();
    let mut seen: HashSet<CycInt> = HashSet::new();
    let mut reps = Vec::new();
    for x in xs {
        if seen.contains(&x) {
            continue;
        }
        let orbit = x.orbit();
        reps.push(orbit[0].clone());
        seen.extend(orbit);
    }
    reps
}

/// All solutions up to sign via short vectors of the trace form.
fn direct_search(u: u64, m: u64, exec: Exec) -> Vec<CycInt> {
    let b = basis(u);
    let lat = Lattice::new(&b.trace_gram());
    let target = (m * phi(u)) as i64;
    lat.enumerate(target as f64, true, exec, |x| {
        if lat.norm(x) != target {
            return None;
        }
        let y = CycInt::from_basis_coeffs(u, lat.to_original(x)).expect("dimension");
        (y.abs_sq().as_integer() == Some(m as i64)).then_some(y)
    })
}

/// Embedding values ζ_sub^{s·e_j} of the basis of Z[ζ_sub] at `reps`.
fn basis_embeddings(sub: u64, reps: &[u64]) -> Vec<Vec<Complex64>> {
    let b = basis(sub);
    let table = root_table(sub);
    reps.iter()
        .map(|&s| {
            (0..b.dim())
                .map(|j| table[(b.exponent(j) * s % sub) as usize])
                .collect()
        })
        .collect()
}

fn invert(mut a: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for j in 0..n {
                        a[r][j] -= f * a[col][j];
                        inv[r][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Solutions X = A + Bθ with A ≠ 0 up to sign, plus lifts of the A = 0 classes.
fn relative_search(split: Split, m: u64, opts: &WeilOptions) -> Result<Vec<CycInt>, WeilError> {
    let Split { f, sub, theta } = split;
    let d = phi(sub) as usize;
    let reps: Vec<u64> = units(sub).into_iter().filter(|&s| 2 * s < sub).collect();
    debug_assert_eq!(reps.len() * 2, d);
    let emb = basis_embeddings(sub, &reps);
    // The two lifts of each representative embedding, as values of θ.
    let froot = root_table(f);
    let thetas: Vec<(Complex64, Complex64)> = reps
        .iter()
        .map(|&s| {
            let lifts: Vec<u64> = units(f).into_iter().filter(|t| t % sub == s).collect();
            debug_assert_eq!(lifts.len(), 2);
            (
                froot[(lifts[0] * theta % f) as usize],
                froot[(lifts[1] * theta % f) as usize],
            )
        })
        .collect();
    // Real coordinate map for B.
    let mut real = vec![vec![0.0; d]; d];
    for (k, row) in emb.iter().enumerate() {
        for j in 0..d {
            real[2 * k][j] = row[j].re;
            real[2 * k + 1][j] = row[j].im;
        }
    }
    let real_inv = invert(real).expect("embedding matrix is invertible");
    let b = basis(sub);
    let lat = Lattice::new(&b.trace_gram());
    let red_emb: Vec<Vec<Complex64>> = emb
        .iter()
        .map(|row| {
            lat.reduced_basis()
                .iter()
                .map(|v| v.iter().zip(row).map(|(&c, z)| z * c as f64).sum())
                .collect()
        })
        .collect();
    let a_bound = split.a_bound(m);
    let mf = m as f64;
    let zeta_theta = CycInt::root(f, theta as i64);
    let found = lat.enumerate(a_bound * d as f64, true, opts.exec, |x| {
        let vals: Vec<Complex64> = red_emb
            .iter()
            .map(|row| {
                x.iter()
                    .zip(row)
                    .filter(|(&c, _)| c != 0)
                    .map(|(&c, z)| z * c as f64)
                    .sum()
            })
            .collect();
        if vals.iter().any(|z| z.norm_sqr() > a_bound + 1e-7) {
            return None;
        }
        // Candidate values of σ(B) at each representative embedding.
        let mut choices: Vec<[Complex64; 2]> = Vec::with_capacity(vals.len());
        for (a, &(t1, t2)) in vals.iter().zip(&thetas) {
            let c1 = -a * t1.conj();
            let c2 = -a * t2.conj();
            let mid = (c1 + c2) / 2.0;
            let gap = (c1 - c2).norm();
            let h2 = mf - gap * gap / 4.0;
            if h2 < -1e-7 {
                return None;
            }
            let dir = (c2 - c1) * Complex64::i() / gap;
            let h = h2.max(0.0).sqrt();
            choices.push([mid + dir * h, mid - dir * h]);
        }
        let a_coeffs = lat.to_original(x);
        let a_elem = CycInt::from_basis_coeffs(sub, a_coeffs)
            .expect("dimension")
            .lift(f)
            .expect("divides");
        let k = choices.len();
        let mut out = Vec::new();
        for mask in 0..(1u32 << k) {
            let mut zr = vec![0.0; d];
            for (i, ch) in choices.iter().enumerate() {
                let z = ch[((mask >> i) & 1) as usize];
                zr[2 * i] = z.re;
                zr[2 * i + 1] = z.im;
            }
            let mut coeffs = Vec::with_capacity(d);
            let mut ok = true;
            for row in &real_inv {
                let val: f64 = row.iter().zip(&zr).map(|(a, b)| a * b).sum();
                let r = val.round();
                if (val - r).abs() > 1e-5 {
                    ok = false;
                    break;
                }
                coeffs.push(r as i64);
            }
            if !ok {
                continue;
            }
            let b_elem = CycInt::from_basis_coeffs(sub, coeffs)
                .expect("dimension")
                .lift(f)
                .expect("divides");
            let xv = &a_elem + &(&b_elem * &zeta_theta);
            if xv.abs_sq().as_integer() == Some(m as i64) {
                out.push(xv);
            }
        }
        Some(out)
    });
    let mut all: Vec<CycInt> = found.into_iter().flatten().collect();
    for y in class_reps(sub, m, opts)? {
        all.push(y.lift(f).expect("divides"));
    }
    Ok(all)
}

/// Complete class list of solutions to X·conj(X) = n in Z[ζ_v].
pub fn weil_enumerate_with(v: u64, n: u64, opts: &WeilOptions) -> Result<SolutionSet, WeilError> {
    assert!(v >= 1 && n >= 1, "conductor and norm must be positive");
    let ph = phi(v);
    if ph > opts.phi_cap {
        return Err(WeilError::DimensionTooLarge {
            v,
            phi: ph,
            cap: opts.phi_cap,
        });
    }
    let reps = class_reps(v, n, opts)?;
    let mut canon: Vec<CycInt> = reps
        .into_iter()
        .map(|x| x.lift(v).expect("reduced conductor divides v").canonical())
        .collect();
    canon.sort();
    canon.dedup();
    let classes = canon
        .into_iter()
        .map(|x| {
            debug_assert_eq!(x.abs_sq().as_integer(), Some(n as i64));
            WeilClass::new(x, n)
        })
        .collect();
    Ok(SolutionSet {
        v,
        n,
        complete: true,
        classes,
    })
}

pub fn weil_enumerate(v: u64, n: u64) -> Result<SolutionSet, WeilError> {
    weil_enumerate_with(v, n, &WeilOptions::default())
}

/// The largest power of `q` dividing every class representative.
pub fn class_divisibility(x: &CycInt, q: u64) -> u32 {
    let g = x
        .coeffs()
        .iter()
        .filter(|&&c| c != 0)
        .fold(0u64, |acc, &c| crate::numtheory::gcd(acc, c.unsigned_abs()));
    if g == 0 {
        u32::MAX
    } else {
        nu(q, g)
    }
}
