//! Cyclotomic solutions of X·conj(X) = n, the rules built on them, and small
//! multiplier-constrained searches for weighing matrices.

mod cache;
mod enumerate;
mod idempotent;
mod rules;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cyclotomic::CycInt;

pub use cache::SolutionCache;
pub use enumerate::{
    class_divisibility, estimate_points, turyn_factor, weil_enumerate, weil_enumerate_with,
    WeilOptions,
};
pub use idempotent::{
    integrality_search, integrality_search_limited, reconstruct, split_primes, IdempotentOutcome,
};
pub(crate) use rules::recheck as recheck_rule;
pub use rules::{
    classify_icw2_77_100, find_witness, icw2_77_100_reference, idempotent_integrality_search,
    is_proper, orbit_search, rule_idempotent, verify_weighing, weil_divisibility_rule, WeilPolicy,
};

#[derive(Debug, Error)]
pub enum WeilError {
    #[error("phi({v}) = {phi} exceeds the enumeration cap {cap}; import a class list instead")]
    DimensionTooLarge { v: u64, phi: u64, cap: u64 },
    #[error("search for X*conj(X) = {n} in Z[zeta_{v}] would visit about {estimate:.3e} points")]
    SearchTooLarge { v: u64, n: u64, estimate: f64 },
    #[error("no class list available for conductor {v}, n = {n}")]
    Incomplete { v: u64, n: u64 },
    #[error("invalid class list: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One equivalence class of solutions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeilClass {
    pub representative: CycInt,
    pub n: u64,
    /// Number of elements η·X^σ in the class.
    pub orbit_size: usize,
}

impl WeilClass {
    /// Build from a canonical representative.
    pub fn new(representative: CycInt, n: u64) -> WeilClass {
        let orbit_size = representative.orbit().len();
        WeilClass {
            representative,
            n,
            orbit_size,
        }
    }
}

/// Class list for one (v, n). `complete` is false for imported lists whose
/// completeness was not established here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSet {
    pub v: u64,
    pub n: u64,
    pub complete: bool,
    pub classes: Vec<WeilClass>,
}

#[derive(Serialize, Deserialize)]
struct SolutionSetJson {
    v: u64,
    n: u64,
    complete: bool,
    classes: Vec<CycInt>,
}

impl SolutionSet {
    pub fn representatives(&self) -> impl Iterator<Item = &CycInt> {
        self.classes.iter().map(|c| &c.representative)
    }

    /// Whether some class contains `x`.
    pub fn contains_equivalent(&self, x: &CycInt) -> bool {
        let canon = x.canonical();
        self.classes.iter().any(|c| c.representative == canon)
    }

    pub fn to_json(&self) -> String {
        let j = SolutionSetJson {
            v: self.v,
            n: self.n,
            complete: self.complete,
            classes: self
                .classes
                .iter()
                .map(|c| c.representative.clone())
                .collect(),
        };
        serde_json::to_string_pretty(&j).expect("serializable")
    }

    /// Parse a class list. Every representative is checked to have conductor v
    /// and norm n. Representatives are canonicalized when φ(v) ≤ `canon_cap`;
    /// otherwise they are kept as given with an unknown (zero) orbit size.
    pub fn from_json(text: &str, canon_cap: u64) -> Result<SolutionSet, WeilError> {
        let j: SolutionSetJson = serde_json::from_str(text)?;
        let mut classes = Vec::with_capacity(j.classes.len());
        for x in j.classes {
            if x.conductor() != j.v {
                return Err(WeilError::Invalid(format!(
                    "class has conductor {}, expected {}",
                    x.conductor(),
                    j.v
                )));
            }
            if x.abs_sq().as_integer() != Some(j.n as i64) {
                return Err(WeilError::Invalid(format!(
                    "class {x} does not have norm {}",
                    j.n
                )));
            }
            if crate::numtheory::phi(j.v) <= canon_cap {
                classes.push(WeilClass::new(x.canonical(), j.n));
            } else {
                classes.push(WeilClass {
                    representative: x,
                    n: j.n,
                    orbit_size: 0,
                });
            }
        }
        classes.sort_by(|a, b| a.representative.cmp(&b.representative));
        classes.dedup_by(|a, b| a.representative == b.representative);
        Ok(SolutionSet {
            v: j.v,
            n: j.n,
            complete: j.complete,
            classes,
        })
    }
}
