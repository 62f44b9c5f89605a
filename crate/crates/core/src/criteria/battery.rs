use crate::weilsearch::{rule_idempotent, weil_divisibility_rule, SolutionCache};

pub use crate::weilsearch::WeilPolicy;

use super::{
    reduction::rule_orbit_cell, rule_cor415, rule_cor46, rule_fbound, rule_icw_reduction,
    rule_thm410, rule_thm412, rule_thm45, rule_thm48, CellQuery, Certificate, Rule,
};

#[derive(Debug, Clone, Default)]
pub struct BatteryOptions {
    /// Run every rule instead of stopping at the first that fires.
    pub exhaustive: bool,
    /// Class-list rules, when enabled.
    pub weil: Option<WeilPolicy>,
    /// Restrict to these rules; `None` runs all of them.
    pub rules: Option<Vec<Rule>>,
}

impl BatteryOptions {
    fn enabled(&self, r: Rule) -> bool {
        self.rules.as_ref().is_none_or(|rs| rs.contains(&r))
    }
}

type RuleFn = fn(&CellQuery) -> Certificate;

/// Rules in order of increasing cost.
const CHEAP: [(Rule, RuleFn); 9] = [
    (Rule::Fbound, rule_fbound),
    (Rule::Thm45, rule_thm45),
    (Rule::Cor46, rule_cor46),
    (Rule::Thm48, rule_thm48),
    (Rule::Thm410, rule_thm410),
    (Rule::Thm412, rule_thm412),
    (Rule::Cor415, rule_cor415),
    (Rule::IcwReduction, rule_icw_reduction),
    (Rule::OrbitDiophantine, rule_orbit_cell),
];

/// Evaluate the rules on one query. The result lists every certificate
/// computed, in order; unless `exhaustive`, evaluation stops at the first
/// NONEXISTENT.
pub fn run_battery(
    q: &CellQuery,
    opts: &BatteryOptions,
    cache: &SolutionCache,
) -> Vec<Certificate> {
    let mut out = Vec::new();
    let done = |out: &Vec<Certificate>| {
        !opts.exhaustive && out.last().is_some_and(Certificate::is_nonexistent)
    };
    for (name, rule) in CHEAP {
        if !opts.enabled(name) {
            continue;
        }
        out.push(rule(q));
        if done(&out) {
            return out;
        }
    }
    let Some(policy) = opts.weil else { return out };
    if opts.enabled(Rule::Idempotent) {
        out.push(rule_idempotent(q, cache, &policy));
        if done(&out) {
            return out;
        }
    }
    if let Some(k) = q.k().filter(|_| opts.enabled(Rule::WeilDivisibility)) {
        for p in crate::numtheory::prime_divisors(k) {
            out.push(weil_divisibility_rule(q, p, cache, &policy));
            if done(&out) {
                return out;
            }
        }
    }
    out
}

pub(crate) fn recheck_weil(c: &Certificate) -> bool {
    crate::weilsearch::recheck_rule(c, &SolutionCache::from_env(None))
}
