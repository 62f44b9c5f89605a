//! One PASS/FAIL line per acceptance criterion. Criteria listed in
//! `KNOWN_FAILURES` are expected to fail; the target fails if any other
//! criterion fails or if a known failure starts passing.

mod common;

use std::time::{Duration, Instant};

use cwm_core::criteria::{
    recheck, rule_fbound, BatteryOptions, CellQuery, Certificate, Rule, WeilPolicy,
};
use cwm_core::cyclotomic::CycInt;
use cwm_core::grouprings::{AbelianGroup, GroupRingElem};
use cwm_core::numtheory::f_value;
use cwm_core::table::{circulant_table, diff_fixture, Status, TableFixture, TableOptions};
use cwm_core::weilsearch::{
    class_divisibility, classify_icw2_77_100, icw2_77_100_reference, orbit_search, rule_idempotent,
    verify_weighing, weil_divisibility_rule, weil_enumerate, SolutionCache,
};

/// Criteria whose failure is understood and recorded.
const KNOWN_FAILURES: [u32; 2] = [4, 5];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Outcome {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn ms(d: Duration) -> String {
    format!("{:.3} ms", d.as_secs_f64() * 1e3)
}

fn secs(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}

const TABLE2: [(u64, u64, u64); 6] = [
    (128, 49, 16),
    (147, 64, 21),
    (117, 81, 39),
    (160, 100, 20),
    (176, 100, 44),
    (192, 100, 24),
];

fn criterion1() -> Outcome {
    let mut bad = Vec::new();
    let mut slowest = Duration::ZERO;
    for (v, n, want) in TABLE2 {
        let (got, t) = timed(|| f_value(v, n));
        slowest = slowest.max(t);
        if got != want || t >= Duration::from_millis(1) {
            bad.push(format!("F({v},{n}) = {got} in {}", ms(t)));
        }
    }
    if bad.is_empty() {
        Outcome::new(true, format!("6 values, slowest {}", ms(slowest)))
    } else {
        Outcome::new(false, bad.join("; "))
    }
}

fn criterion2() -> Outcome {
    let mut queries: Vec<CellQuery> = TABLE2
        .iter()
        .map(|&(v, n, _)| CellQuery::cyclic(v, n))
        .collect();
    // IW(2^c, 2^{2e+6}) and IW(3^c, 7^{2e+2}) on groups whose exponent is
    // divisible by 2^{c−1}, 3^{c−1}.
    for (p, n0, n1) in [(2u64, 64u64, 256u64), (3, 49, 2401)] {
        for c in 1..=6u32 {
            let big = p.pow(c);
            let mut groups = vec![AbelianGroup::cyclic(big)];
            if c >= 2 {
                groups.push(AbelianGroup::new(vec![p, big / p]).unwrap());
            }
            for g in groups {
                for n in [n0, n1] {
                    queries.push(CellQuery::new(g.clone(), n, 1));
                }
            }
        }
    }
    let mut bad = Vec::new();
    let mut slowest = Duration::ZERO;
    for q in &queries {
        let (c, t) = timed(|| rule_fbound(q));
        slowest = slowest.max(t);
        if !c.is_nonexistent() || !recheck(&c) || t >= Duration::from_millis(1) {
            bad.push(format!("{}/{} ({})", q.group, q.n, ms(t)));
        }
    }
    if bad.is_empty() {
        Outcome::new(
            true,
            format!(
                "{} cells refuted and rechecked, slowest {}",
                queries.len(),
                ms(slowest)
            ),
        )
    } else {
        Outcome::new(false, format!("not refuted: {}", bad.join(", ")))
    }
}

/// Criteria 3 and 4 share one sweep over the table.
fn criteria3_4() -> (Outcome, Outcome) {
    let fixture = TableFixture::strassler();
    let opts = TableOptions {
        battery: BatteryOptions {
            weil: Some(WeilPolicy::default()),
            ..Default::default()
        },
        ..Default::default()
    };
    let cache = SolutionCache::in_memory();
    let (cells, t) = timed(|| circulant_table(&fixture, &opts, &cache));
    let diff = diff_fixture(&cells, &fixture);
    let certs: Vec<&Certificate> = cells
        .iter()
        .filter_map(|c| c.certificate.as_ref())
        .filter(|c| c.is_nonexistent() && c.rule != Rule::Manual)
        .collect();
    let (failed_recheck, t_recheck) = timed(|| {
        certs
            .iter()
            .filter(|c| !recheck(c))
            .map(|c| format!("{}/{}", c.query.group, c.query.n))
            .collect::<Vec<_>>()
    });
    let nonexistent = cells
        .iter()
        .filter(|c| c.status == Status::Nonexistent)
        .count();
    let c3 = Outcome::new(
        cells.len() == 2000
            && diff.is_sound()
            && failed_recheck.is_empty()
            && t < Duration::from_secs(30 * 60),
        format!(
            "{} cells in {} ({} NONEXISTENT, {} by the engine), {} soundness violations, \
             {} certificates rechecked in {} with {} failures",
            cells.len(),
            secs(t),
            nonexistent,
            certs.len(),
            diff.soundness.len(),
            certs.len(),
            secs(t_recheck),
            failed_recheck.len()
        ),
    );
    let anchored = fixture
        .cells()
        .filter(|c| c.anchor.is_some_and(|a| a != Rule::Manual) && c.cite.is_none())
        .count();
    let gaps: Vec<String> = diff
        .gaps
        .iter()
        .map(|g| {
            let anchor = g.anchor.map_or("-", Rule::name);
            let engine = g.engine.map_or("none", Rule::name);
            format!("{}/{} ({anchor}, engine {engine})", g.group, g.s)
        })
        .collect();
    let c4 = Outcome::new(
        gaps.is_empty(),
        if gaps.is_empty() {
            format!("all {anchored} anchored cells reproduced")
        } else {
            format!(
                "{} of {anchored} anchored cells reproduced; gaps: {}",
                anchored - gaps.len(),
                gaps.join(", ")
            )
        },
    );
    (c3, c4)
}

fn zeta_poly(u: u64, terms: &[(i64, i64)]) -> CycInt {
    CycInt::from_terms(u, terms)
}

fn criterion5() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let (s60, t60) = timed(|| weil_enumerate(60, 36).expect("conductor 60 is within the cap"));
    let theta1 = zeta_poly(
        60,
        &[
            (15, -3),
            (14, -2),
            (11, 1),
            (10, 2),
            (9, 1),
            (8, 4),
            (6, 2),
            (5, 5),
            (4, 2),
            (2, -4),
            (1, -1),
            (0, -4),
        ],
    );
    let theta2 = zeta_poly(
        60,
        &[
            (15, -1),
            (14, 1),
            (11, -3),
            (10, -1),
            (9, -3),
            (8, -2),
            (6, -1),
            (5, 5),
            (4, -1),
            (2, 2),
            (1, 3),
        ],
    );
    let others = [
        zeta_poly(60, &[(15, 2), (11, -4), (9, -4), (1, 4), (0, 4)]),
        CycInt::from_int(60, 6),
    ];
    // Printed as 3(ζ^14 + ζ^10 + 2ζ^8 + ζ^6 + ζ^4 − 2ζ^2 − 2), which has the
    // wrong absolute value; it can only be reported, not matched.
    let misprint = zeta_poly(
        60,
        &[(14, 3), (10, 3), (8, 6), (6, 3), (4, 3), (2, -6), (0, -6)],
    );
    let misprint_norm = misprint.abs_sq().as_integer();
    let thetas = s60.contains_equivalent(&theta1) && s60.contains_equivalent(&theta2);
    let listed = others.iter().all(|x| s60.contains_equivalent(x));
    let ok60 = s60.classes.len() == 5 && thetas && listed && t60 < Duration::from_secs(15 * 60);
    pass &= ok60;
    notes.push(format!(
        "(60,36): {} classes in {}, theta1/theta2 {}, other listed solutions {}, \
         3(..) form has norm {}",
        s60.classes.len(),
        secs(t60),
        if thetas { "found" } else { "MISSING" },
        if listed { "found" } else { "MISSING" },
        misprint_norm.map_or("irrational".into(), |n| n.to_string()),
    ));

    let (s31, t31) = timed(|| weil_enumerate(31, 36).expect("conductor 31 is within the cap"));
    let ok31 = s31.classes.len() == 1
        && s31.contains_equivalent(&CycInt::from_int(31, 6))
        && t31 < Duration::from_secs(30 * 60);
    pass &= ok31;
    notes.push(format!(
        "(31,36): {} class(es) in {}",
        s31.classes.len(),
        secs(t31)
    ));

    // The conductor-30 solution is printed in powers of ζ30 but only has
    // absolute value 6 when read in ζ15 = ζ30^2, as printed for conductor 15.
    let x15_terms = [(0, 1), (1, -2), (2, -1), (3, 1), (4, -2), (5, 1), (7, -1)];
    let x15 = zeta_poly(15, &x15_terms).scale(3);
    let x30 = zeta_poly(30, &x15_terms.map(|(j, c)| (2 * j, c))).scale(3);
    let x20 = zeta_poly(20, &[(0, 2), (3, -2), (5, 1), (7, -2)]).scale(2);
    let mut low = Vec::new();
    for (v, x) in [(30u64, x30), (20, x20), (15, x15)] {
        let (s, t) = timed(|| weil_enumerate(v, 36).expect("within the cap"));
        let six = s.contains_equivalent(&CycInt::from_int(v, 6));
        let ok = s.classes.len() == 2
            && six
            && s.contains_equivalent(&x)
            && t < Duration::from_secs(5 * 60);
        pass &= ok;
        low.push(format!(
            "{v}: {}{}",
            s.classes.len(),
            if ok { "" } else { " MISMATCH" }
        ));
    }
    notes.push(format!("two-class lists {}", low.join(", ")));

    let (s4, t4) = timed(|| weil_enumerate(4, 4).unwrap());
    let ok4 = s4.classes.len() == 1
        && s4.contains_equivalent(&CycInt::from_int(4, 2))
        && t4 < Duration::from_secs(1);
    pass &= ok4;
    notes.push(format!("(4,4): {} class in {}", s4.classes.len(), ms(t4)));
    Outcome::new(pass, notes.join("; "))
}

fn criterion6() -> Outcome {
    let cache = SolutionCache::in_memory();
    let q = CellQuery::cyclic(60, 36);
    let (c, t) = timed(|| rule_idempotent(&q, &cache, &WeilPolicy::default()));
    let ok = c.is_nonexistent() && t < Duration::from_secs(30 * 60);
    let rechecked = ok && recheck(&c);
    Outcome::new(
        ok && rechecked,
        format!(
            "IDEMPOTENT on C60, n = 36: {} in {}, recheck {}",
            if c.is_nonexistent() {
                "NONEXISTENT"
            } else {
                "INCONCLUSIVE"
            },
            secs(t),
            if rechecked { "ok" } else { "failed" }
        ),
    )
}

fn criterion7() -> Outcome {
    let cache = SolutionCache::in_memory();
    let q = CellQuery::cyclic(155, 36);
    let (c, t) = timed(|| weil_divisibility_rule(&q, 2, &cache, &WeilPolicy::default()));
    let levels: Vec<u64> = c.params["levels"]
        .as_array()
        .map(|ls| ls.iter().filter_map(|l| l["w"].as_u64()).collect())
        .unwrap_or_default();
    let missing = c.get_u64("missing");
    // The divisibility of every local class is also checked directly.
    let local = [5u64, 31].iter().all(|&w| {
        weil_enumerate(w, 36)
            .map(|s| s.representatives().all(|r| class_divisibility(r, 2) > 0))
            .unwrap_or(false)
    });
    let sub_checks = levels == [1, 5, 31] && local;
    let pass = if c.is_nonexistent() {
        true
    } else {
        sub_checks && missing == Some(155)
    };
    Outcome::new(
        pass,
        format!(
            "w = 1, 5, 31 {} in {}; conclusion {} (w = 155 class list {})",
            if sub_checks { "pass" } else { "FAIL" },
            secs(t),
            if c.is_nonexistent() {
                "NONEXISTENT"
            } else {
                "pending"
            },
            if missing == Some(155) {
                "must be imported"
            } else {
                "available"
            },
        ),
    )
}

fn criterion8() -> Outcome {
    let e = GroupRingElem::cyclic(&icw2_77_100_reference());
    let verified = verify_weighing(&e, 100, 2);
    let (classes, t) = timed(classify_icw2_77_100);
    let one = classes.len() == 1 && verify_weighing(&GroupRingElem::cyclic(&classes[0]), 100, 2);
    Outcome::new(
        verified && one && t < Duration::from_secs(10 * 60),
        format!(
            "reference {}, {} class(es) in {}",
            if verified { "verified" } else { "REJECTED" },
            classes.len(),
            secs(t)
        ),
    )
}

/// Every ±1/0 vector of length v, pruned only by weight.
fn naive_exists(v: usize, n: i64) -> bool {
    let mut d = vec![-1i64; v];
    loop {
        if d.iter().map(|c| c * c).sum::<i64>() == n
            && (1..v).all(|s| (0..v).map(|i| d[i] * d[(i + s) % v]).sum::<i64>() == 0)
        {
            return true;
        }
        let mut i = 0;
        loop {
            if i == v {
                return false;
            }
            if d[i] < 1 {
                d[i] += 1;
                break;
            }
            d[i] = -1;
            i += 1;
        }
    }
}

fn criterion9() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (v, n, t, expect) in [
        (7u64, 4u64, 2u64, true),
        (13, 9, 3, true),
        (5, 4, 1, false),
        (11, 9, 1, false),
    ] {
        let (found, dt) = timed(|| orbit_search(v, n, 1, t));
        let valid = found
            .iter()
            .all(|d| verify_weighing(&GroupRingElem::cyclic(d), n, 1));
        let (oracle, dt_oracle) = timed(|| naive_exists(v as usize, n as i64));
        let ok = valid
            && !found.is_empty() == expect
            && oracle == expect
            && dt < Duration::from_secs(60);
        pass &= ok;
        notes.push(format!(
            "CW({v},{n}) {} in {} (brute force {} in {})",
            if found.is_empty() { "absent" } else { "found" },
            secs(dt),
            if oracle { "found" } else { "absent" },
            secs(dt_oracle)
        ));
    }
    Outcome::new(pass, notes.join("; "))
}

fn criterion10() -> Outcome {
    let (results, t) = timed(|| {
        common::CHECKS
            .iter()
            .map(|(name, check)| (name, common::run_seeded(*check, 0, 100)))
            .collect::<Vec<_>>()
    });
    let failed: Vec<String> = results
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    Outcome::new(
        failed.is_empty() && t < Duration::from_secs(120),
        if failed.is_empty() {
            format!("{} properties x 100 cases in {}", results.len(), secs(t))
        } else {
            failed.join("; ")
        },
    )
}

fn main() {
    let (c3, c4) = criteria3_4();
    let outcomes = [
        (1, "F-values", criterion1()),
        (2, "F-bound rule", criterion2()),
        (3, "soundness sweep", c3),
        (4, "completeness on anchored cells", c4),
        (5, "Weil enumeration", criterion5()),
        (6, "idempotent rule", criterion6()),
        (7, "divisibility rule", criterion7()),
        (8, "classification fixture", criterion8()),
        (9, "small searches", criterion9()),
        (10, "property suites", criterion10()),
    ];
    let mut unexpected = Vec::new();
    for (id, name, o) in &outcomes {
        let known = KNOWN_FAILURES.contains(id);
        let tag = match (o.pass, known) {
            (true, false) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
            (true, true) => "PASS (listed as a known failure)",
        };
        println!("criterion {id:>2} {name}: {tag}: {}", o.detail);
        if o.pass == known {
            unexpected.push(*id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
