use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cwm_core::criteria::{run_battery, BatteryOptions, CellQuery, Rule, WeilPolicy};
use cwm_core::exec::Exec;
use cwm_core::grouprings::{AbelianGroup, GroupRingElem};
use cwm_core::numtheory::exact_sqrt;
use cwm_core::table::{
    circulant_table, diff_fixture, fixture_table, group_label, layer, parse_group_label, to_csv,
    to_grid, to_json, CellStatus, Status, TableFixture, TableOptions,
};
use cwm_core::weilsearch::{
    find_witness, is_proper, verify_weighing, SolutionCache, SolutionSet, WeilError, WeilOptions,
};

const EXIT_DECIDED: u8 = 0;
const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_OPEN: u8 = 3;

#[derive(Parser)]
#[command(
    name = "cwm",
    version,
    about = "Existence checks for group-invariant weighing matrices"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide one cell W(|G|, n) with entries bounded by a.
    Check {
        /// Group order v (cyclic) or invariant factors such as 2x22.
        group: String,
        n: u64,
        #[arg(short, long, default_value_t = 1)]
        a: u64,
        /// Also run the class-list rules.
        #[arg(long)]
        weil: bool,
        /// Run every rule instead of stopping at the first that fires.
        #[arg(long)]
        exhaustive: bool,
        /// Look for an explicit witness when no rule fires.
        #[arg(long)]
        search: bool,
        /// Ignore the bundled tables.
        #[arg(long)]
        no_fixture: bool,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Evaluate the circulant table (or the non-cyclic fixture).
    Table {
        #[arg(long, default_value_t = 200)]
        vmax: u64,
        #[arg(long, default_value_t = 10)]
        smax: u64,
        #[arg(long, value_enum, default_value_t = Format::Grid)]
        format: Format,
        /// Comma-separated rule names to enable, e.g. FBOUND,THM45.
        #[arg(long, value_delimiter = ',')]
        rules: Option<Vec<String>>,
        /// Worker threads; 0 uses all cores, 1 runs sequentially.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        weil: bool,
        /// Compare against the bundled fixture; soundness violations fail.
        #[arg(long)]
        diff_fixture: bool,
        /// Evaluate the non-cyclic groups of the bundled fixture instead.
        #[arg(long)]
        group_invariant: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Class list of X·conj(X) = n in Z[ζ_v].
    Weil {
        v: u64,
        n: u64,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// Store a class list from a file instead of enumerating.
        #[arg(long)]
        import: Option<PathBuf>,
        #[arg(long)]
        max_points: Option<f64>,
    },
    /// Check that a group ring element is a weighing element of weight n.
    Verify {
        file: PathBuf,
        n: u64,
        #[arg(short, long, default_value_t = 1)]
        a: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Grid,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_DECIDED
            };
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Check {
            group,
            n,
            a,
            weil,
            exhaustive,
            search,
            no_fixture,
            cache_dir,
        } => {
            let group = parse_group_label(&group).ok_or_else(|| anyhow!("bad group {group:?}"))?;
            if n == 0 || a == 0 {
                bail!("n and a must be positive");
            }
            let cache = SolutionCache::from_env(cache_dir);
            let opts = BatteryOptions {
                exhaustive,
                weil: weil.then(WeilPolicy::default),
                rules: None,
            };
            cmd_check(&group, n, a, &opts, search, !no_fixture, &cache)
        }
        Cmd::Table {
            vmax,
            smax,
            format,
            rules,
            jobs,
            weil,
            diff_fixture: diff,
            group_invariant,
            output,
            cache_dir,
        } => {
            let rules = rules
                .map(|rs| {
                    rs.iter()
                        .map(|r| Rule::parse(r.trim()).ok_or_else(|| anyhow!("unknown rule {r:?}")))
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?;
            let exec = if jobs == 1 {
                Exec::Sequential
            } else {
                Exec::Parallel
            };
            let policy = weil.then(|| WeilPolicy {
                exec,
                ..WeilPolicy::default()
            });
            let opts = TableOptions {
                vmax,
                smax,
                battery: BatteryOptions {
                    exhaustive: false,
                    weil: policy,
                    rules,
                },
                exec,
                jobs,
            };
            let cache = SolutionCache::from_env(cache_dir);
            let fixture = if group_invariant {
                TableFixture::group_invariant()
            } else {
                TableFixture::strassler()
            };
            let cells = if group_invariant {
                fixture_table(&fixture, &opts, &cache)
            } else {
                circulant_table(&fixture, &opts, &cache)
            };
            let text = match format {
                Format::Csv => to_csv(&cells),
                Format::Json => to_json(&cells),
                Format::Grid => to_grid(&cells),
            };
            match output {
                Some(p) => {
                    fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?
                }
                None => emit(text.trim_end())?,
            }
            if !diff {
                return Ok(EXIT_DECIDED);
            }
            let d = diff_fixture(&cells, &fixture);
            for e in &d.soundness {
                eprintln!(
                    "SOUNDNESS {}:{} fixture {:?} engine {:?}",
                    e.group, e.s, e.fixture, e.engine
                );
            }
            for e in &d.gaps {
                eprintln!(
                    "gap {}:{} anchor {:?} engine {:?}",
                    e.group, e.s, e.anchor, e.engine
                );
            }
            for e in &d.settled {
                eprintln!("settled {}:{} by {:?}", e.group, e.s, e.engine);
            }
            eprintln!(
                "{} soundness violations, {} completeness gaps, {} settled",
                d.soundness.len(),
                d.gaps.len(),
                d.settled.len()
            );
            Ok(if d.is_sound() {
                EXIT_DECIDED
            } else {
                EXIT_FAILED
            })
        }
        Cmd::Weil {
            v,
            n,
            cache_dir,
            import,
            max_points,
        } => {
            if v == 0 || n == 0 {
                bail!("v and n must be positive");
            }
            cmd_weil(v, n, cache_dir, import, max_points)
        }
        Cmd::Verify { file, n, a } => {
            let text =
                fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let report = match parse_element(&text)? {
                Some(elem) => {
                    let ok = verify_weighing(&elem, n, a);
                    json!({
                        "group": elem.group().factors(),
                        "n": n,
                        "a": a,
                        "weighing": ok,
                        "proper": ok && is_proper(&elem),
                    })
                }
                None => {
                    json!({"n": n, "a": a, "weighing": false, "proper": false, "reason": "empty element"})
                }
            };
            let ok = report["weighing"] == json!(true);
            emit(&serde_json::to_string_pretty(&report)?)?;
            Ok(if ok { EXIT_DECIDED } else { EXIT_FAILED })
        }
    }
}

fn cmd_check(
    group: &AbelianGroup,
    n: u64,
    a: u64,
    opts: &BatteryOptions,
    search: bool,
    use_fixture: bool,
    cache: &SolutionCache,
) -> Result<u8> {
    let q = CellQuery::new(group.clone(), n, a);
    let certs = run_battery(&q, opts, cache);
    let proof = certs.iter().find(|c| c.is_nonexistent()).cloned();
    // The tables record a = 1 and square n only.
    let s = exact_sqrt(n).filter(|_| a == 1);
    let fixture = match s {
        Some(_) if use_fixture && group.is_cyclic() => TableFixture::strassler(),
        Some(_) if use_fixture => TableFixture::group_invariant(),
        _ => TableFixture::default(),
    };
    let mut cell = layer(
        group,
        s.unwrap_or(0),
        s.and_then(|s| fixture.get(group, s)),
        proof,
    );
    let mut witness = Value::Null;
    if cell.status != Status::Nonexistent && search && group.is_cyclic() {
        if let Some(d) = find_witness(group.order(), n, a) {
            witness = json!(d);
            cell.status = Status::Exists;
            cell.provenance = "search".into();
        }
    }
    let out = json!({
        "group": group_label(group),
        "n": n,
        "a": a,
        "status": cell.status,
        "provenance": cell.provenance,
        "fixture": cell.fixture,
        "certificate": cell.certificate,
        "witness": witness,
        "certificates": certs,
    });
    emit(&serde_json::to_string_pretty(&out)?)?;
    Ok(status_code(&cell))
}

fn status_code(cell: &CellStatus) -> u8 {
    match cell.status {
        Status::Exists | Status::Nonexistent => EXIT_DECIDED,
        Status::Open => EXIT_OPEN,
    }
}

fn cmd_weil(
    v: u64,
    n: u64,
    cache_dir: Option<PathBuf>,
    import: Option<PathBuf>,
    max_points: Option<f64>,
) -> Result<u8> {
    let cache = SolutionCache::from_env(cache_dir);
    let set = if let Some(path) = import {
        let text =
            fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let mut set = SolutionSet::from_json(&text, 32)?;
        if (set.v, set.n) != (v, n) {
            bail!("file holds ({}, {}), expected ({v}, {n})", set.v, set.n);
        }
        // Completeness of an imported list is not established here.
        set.complete = false;
        cache.insert(set)?
    } else {
        let mut opts = WeilOptions::default();
        if let Some(m) = max_points {
            opts.max_points = m;
        }
        match cache.get_or_compute(v, n, &opts) {
            Ok(s) => s,
            Err(e @ (WeilError::DimensionTooLarge { .. } | WeilError::SearchTooLarge { .. })) => {
                eprintln!("{e}");
                eprintln!("hint: supply a class list with --import FILE, or raise --max-points");
                return Ok(EXIT_OPEN);
            }
            Err(e) => return Err(e.into()),
        }
    };
    emit(&set.to_json())?;
    Ok(EXIT_DECIDED)
}

/// A group ring element as {"v": v, "coeffs": [...]} (dense, cyclic) or in
/// the general {"group", "u", "terms"} form. `None` for an empty element.
fn parse_element(text: &str) -> Result<Option<GroupRingElem>> {
    let value: Value = serde_json::from_str(text).context("parsing element JSON")?;
    if let Some(coeffs) = value.get("coeffs") {
        let cs: Vec<i64> =
            serde_json::from_value(coeffs.clone()).context("coeffs must be integers")?;
        if let Some(v) = value.get("v").and_then(Value::as_u64) {
            if v as usize != cs.len() {
                bail!("expected {v} coefficients, found {}", cs.len());
            }
        }
        if cs.is_empty() {
            return Ok(None);
        }
        return Ok(Some(GroupRingElem::cyclic(&cs)));
    }
    let elem: GroupRingElem =
        serde_json::from_value(value).context("parsing group ring element")?;
    Ok((!elem.terms().is_empty()).then_some(elem))
}

/// Print to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}
