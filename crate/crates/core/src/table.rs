//! Existence tables: fixture loading, engine evaluation layered over the
//! fixture, diffs, and csv/json/grid output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::criteria::{run_battery, BatteryOptions, CellQuery, Certificate, Rule};
use crate::exec::Exec;
use crate::grouprings::AbelianGroup;
use crate::weilsearch::SolutionCache;

const STRASSLER: &str = include_str!("../data/strassler.csv");
const GROUP_INVARIANT: &str = include_str!("../data/group_invariant.csv");

#[derive(Debug, Error)]
pub enum TableError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> TableError {
    TableError::Parse {
        line,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Exists,
    Nonexistent,
    Open,
}

impl Status {
    fn from_symbol(c: char) -> Option<Status> {
        match c {
            'Y' => Some(Status::Exists),
            '.' | '*' | 'N' => Some(Status::Nonexistent),
            '?' => Some(Status::Open),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Status::Exists => "EXISTS",
            Status::Nonexistent => "NONEXISTENT",
            Status::Open => "OPEN",
        }
    }

    fn parse(s: &str) -> Option<Status> {
        [Status::Exists, Status::Nonexistent, Status::Open]
            .into_iter()
            .find(|x| x.name() == s)
    }
}

/// Group label used in csv and grid output: "60" for C_60, "2x22" otherwise.
pub fn group_label(g: &AbelianGroup) -> String {
    if g.is_cyclic() {
        g.order().to_string()
    } else {
        g.factors()
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join("x")
    }
}

pub fn parse_group_label(s: &str) -> Option<AbelianGroup> {
    let cs: Vec<u64> = s
        .split('x')
        .map(|p| p.trim().parse().ok())
        .collect::<Option<_>>()?;
    if cs.is_empty() || cs.contains(&0) {
        return None;
    }
    Some(AbelianGroup::from_cyclic_factors(&cs))
}

/// One expected entry: symbol Y, '.', '*', N or ?, or none when the source
/// leaves the cell blank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureCell {
    pub group: AbelianGroup,
    pub s: u64,
    pub symbol: Option<char>,
    pub anchor: Option<Rule>,
    pub cite: Option<String>,
}

impl FixtureCell {
    pub fn expected(&self) -> Option<Status> {
        self.symbol.and_then(Status::from_symbol)
    }
}

#[derive(Debug, Clone, Default)]
pub struct TableFixture {
    cells: BTreeMap<(AbelianGroup, u64), FixtureCell>,
    order: Vec<(AbelianGroup, u64)>,
}

impl TableFixture {
    /// Circulant cells, v ≤ 200 and s ≤ 10.
    pub fn strassler() -> TableFixture {
        TableFixture::parse(STRASSLER).expect("bundled fixture parses")
    }

    /// Non-cyclic abelian groups.
    pub fn group_invariant() -> TableFixture {
        TableFixture::parse(GROUP_INVARIANT).expect("bundled fixture parses")
    }

    /// CSV with columns group (or v), s, symbol, anchor, cite.
    pub fn parse(text: &str) -> Result<TableFixture, TableError> {
        let mut rd = csv::ReaderBuilder::new()
            .flexible(false)
            .from_reader(text.as_bytes());
        let mut fx = TableFixture::default();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let field = |j: usize| rec.get(j).unwrap_or("").trim();
            let group = parse_group_label(field(0)).ok_or_else(|| parse_err(line, "bad group"))?;
            let s: u64 = field(1).parse().map_err(|_| parse_err(line, "bad s"))?;
            let symbol = match field(2) {
                "" => None,
                x if x.len() == 1 && Status::from_symbol(x.chars().next().unwrap()).is_some() => {
                    x.chars().next()
                }
                x => return Err(parse_err(line, format!("unknown symbol {x:?}"))),
            };
            let anchor = match field(3) {
                "" => None,
                x => Some(
                    Rule::parse(x).ok_or_else(|| parse_err(line, format!("unknown rule {x:?}")))?,
                ),
            };
            let cite = Some(field(4)).filter(|c| !c.is_empty()).map(str::to_string);
            let key = (group.clone(), s);
            if fx
                .cells
                .insert(
                    key.clone(),
                    FixtureCell {
                        group,
                        s,
                        symbol,
                        anchor,
                        cite,
                    },
                )
                .is_some()
            {
                return Err(parse_err(line, "duplicate cell"));
            }
            fx.order.push(key);
        }
        Ok(fx)
    }

    pub fn get(&self, group: &AbelianGroup, s: u64) -> Option<&FixtureCell> {
        self.cells.get(&(group.clone(), s))
    }

    /// Cells in file order.
    pub fn cells(&self) -> impl Iterator<Item = &FixtureCell> {
        self.order.iter().map(|k| &self.cells[k])
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// The table entry for W(|G|, s²) on G: the engine's conclusion when it
/// proves nonexistence, otherwise the fixture's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStatus {
    pub v: u64,
    /// Invariant factors, for non-cyclic groups only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<Vec<u64>>,
    pub s: u64,
    pub status: Status,
    /// Rule name, "fixture", "manual" or "none".
    pub provenance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cite: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

impl CellStatus {
    pub fn group(&self) -> AbelianGroup {
        match &self.group {
            Some(fs) => AbelianGroup::from_cyclic_factors(fs),
            None => AbelianGroup::cyclic(self.v),
        }
    }

    /// Symbol in the grid layout.
    pub fn symbol(&self) -> char {
        match self.status {
            Status::Exists => 'Y',
            Status::Open => '?',
            Status::Nonexistent => match self.fixture.as_deref() {
                Some(f @ ("." | "*" | "N")) => f.chars().next().unwrap(),
                _ => 'N',
            },
        }
    }

    fn engine_rule(&self) -> Option<Rule> {
        self.certificate
            .as_ref()
            .filter(|c| c.is_nonexistent() && c.rule != Rule::Manual)
            .map(|c| c.rule)
    }
}

/// Merge one engine run with the fixture entry.
pub fn layer(
    group: &AbelianGroup,
    s: u64,
    fixture: Option<&FixtureCell>,
    engine: Option<Certificate>,
) -> CellStatus {
    let mut cell = CellStatus {
        v: group.order(),
        group: (!group.is_cyclic()).then(|| group.factors().to_vec()),
        s,
        status: Status::Open,
        provenance: "none".into(),
        fixture: fixture.and_then(|f| f.symbol).map(String::from),
        cite: fixture.and_then(|f| f.cite.clone()),
        certificate: None,
    };
    if let Some(c) = engine.filter(Certificate::is_nonexistent) {
        cell.status = Status::Nonexistent;
        cell.provenance = c.rule.name().into();
        cell.certificate = Some(c);
        return cell;
    }
    let Some(f) = fixture else { return cell };
    let Some(status) = f.expected() else {
        return cell;
    };
    cell.status = status;
    cell.provenance = "fixture".into();
    if status == Status::Nonexistent && f.anchor == Some(Rule::Manual) {
        let q = CellQuery::new(group.clone(), s * s, 1);
        let source = f.cite.clone().unwrap_or_else(|| "fixture".into());
        cell.provenance = "manual".into();
        cell.certificate = Some(Certificate::nonexistent(&q, Rule::Manual).param("source", source));
    }
    cell
}

#[derive(Debug, Clone)]
pub struct TableOptions {
    pub vmax: u64,
    pub smax: u64,
    pub battery: BatteryOptions,
    pub exec: Exec,
    /// Worker threads; 0 uses the default pool.
    pub jobs: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            vmax: 200,
            smax: 10,
            battery: BatteryOptions::default(),
            exec: Exec::Parallel,
            jobs: 0,
        }
    }
}

fn first_nonexistent(
    q: &CellQuery,
    opts: &BatteryOptions,
    cache: &SolutionCache,
) -> Option<Certificate> {
    run_battery(q, opts, cache)
        .into_iter()
        .find(Certificate::is_nonexistent)
}

/// Evaluate CW(v, s²) for 1 ≤ v ≤ vmax, 1 ≤ s ≤ smax, ordered by (v, s).
pub fn circulant_table(
    fixture: &TableFixture,
    opts: &TableOptions,
    cache: &SolutionCache,
) -> Vec<CellStatus> {
    let keys: Vec<(AbelianGroup, u64)> = (1..=opts.vmax)
        .flat_map(|v| (1..=opts.smax).map(move |s| (AbelianGroup::cyclic(v), s)))
        .collect();
    evaluate(&keys, fixture, opts, cache)
}

/// Evaluate every cell of a fixture, in fixture order.
pub fn fixture_table(
    fixture: &TableFixture,
    opts: &TableOptions,
    cache: &SolutionCache,
) -> Vec<CellStatus> {
    let keys: Vec<(AbelianGroup, u64)> = fixture.cells().map(|c| (c.group.clone(), c.s)).collect();
    evaluate(&keys, fixture, opts, cache)
}

fn evaluate(
    keys: &[(AbelianGroup, u64)],
    fixture: &TableFixture,
    opts: &TableOptions,
    cache: &SolutionCache,
) -> Vec<CellStatus> {
    opts.exec.install(opts.jobs, || {
        opts.exec.map(keys, |(g, s)| {
            let q = CellQuery::new(g.clone(), s * s, 1);
            layer(
                g,
                *s,
                fixture.get(g, *s),
                first_nonexistent(&q, &opts.battery, cache),
            )
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiffEntry {
    pub group: String,
    pub s: u64,
    pub fixture: Option<String>,
    pub anchor: Option<Rule>,
    pub engine: Option<Rule>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FixtureDiff {
    /// Fixture says the matrix exists; the engine claims it does not.
    pub soundness: Vec<DiffEntry>,
    /// Anchored to an automated rule without a citation, but not flagged by
    /// that rule or a cheaper one.
    pub gaps: Vec<DiffEntry>,
    /// Fixture open or blank; the engine settles it.
    pub settled: Vec<DiffEntry>,
}

impl FixtureDiff {
    pub fn is_sound(&self) -> bool {
        self.soundness.is_empty()
    }
}

/// Rules that establish the same family of results.
fn family(r: Rule) -> Rule {
    match r {
        Rule::Cor46 => Rule::Thm45,
        Rule::Cor415 => Rule::Thm412,
        Rule::OrbitDiophantine => Rule::IcwReduction,
        r => r,
    }
}

/// Whether a certificate by `got` reproduces a cell anchored to `anchor`.
pub fn reproduces(got: Rule, anchor: Rule) -> bool {
    got <= anchor || family(got) == family(anchor)
}

pub fn diff_fixture(cells: &[CellStatus], fixture: &TableFixture) -> FixtureDiff {
    let mut d = FixtureDiff::default();
    for cell in cells {
        let g = cell.group();
        let f = fixture.get(&g, cell.s);
        let engine = cell.engine_rule();
        let entry = || DiffEntry {
            group: group_label(&g),
            s: cell.s,
            fixture: f.and_then(|f| f.symbol).map(String::from),
            anchor: f.and_then(|f| f.anchor),
            engine,
        };
        let expected = f.and_then(FixtureCell::expected);
        match (expected, engine) {
            (Some(Status::Exists), Some(_)) => d.soundness.push(entry()),
            (Some(Status::Open) | None, Some(_)) => d.settled.push(entry()),
            _ => {}
        }
        // A cell that also cites the literature is covered by the citation.
        let anchor = f.filter(|f| f.cite.is_none()).and_then(|f| f.anchor);
        if let Some(anchor) = anchor.filter(|&a| a != Rule::Manual) {
            if !engine.is_some_and(|e| reproduces(e, anchor)) {
                d.gaps.push(entry());
            }
        }
    }
    d
}

pub fn to_csv(cells: &[CellStatus]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["v", "s", "status", "provenance", "fixture", "cite"])
        .expect("in-memory write");
    for c in cells {
        let g = group_label(&c.group());
        let s = c.s.to_string();
        let row = [
            g.as_str(),
            s.as_str(),
            c.status.name(),
            c.provenance.as_str(),
            c.fixture.as_deref().unwrap_or(""),
            c.cite.as_deref().unwrap_or(""),
        ];
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

pub fn to_json(cells: &[CellStatus]) -> String {
    serde_json::to_string_pretty(cells).expect("cells serialize") + "\n"
}

/// One row per group, one column per s; blank where no cell was evaluated.
pub fn to_grid(cells: &[CellStatus]) -> String {
    let smax = cells.iter().map(|c| c.s).max().unwrap_or(0);
    let mut rows: Vec<(String, BTreeMap<u64, char>)> = Vec::new();
    for c in cells {
        let label = group_label(&c.group());
        if rows.last().is_none_or(|(l, _)| *l != label) {
            rows.push((label.clone(), BTreeMap::new()));
        }
        rows.last_mut().unwrap().1.insert(c.s, c.symbol());
    }
    let width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(1).max(1);
    let mut out = format!("{:>width$}", "v\\s");
    for s in 1..=smax {
        let _ = write!(out, " {s:>2}");
    }
    out.push('\n');
    for (label, row) in rows {
        let _ = write!(out, "{label:>width$}");
        for s in 1..=smax {
            let _ = write!(out, " {:>2}", row.get(&s).copied().unwrap_or(' '));
        }
        out.push('\n');
    }
    out
}

/// (group, s, status) triples from any of the three formats, for
/// comparing them.
pub type StatusTriple = (String, u64, Status);

pub fn statuses(cells: &[CellStatus]) -> Vec<StatusTriple> {
    cells
        .iter()
        .map(|c| (group_label(&c.group()), c.s, c.status))
        .collect()
}

pub fn parse_csv(text: &str) -> Result<Vec<StatusTriple>, TableError> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let s = rec
            .get(1)
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| parse_err(i + 2, "bad s"))?;
        let st = rec
            .get(2)
            .and_then(Status::parse)
            .ok_or_else(|| parse_err(i + 2, "bad status"))?;
        out.push((rec.get(0).unwrap_or("").to_string(), s, st));
    }
    Ok(out)
}

pub fn parse_json(text: &str) -> Result<Vec<StatusTriple>, TableError> {
    let cells: Vec<CellStatus> = serde_json::from_str(text)?;
    Ok(statuses(&cells))
}

pub fn parse_grid(text: &str) -> Result<Vec<StatusTriple>, TableError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_err(1, "empty grid"))?;
    let cols: Vec<u64> = header
        .split_whitespace()
        .skip(1)
        .map(|x| x.parse().ok())
        .collect::<Option<_>>()
        .ok_or_else(|| parse_err(1, "bad header"))?;
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut it = line.split_whitespace();
        let label = it.next().ok_or_else(|| parse_err(i + 2, "missing label"))?;
        // Columns are fixed-width: label, then " xx" per s.
        let body = &line[line.find(label).unwrap() + label.len()..];
        for (j, &s) in cols.iter().enumerate() {
            let cell = body.get(3 * j..3 * j + 3).unwrap_or("").trim();
            if cell.is_empty() {
                continue;
            }
            let c = cell.chars().next().unwrap();
            let st = Status::from_symbol(c)
                .ok_or_else(|| parse_err(i + 2, format!("bad symbol {c:?}")))?;
            out.push((label.to_string(), s, st));
        }
    }
    Ok(out)
}
