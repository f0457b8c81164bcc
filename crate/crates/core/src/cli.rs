//! Command-line front end.
//!
//! Exit codes: 0 success or faithful, 1 unfaithful, 2 usage or input error,
//! 3 budget exhausted.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::construct::{
    self, ConstructError, ConstructionTrace, CoprimeOptions, NumeratorPolicy, OmegaSet,
};
use crate::json::{
    self, DecompositionJson, FractionJson, InstanceJson, ReportJson, SearchJson, TraceJson,
};
use crate::model::Decomposition;
use crate::partition::{self, PartitionError, PartitionSpec};
use crate::search::{self, SearchBudget, SearchError, ShapeFilter};
use crate::verifier::{FaithfulnessReport, VerifyError, Verifier, DEFAULT_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNFAITHFUL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "faithful", version, about = "Construct and verify faithful fraction decompositions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// most lattice points or combinations enumerated before giving up
    #[arg(long, default_value_t = DEFAULT_CAP, value_parser = clap::value_parser!(u64).range(1..))]
    pub cap: u64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    TwoTerm,
    Theorem1,
    Theorem2,
    General,
    Prop7,
    Theorem4,
    Partition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    FourOverN,
    Prop7,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Prop7,
    General,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide faithfulness of a decomposition read as JSON from FILE or stdin
    Verify {
        file: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Build a decomposition of M/N
    Decompose {
        #[arg(value_parser = parse_positive)]
        m: BigUint,
        #[arg(value_parser = parse_positive)]
        n: BigUint,
        #[arg(long, value_enum)]
        strategy: Strategy,
        /// denominators the coprime constructions must avoid
        #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
        omega: Vec<BigUint>,
        #[arg(long, value_delimiter = ',')]
        parts: Vec<u64>,
        /// admissible primes skipped before the greedy stage
        #[arg(long, default_value_t = 0)]
        seed: usize,
        /// leading numerators for `general`: unit, max or a number
        #[arg(long, default_value = "unit", value_parser = parse_policy)]
        policy: NumeratorPolicy,
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate the three-term constructions
    Table {
        #[arg(value_enum)]
        kind: TableKind,
        #[arg(long, default_value_t = 5)]
        from: u64,
        #[arg(long, default_value_t = 99)]
        to: u64,
        /// numerator for the prop7 table
        #[arg(long, default_value_t = 3)]
        m: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Compare partial sums of a block decomposition with the subset sums of a partition
    PartitionCheck {
        m: u64,
        n: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        parts: Vec<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Shortest faithful decomposition within a length and denominator budget
    Search {
        m: u64,
        n: u64,
        #[arg(long)]
        max_length: usize,
        #[arg(long)]
        max_den: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Instances where the three-term criterion and the verifier disagree
    Hunt {
        #[arg(long, default_value = "3..5", value_parser = parse_range)]
        m: (u64, u64),
        #[arg(long)]
        n_max: u64,
        #[arg(long, value_enum, default_value_t = Shape::Prop7)]
        shape: Shape,
        #[arg(long, default_value_t = 20)]
        max_y2: u64,
        #[arg(long, default_value_t = 20)]
        max_y: u64,
        #[arg(long, default_value_t = 20)]
        max_x: u64,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_positive(s: &str) -> Result<BigUint, String> {
    match s.trim().parse::<BigUint>() {
        Ok(v) if v > BigUint::from(0u32) => Ok(v),
        _ => Err(format!("{s:?} is not a positive integer")),
    }
}

fn parse_policy(s: &str) -> Result<NumeratorPolicy, String> {
    match s {
        "unit" => Ok(NumeratorPolicy::Unit),
        "max" => Ok(NumeratorPolicy::Max),
        _ => s
            .parse::<u64>()
            .ok()
            .filter(|&k| k > 0)
            .map(NumeratorPolicy::Fixed)
            .ok_or_else(|| format!("{s:?} is not unit, max or a positive integer")),
    }
}

/// `a..b`, `a..=b` or a single value; both ends inclusive.
fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let bad = || format!("{s:?} is not a range like 3..5");
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo, hi.trim_start_matches('=')),
        None => (s, s),
    };
    let lo = lo.trim().parse().map_err(|_| bad())?;
    let hi = hi.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }
}

impl From<ConstructError> for Failure {
    fn from(e: ConstructError) -> Self {
        let code = match e {
            ConstructError::GreedyBudgetExceeded { .. } | ConstructError::ProgressionExhausted(_) => {
                EXIT_BUDGET
            }
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        Failure::input(e)
    }
}

impl From<PartitionError> for Failure {
    fn from(e: PartitionError) -> Self {
        match e {
            PartitionError::Construct(c) => c.into(),
            other => Failure::input(other),
        }
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        Failure::input(e)
    }
}

struct Output {
    text: String,
    code: i32,
}

/// Parses `args` (program name first) and runs the command. Returns the
/// exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
                return EXIT_INPUT;
            }
            let _ = out.write_all(rendered.as_bytes());
            return EXIT_OK;
        }
    };
    match execute(cli.command, stdin) {
        Ok(o) => {
            let _ = out.write_all(o.text.as_bytes());
            o.code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(command: Command, stdin: &mut dyn Read) -> Result<Output, Failure> {
    match command {
        Command::Verify { file, common } => cmd_verify(file, &common, stdin),
        Command::Decompose {
            m,
            n,
            strategy,
            omega,
            parts,
            seed,
            policy,
            trace,
            common,
        } => cmd_decompose(m, n, strategy, omega, parts, seed, policy, trace, &common),
        Command::Table {
            kind,
            from,
            to,
            m,
            common,
        } => cmd_table(kind, from, to, m, &common),
        Command::PartitionCheck {
            m,
            n,
            parts,
            common,
        } => cmd_partition_check(m, n, &parts, &common),
        Command::Search {
            m,
            n,
            max_length,
            max_den,
            common,
        } => cmd_search(m, n, max_length, max_den, &common),
        Command::Hunt {
            m,
            n_max,
            shape,
            max_y2,
            max_y,
            max_x,
            common,
        } => {
            let filter = match shape {
                Shape::Prop7 => ShapeFilter::Prop7,
                Shape::General => ShapeFilter::General { max_y2, max_y, max_x },
            };
            cmd_hunt(m, n_max, filter, &common)
        }
    }
}

fn structured(common: &Common) -> Result<Format, Failure> {
    match common.format.unwrap_or(Format::Json) {
        Format::Csv => Err(Failure::input("csv output is only available for table")),
        f => Ok(f),
    }
}

fn verifier(common: &Common) -> Verifier {
    Verifier::default().with_cap(common.cap)
}

fn report_text(r: &FaithfulnessReport) -> String {
    match &r.violation {
        None => format!(
            "faithful ({}, {} combinations examined)\n",
            r.method, r.combos_examined
        ),
        Some(v) => {
            let coeffs: Vec<String> = v.coefficients.iter().map(|c| c.to_string()).collect();
            format!(
                "unfaithful: coefficients ({}) give {} ({})\n",
                coeffs.join(", "),
                v.value,
                r.method
            )
        }
    }
}

fn cmd_verify(
    file: Option<PathBuf>,
    common: &Common,
    stdin: &mut dyn Read,
) -> Result<Output, Failure> {
    let format = structured(common)?;
    let text = match file {
        Some(path) if path.as_os_str() != "-" => std::fs::read_to_string(&path)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?,
        _ => {
            let mut s = String::new();
            stdin
                .read_to_string(&mut s)
                .map_err(|e| Failure::input(format!("stdin: {e}")))?;
            s
        }
    };
    let d = json::parse_decomposition(&text).map_err(Failure::input)?;
    let report = verifier(common).verify(&d)?;
    let code = if report.faithful { EXIT_OK } else { EXIT_UNFAITHFUL };
    let text = match format {
        Format::Text => report_text(&report),
        _ => json::to_string(&ReportJson::from(&report)),
    };
    Ok(Output { text, code })
}

#[derive(Serialize)]
struct DecomposeJson {
    strategy: &'static str,
    decomposition: DecompositionJson,
    certificate: Option<ReportJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    predicted_faithful: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<TraceJson>,
}

#[derive(Serialize)]
struct PartitionJson {
    strategy: &'static str,
    parts: Vec<String>,
    blocks: Vec<DecompositionJson>,
    block_certificates: Vec<ReportJson>,
    combined: DecompositionJson,
    s_set: Vec<FractionJson>,
    t_set: Vec<FractionJson>,
    holds: bool,
    contains_subset_sums: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    traces: Option<Vec<TraceJson>>,
}

fn small(v: &BigUint, what: &str) -> Result<u64, Failure> {
    v.to_u64()
        .ok_or_else(|| Failure::input(format!("{what} = {v} is too large for this strategy")))
}

#[allow(clippy::too_many_arguments)]
fn cmd_decompose(
    m: BigUint,
    n: BigUint,
    strategy: Strategy,
    omega: Vec<BigUint>,
    parts: Vec<u64>,
    seed: usize,
    policy: NumeratorPolicy,
    trace: bool,
    common: &Common,
) -> Result<Output, Failure> {
    let format = structured(common)?;
    let verifier = verifier(common);
    if strategy == Strategy::Partition {
        if parts.is_empty() {
            return Err(Failure::input("partition strategy needs --parts"));
        }
        let spec = PartitionSpec::new(small(&m, "m")?, &parts)?;
        return partition_output(&spec, small(&n, "n")?, trace, format, &verifier, "partition");
    }
    let omega = OmegaSet::from_values(omega)?;
    let options = CoprimeOptions {
        seed,
        ..Default::default()
    };
    let mut predicted = None;
    let (d, tr): (Decomposition, ConstructionTrace) = match strategy {
        Strategy::TwoTerm => construct::two_term_traced(m, n)?,
        Strategy::Theorem1 => construct::theorem1(m, n)?,
        Strategy::Theorem2 => construct::all_units_but_one_with(m, n, &omega, &options)?,
        Strategy::General => construct::general_coprime_with(m, n, policy, &omega, &options)?,
        Strategy::Prop7 => {
            let (d, p, t) = construct::prop7(m, n)?;
            predicted = Some(p);
            (d, t)
        }
        Strategy::Theorem4 => {
            if m != BigUint::from(4u32) {
                return Err(Failure::input(format!("theorem4 needs m = 4, got {m}")));
            }
            construct::theorem4(n)?
        }
        Strategy::Partition => unreachable!(),
    };
    let (certificate, code) = match verifier.verify(&d) {
        Ok(r) => (Some(r), EXIT_OK),
        Err(VerifyError::CapExceeded { .. }) => (None, EXIT_BUDGET),
        Err(e) => return Err(e.into()),
    };
    let text = match format {
        Format::Text => {
            let mut s = format!("{}\n", d.display_equation());
            match &certificate {
                Some(r) => s.push_str(&report_text(r)),
                None => s.push_str("verification exceeded the cap\n"),
            }
            if let Some(p) = predicted {
                let _ = writeln!(s, "predicted faithful: {p}");
            }
            if trace {
                let _ = writeln!(s, "{tr}");
            }
            s
        }
        _ => json::to_string(&DecomposeJson {
            strategy: strategy_name(strategy),
            decomposition: DecompositionJson::from(&d),
            certificate: certificate.as_ref().map(ReportJson::from),
            predicted_faithful: predicted,
            trace: trace.then(|| TraceJson::from(&tr)),
        }),
    };
    Ok(Output { text, code })
}

fn strategy_name(s: Strategy) -> &'static str {
    match s {
        Strategy::TwoTerm => "two-term",
        Strategy::Theorem1 => "theorem1",
        Strategy::Theorem2 => "theorem2",
        Strategy::General => "general",
        Strategy::Prop7 => "prop7",
        Strategy::Theorem4 => "theorem4",
        Strategy::Partition => "partition",
    }
}

fn partition_output(
    spec: &PartitionSpec,
    n: u64,
    trace: bool,
    format: Format,
    verifier: &Verifier,
    label: &'static str,
) -> Result<Output, Failure> {
    let check = match partition::check_partition_theorem_with(spec, n, verifier) {
        Ok(c) => c,
        Err(PartitionError::Verify(VerifyError::CapExceeded { method, cap })) => {
            return Err(Failure {
                code: EXIT_BUDGET,
                message: format!("{method} enumeration needs more than the cap of {cap} combinations"),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let mut certificates = Vec::with_capacity(check.blocks.blocks.len());
    for b in &check.blocks.blocks {
        certificates.push(verifier.verify(b)?);
    }
    let code = if check.holds() { EXIT_OK } else { EXIT_UNFAITHFUL };
    let text = match format {
        Format::Text => {
            let mut s = String::new();
            for (b, r) in check.blocks.blocks.iter().zip(&certificates) {
                let _ = write!(s, "block {}\n  {}", b.display_equation(), report_text(r));
            }
            let _ = writeln!(s, "combined {}", check.blocks.combined.display_equation());
            let show = |set: &std::collections::BTreeSet<crate::numeric::Rational>| {
                set.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
            };
            let _ = writeln!(s, "S = {{{}}}", show(&check.s_set));
            let _ = writeln!(s, "T = {{{}}}", show(&check.t_set));
            let _ = writeln!(s, "S = T: {}", check.holds());
            s
        }
        _ => json::to_string(&PartitionJson {
            strategy: label,
            parts: spec.parts().iter().map(|p| p.to_string()).collect(),
            blocks: check.blocks.blocks.iter().map(DecompositionJson::from).collect(),
            block_certificates: certificates.iter().map(ReportJson::from).collect(),
            combined: DecompositionJson::from(&check.blocks.combined),
            s_set: json::rational_set(&check.s_set),
            t_set: json::rational_set(&check.t_set),
            holds: check.holds(),
            contains_subset_sums: check.contains_subset_sums(),
            traces: trace.then(|| check.blocks.traces.iter().map(TraceJson::from).collect()),
        }),
    };
    Ok(Output { text, code })
}

fn cmd_partition_check(m: u64, n: u64, parts: &[u64], common: &Common) -> Result<Output, Failure> {
    let format = structured(common)?;
    let spec = PartitionSpec::new(m, parts)?;
    partition_output(&spec, n, false, format, &verifier(common), "partition-check")
}

#[derive(Serialize)]
struct FourRow {
    n: String,
    x: String,
    y: String,
    z: String,
    r: String,
    case: String,
    verified: String,
}

#[derive(Serialize)]
struct Prop7Row {
    m: String,
    n: String,
    x: String,
    y: String,
    z: String,
    r: String,
    case: String,
    predicted: String,
    verified: String,
}

fn verdict(v: &Verifier, d: &Decomposition) -> String {
    match v.verify(d) {
        Ok(r) => r.faithful.to_string(),
        Err(_) => "unknown".into(),
    }
}

/// `x, y, z, r` for `1/x + 1/y + r/z`.
fn three_terms(d: &Decomposition) -> [String; 4] {
    let t = d.terms();
    [
        t[0].den().to_string(),
        t[1].den().to_string(),
        t[2].den().to_string(),
        t[2].num().to_string(),
    ]
}

fn render_table<R: Serialize>(header: &[&str], rows: &[R], cells: impl Fn(&R) -> Vec<String>, format: Format) -> String {
    match format {
        Format::Json => json::to_string(&rows),
        Format::Csv => {
            let mut s = header.join(",");
            s.push('\n');
            for r in rows {
                s.push_str(&cells(r).join(","));
                s.push('\n');
            }
            s
        }
        Format::Text => {
            let mut all = vec![header.iter().map(|h| h.to_string()).collect::<Vec<_>>()];
            all.extend(rows.iter().map(&cells));
            let widths: Vec<usize> = (0..header.len())
                .map(|i| all.iter().map(|r| r[i].len()).max().unwrap_or(0))
                .collect();
            let mut s = String::new();
            for r in all {
                let line: Vec<String> = r
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect();
                s.push_str(line.join("  ").trim_end());
                s.push('\n');
            }
            s
        }
    }
}

fn cmd_table(kind: TableKind, from: u64, to: u64, m: u64, common: &Common) -> Result<Output, Failure> {
    let format = common.format.unwrap_or(Format::Csv);
    let v = verifier(common);
    let text = match kind {
        TableKind::FourOverN => {
            let mut rows = Vec::new();
            for n in (from.max(5)..=to).filter(|n| n % 2 == 1) {
                let (d, tr) = construct::theorem4(n)?;
                let [x, y, z, r] = three_terms(&d);
                rows.push(FourRow {
                    n: n.to_string(),
                    x,
                    y,
                    z,
                    r,
                    case: tr.case_tag().to_string(),
                    verified: verdict(&v, &d),
                });
            }
            render_table(
                &["n", "x", "y", "z", "r", "case", "verified"],
                &rows,
                |r| vec![r.n.clone(), r.x.clone(), r.y.clone(), r.z.clone(), r.r.clone(), r.case.clone(), r.verified.clone()],
                format,
            )
        }
        TableKind::Prop7 => {
            if m < 3 {
                return Err(Failure::input(format!("prop7 table needs m >= 3, got {m}")));
            }
            let mut rows = Vec::new();
            for n in (from.max(m + 1)..=to).filter(|n| num_integer::gcd(*n, m) == 1) {
                let (d, predicted, tr) = construct::prop7(m, n)?;
                let [x, y, z, r] = three_terms(&d);
                rows.push(Prop7Row {
                    m: m.to_string(),
                    n: n.to_string(),
                    x,
                    y,
                    z,
                    r,
                    case: tr.case_tag().to_string(),
                    predicted: predicted.to_string(),
                    verified: verdict(&v, &d),
                });
            }
            render_table(
                &["m", "n", "x", "y", "z", "r", "case", "predicted", "verified"],
                &rows,
                |r| {
                    vec![
                        r.m.clone(),
                        r.n.clone(),
                        r.x.clone(),
                        r.y.clone(),
                        r.z.clone(),
                        r.r.clone(),
                        r.case.clone(),
                        r.predicted.clone(),
                        r.verified.clone(),
                    ]
                },
                format,
            )
        }
    };
    Ok(Output { text, code: EXIT_OK })
}

fn cmd_search(m: u64, n: u64, max_length: usize, max_den: u64, common: &Common) -> Result<Output, Failure> {
    let format = structured(common)?;
    let budget = SearchBudget::new(max_length, max_den).with_cap(common.cap);
    let result = search::min_length_search_with(m, n, &budget, &verifier(common))?;
    let code = if result.complete() { EXIT_OK } else { EXIT_BUDGET };
    let text = match format {
        Format::Text => {
            let mut s = String::new();
            for l in &result.lengths {
                let status = match (&l.found, l.exhausted) {
                    (Some(d), _) => format!("found {}", d.display_equation()),
                    (None, true) => "none (exhausted)".to_string(),
                    (None, false) => "none (cap reached)".to_string(),
                };
                let _ = writeln!(s, "length {}: {} [{} combinations]", l.length, status, l.combos);
            }
            s
        }
        _ => json::to_string(&SearchJson::from(&result)),
    };
    Ok(Output { text, code })
}

#[derive(Serialize)]
struct HuntJson {
    m_min: String,
    m_max: String,
    n_max: String,
    shape: &'static str,
    discrepancies: Vec<InstanceJson>,
}

fn cmd_hunt(m: (u64, u64), n_max: u64, filter: ShapeFilter, common: &Common) -> Result<Output, Failure> {
    let format = structured(common)?;
    let found = search::prop6_discrepancy_scan(m.0..=m.1, 1..=n_max, filter)?;
    let text = match format {
        Format::Text => {
            let mut s = format!("{} discrepancies\n", found.len());
            for i in &found {
                let _ = writeln!(
                    s,
                    "{}  criterion {}  verifier {}",
                    i.decomposition.display_equation(),
                    i.condition,
                    i.report.faithful
                );
            }
            s
        }
        _ => json::to_string(&HuntJson {
            m_min: m.0.to_string(),
            m_max: m.1.to_string(),
            n_max: n_max.to_string(),
            shape: match filter {
                ShapeFilter::Prop7 => "prop7",
                ShapeFilter::General { .. } => "general",
            },
            discrepancies: found.iter().map(InstanceJson::from).collect(),
        }),
    };
    Ok(Output { text, code: EXIT_OK })
}
