//! Command-line front end.
//!
//! Output goes to the supplied writer as JSON (default) or CSV. Exit codes:
//! 0 success, 1 usage error, 2 input-data error, 3 numeric-range error.

use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::chain::{self, ChainReport};
use crate::die::{MutationRule, Parity};
use crate::enumerate::{self, MAX_DEPTH};
use crate::error::Error;
use crate::montecarlo::{self, Execution};
use crate::rational::Ratio;
use crate::stats::{self, Alternative, SequentialConfig, TossSequence};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Parses `E`/`O` text (case-insensitive). Whitespace is ignored and `#`
/// starts a comment running to end of line.
pub fn parse_sequence(text: &str) -> Result<TossSequence, Error> {
    let mut tosses = Vec::new();
    let mut in_comment = false;
    let (mut line, mut column) = (1usize, 0usize);
    for (i, ch) in text.chars().enumerate() {
        column += 1;
        if ch == '\n' {
            in_comment = false;
            line += 1;
            column = 0;
            continue;
        }
        if in_comment || ch.is_whitespace() {
            continue;
        }
        match ch {
            '#' => in_comment = true,
            'E' | 'e' => tosses.push(Parity::Even),
            'O' | 'o' => tosses.push(Parity::Odd),
            other => {
                return Err(Error::InvalidSymbol {
                    symbol: other,
                    position: i + 1,
                    line,
                    column,
                })
            }
        }
    }
    Ok(TossSequence(tosses))
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Overflow
            | Error::DepthOutOfRange { .. }
            | Error::DegenerateProbability(_)
            | Error::SingularSystem => EXIT_NUMERIC,
            Error::InvalidRule(_) | Error::InvalidParameter(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    None,
    Copy,
    Increment,
}

impl From<RuleArg> for MutationRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::None => MutationRule::NoMutation,
            RuleArg::Copy => MutationRule::ParityCopy,
            RuleArg::Increment => MutationRule::Increment,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnumerateView {
    Paths,
    Imbalance,
    Configs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainView {
    Full,
    Verdict,
    Classes,
    Absorption,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlternativeArg {
    TwoSided,
    Greater,
    Less,
}

impl From<AlternativeArg> for Alternative {
    fn from(a: AlternativeArg) -> Self {
        match a {
            AlternativeArg::TwoSided => Alternative::TwoSided,
            AlternativeArg::Greater => Alternative::Greater,
            AlternativeArg::Less => Alternative::Less,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "parity-die", version, about = "Self-reinforcing parity die toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Mutation rule applied to the hidden face after each roll.
    #[arg(long, value_enum, default_value = "copy")]
    pub rule: RuleArg,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Three-roll exact probabilities next to the reference table.
    Table(Common),
    /// Exact path, even-count or configuration distributions.
    Enumerate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, value_enum, default_value = "paths")]
        view: EnumerateView,
    },
    /// Markov chain over die configurations.
    Chain {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "full")]
        report: ChainView,
    },
    /// Seeded simulation: one path, or a batch summary when --runs > 1.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        tosses: usize,
        #[arg(long, default_value_t = 1)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Dump each run as an E/O line instead of a summary.
        #[arg(long)]
        trace: bool,
        /// Run the batch on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Fairness test and sequential report over a toss sequence.
    Test {
        /// Sequence file; standard input when absent or `-`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "0.5")]
        p0: Ratio,
        #[arg(long, default_value_t = stats::DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = stats::DEFAULT_T_MIN)]
        t_min: usize,
        /// Same-parity run length that counts as a rejection.
        #[arg(long)]
        run_threshold: Option<u32>,
        #[arg(long, value_enum, default_value = "two-sided")]
        alternative: AlternativeArg,
        /// Divide alpha by the number of prefixes tested.
        #[arg(long)]
        bonferroni: bool,
        #[arg(long, default_value_t = stats::DEFAULT_T_MIN)]
        window: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// One of the three 100-toss orderings of 58 Even and 42 Odd.
    Scenario {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        id: u8,
        /// Print the bare E/O sequence.
        #[arg(long)]
        emit: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

type CliResult = Result<(), CliError>;

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Io(std::io::Error),
    Csv(csv::Error),
    Json(serde_json::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(e) => e.exit_code(),
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => EXIT_DATA,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Csv(e) => write!(f, "csv error: {e}"),
            CliError::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

/// Parses `args` (including the program name) and dispatches.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, stdin, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().from_writer(out)
}

fn ratio_cells(r: Ratio) -> [String; 3] {
    [r.numer().to_string(), r.denom().to_string(), r.to_f64().to_string()]
}

#[derive(Serialize)]
struct ExactEntry<K: Serialize> {
    #[serde(flatten)]
    key: K,
    numerator: i128,
    denominator: i128,
    decimal: f64,
}

impl<K: Serialize> ExactEntry<K> {
    fn new(key: K, r: Ratio) -> Self {
        ExactEntry {
            key,
            numerator: r.numer(),
            denominator: r.denom(),
            decimal: r.to_f64(),
        }
    }
}

#[derive(Serialize)]
struct SequenceKey {
    sequence: String,
}

#[derive(Serialize)]
struct EvenKey {
    even_count: usize,
}

#[derive(Serialize)]
struct ConfigKey {
    config: String,
}

#[derive(Serialize)]
struct DistributionOut<K: Serialize> {
    rule: MutationRule,
    depth: usize,
    view: &'static str,
    entries: Vec<ExactEntry<K>>,
}

fn dispatch(command: Command, stdin: &mut dyn Read, out: &mut dyn Write) -> CliResult {
    match command {
        Command::Table(common) => table(common, out),
        Command::Enumerate {
            common,
            depth,
            view,
        } => enumerate_cmd(common, depth, view, out),
        Command::Chain { common, report } => chain_cmd(common, report, out),
        Command::Simulate {
            common,
            tosses,
            runs,
            seed,
            trace,
            serial,
        } => simulate_cmd(common, tosses, runs, seed, trace, serial, out),
        Command::Test {
            input,
            p0,
            alpha,
            t_min,
            run_threshold,
            alternative,
            bonferroni,
            window,
            format,
        } => {
            let text = match input {
                Some(path) if path.as_os_str() != "-" => std::fs::read_to_string(path)?,
                _ => {
                    let mut s = String::new();
                    stdin.read_to_string(&mut s)?;
                    s
                }
            };
            let seq = parse_sequence(&text)?;
            if seq.is_empty() {
                return Err(Error::EmptySequence.into());
            }
            let config = SequentialConfig {
                p0,
                alpha,
                t_min,
                run_threshold,
                alternative: alternative.into(),
                bonferroni,
                window,
            };
            test_cmd(&seq, &config, format, out)
        }
        Command::Scenario { id, emit, format } => scenario_cmd(id, emit, format, out),
    }
}

fn table(common: Common, out: &mut dyn Write) -> CliResult {
    let audit = enumerate::table_audit(common.rule.into())?;
    match common.format {
        Format::Json => write_json(out, &audit),
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record([
                "sequence",
                "standard",
                "standard_reference",
                "nonstandard",
                "nonstandard_decimal",
                "nonstandard_reference",
                "status",
            ])?;
            for row in &audit.rows {
                let status = if row.standard_matches && row.nonstandard_matches {
                    "match"
                } else {
                    "MISMATCH"
                };
                w.write_record([
                    row.sequence.clone(),
                    row.standard.to_string(),
                    row.standard_reference.to_string(),
                    row.nonstandard.to_string(),
                    row.nonstandard.to_f64().to_string(),
                    row.nonstandard_reference.to_string(),
                    status.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn enumerate_cmd(common: Common, depth: usize, view: EnumerateView, out: &mut dyn Write) -> CliResult {
    let rule: MutationRule = common.rule.into();
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::DepthOutOfRange {
            depth,
            max: MAX_DEPTH,
        }
        .into());
    }
    match view {
        EnumerateView::Paths => {
            let d = enumerate::path_distribution(rule, depth)?;
            let entries = d
                .entries
                .iter()
                .map(|(k, &p)| ExactEntry::new(SequenceKey { sequence: k.clone() }, p))
                .collect();
            emit_distribution(common.format, "sequence", rule, depth, "paths", entries, |k| k.sequence.clone(), out)
        }
        EnumerateView::Imbalance => {
            let d = enumerate::imbalance_distribution(rule, depth)?;
            let entries = d
                .entries
                .iter()
                .map(|(&k, &p)| ExactEntry::new(EvenKey { even_count: k }, p))
                .collect();
            emit_distribution(common.format, "even_count", rule, depth, "imbalance", entries, |k| k.even_count.to_string(), out)
        }
        EnumerateView::Configs => {
            let d = enumerate::config_distribution(rule, depth)?;
            let entries = d
                .entries
                .iter()
                .map(|(k, &p)| ExactEntry::new(ConfigKey { config: k.to_string() }, p))
                .collect();
            emit_distribution(common.format, "config", rule, depth, "configs", entries, |k| k.config.clone(), out)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn emit_distribution<K: Serialize>(
    format: Format,
    key_name: &str,
    rule: MutationRule,
    depth: usize,
    view: &'static str,
    entries: Vec<ExactEntry<K>>,
    key: impl Fn(&K) -> String,
    out: &mut dyn Write,
) -> CliResult {
    match format {
        Format::Json => write_json(
            out,
            &DistributionOut {
                rule,
                depth,
                view,
                entries,
            },
        ),
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record([key_name, "numerator", "denominator", "decimal"])?;
            for e in &entries {
                w.write_record([
                    key(&e.key),
                    e.numerator.to_string(),
                    e.denominator.to_string(),
                    e.decimal.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct VerdictOut<'a> {
    rule: MutationRule,
    ergodic: bool,
    aperiodic: bool,
    witness: Option<(String, String)>,
    explanation: &'a str,
}

fn chain_cmd(common: Common, view: ChainView, out: &mut dyn Write) -> CliResult {
    let report: ChainReport = chain::analyze(common.rule.into())?;
    let rule = report.chain.rule;
    let verdict = VerdictOut {
        rule,
        ergodic: report.verdict.ergodic,
        aperiodic: report.verdict.aperiodic,
        witness: report
            .verdict
            .witness
            .map(|(a, b)| (a.to_string(), b.to_string())),
        explanation: &report.verdict.explanation,
    };
    match (common.format, view) {
        (Format::Json, ChainView::Full) => write_json(out, &report),
        (Format::Json, ChainView::Verdict) => write_json(out, &verdict),
        (Format::Json, ChainView::Classes) => write_json(out, &report.classification),
        (Format::Json, ChainView::Absorption) => write_json(out, &report.absorption),
        (Format::Csv, ChainView::Full) => {
            let mut w = csv_writer(out);
            w.write_record(["from", "to", "numerator", "denominator", "decimal"])?;
            for (i, row) in report.chain.matrix.iter().enumerate() {
                for (j, p) in row.iter().enumerate().filter(|(_, p)| !p.is_zero()) {
                    let [n, d, x] = ratio_cells(*p);
                    w.write_record([
                        report.chain.states[i].to_string(),
                        report.chain.states[j].to_string(),
                        n,
                        d,
                        x,
                    ])?;
                }
            }
            w.flush()?;
            Ok(())
        }
        (Format::Csv, ChainView::Verdict) => {
            let mut w = csv_writer(out);
            w.write_record(["rule", "ergodic", "aperiodic", "witness_from", "witness_to"])?;
            let (from, to) = verdict.witness.clone().unwrap_or_default();
            w.write_record([
                rule.to_string(),
                verdict.ergodic.to_string(),
                verdict.aperiodic.to_string(),
                from,
                to,
            ])?;
            w.flush()?;
            Ok(())
        }
        (Format::Csv, ChainView::Classes) => {
            let mut w = csv_writer(out);
            w.write_record(["class", "states", "kind", "closed", "absorbing", "period"])?;
            for (id, c) in report.classification.classes.iter().enumerate() {
                let states: Vec<String> = c.states.iter().map(|s| s.to_string()).collect();
                w.write_record([
                    id.to_string(),
                    states.join(" "),
                    c.kind.to_string(),
                    c.closed.to_string(),
                    c.absorbing.to_string(),
                    c.period.map(|p| p.to_string()).unwrap_or_default(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
        (Format::Csv, ChainView::Absorption) => {
            let mut w = csv_writer(out);
            w.write_record([
                "class",
                "states",
                "numerator",
                "denominator",
                "decimal",
                "expected_steps",
                "even_share",
            ])?;
            for c in &report.absorption.classes {
                let states: Vec<String> = c.states.iter().map(|s| s.to_string()).collect();
                let [n, d, x] = ratio_cells(c.probability);
                w.write_record([
                    c.class_id.to_string(),
                    states.join(" "),
                    n,
                    d,
                    x,
                    c.expected_steps.map(|e| e.to_string()).unwrap_or_default(),
                    c.even_share.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn simulate_cmd(
    common: Common,
    tosses: usize,
    runs: u64,
    seed: u64,
    trace: bool,
    serial: bool,
    out: &mut dyn Write,
) -> CliResult {
    let rule: MutationRule = common.rule.into();
    if runs == 0 {
        return Err(Error::InvalidParameter("--runs must be at least 1".into()).into());
    }
    if trace {
        for i in 0..runs {
            let s = if runs == 1 { seed } else { montecarlo::mix_seed(seed, i) };
            let run = montecarlo::simulate_path(rule, tosses, s);
            writeln!(out, "# run {i} rule {rule} seed {s}")?;
            writeln!(out, "{}", run.tosses)?;
        }
        return Ok(());
    }
    if runs == 1 {
        let run = montecarlo::simulate_path(rule, tosses, seed);
        return match common.format {
            Format::Json => write_json(out, &run),
            Format::Csv => {
                let mut w = csv_writer(out);
                w.write_record(["t", "outcome", "config"])?;
                w.write_record(["0".to_string(), String::new(), run.trajectory[0].to_string()])?;
                for (i, p) in run.tosses.iter().enumerate() {
                    w.write_record([(i + 1).to_string(), p.to_string(), run.trajectory[i + 1].to_string()])?;
                }
                w.flush()?;
                Ok(())
            }
        };
    }
    let execution = if serial { Execution::Serial } else { Execution::Parallel };
    let summary = montecarlo::batch_with(rule, tosses, runs, seed, execution)?;
    match common.format {
        Format::Json => write_json(out, &summary),
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["even_count", "runs", "frequency"])?;
            for (k, &v) in &summary.even_counts {
                w.write_record([
                    k.to_string(),
                    v.to_string(),
                    montecarlo::BatchSummary::frequency(v, runs).to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct TestOut {
    proportion: f64,
    test: stats::TestReport,
    sequential: stats::SequentialReport,
}

fn test_cmd(seq: &TossSequence, config: &SequentialConfig, format: Format, out: &mut dyn Write) -> CliResult {
    let test = stats::test_report(seq, config.p0, config.alpha, config.alternative)?;
    let sequential = stats::sequential_report(seq, config)?;
    match format {
        Format::Json => write_json(
            out,
            &TestOut {
                proportion: stats::proportion_after(seq)?,
                test,
                sequential,
            },
        ),
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["t", "even_count", "z", "flag"])?;
            for r in &sequential.records {
                w.write_record([
                    r.t.to_string(),
                    r.even_count.to_string(),
                    r.z.to_string(),
                    r.flagged.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct ScenarioOut {
    id: u8,
    n: usize,
    even_count: usize,
    proportion: f64,
    sequence: TossSequence,
}

fn scenario_cmd(id: u8, emit: bool, format: Format, out: &mut dyn Write) -> CliResult {
    let seq = stats::scenario(id)?;
    if emit {
        writeln!(out, "{seq}")?;
        return Ok(());
    }
    match format {
        Format::Json => write_json(
            out,
            &ScenarioOut {
                id,
                n: seq.len(),
                even_count: seq.even_count(),
                proportion: stats::proportion_after(&seq)?,
                sequence: seq,
            },
        ),
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["t", "outcome"])?;
            for (i, p) in seq.iter().enumerate() {
                w.write_record([(i + 1).to_string(), p.to_string()])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}
