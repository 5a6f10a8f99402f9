//! The `tripleseq` command line. Each subcommand is a thin adapter over the
//! library; batch mode runs a manifest of subcommands and writes a TSV summary.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;

use crate::census::{census_exact, census_sample_parallel, DEFAULT_CAP};
use crate::design::{Sequencing, TripleSystem, Verdict};
use crate::format::{self, load_design, load_sequencing, store_design_with_comments, store_sequencing};
use crate::generators;
use crate::semiseq::is_w_semi;
use crate::sequencer::{
    exhaustive_search, greedy_3good, greedy_4good, verify_ell_good, ExhaustiveOutcome, GreedyPolicy, SearchOptions,
    SequencerError, ValueOrder,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_NONEXISTENT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INSUFFICIENT_ORDER: i32 = 4;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_IO: i32 = 74;

const AFTER_HELP: &str = "\
EXIT CODES: 0 success/good, 1 violation (verify), 2 no sequencing exists,
3 search budget exhausted, 4 order too small for the 4-good construction,
64 usage error, 65 bad input data, 74 I/O error.";

#[derive(Parser, Debug)]
#[command(name = "tripleseq", version, about = "Steiner triple systems and l-good sequencings",
    long_about = None, after_long_help = format!("{}\n\n{AFTER_HELP}", format::GRAMMAR))]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a design file
    Gen(GenArgs),
    /// Find an l-good sequencing of a design
    Seq(SeqArgs),
    /// Check a sequencing against a design
    Verify(VerifyArgs),
    /// Count forbidden permutations, exactly or by sampling
    Count(CountArgs),
    /// Run a manifest of subcommands, one per line, and write a TSV summary
    Batch(BatchArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(subcommand)]
    pub spec: GenSpec,
    /// Output design file (default: stdout)
    #[arg(short, long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum GenSpec {
    /// Cyclic STS(7)
    Fano,
    /// Bose STS(6n+3)
    Bose { n: usize },
    /// Skolem STS(6n+1)
    Skolem { n: usize },
    /// Seeded random greedy packing
    RandomPsts { v: usize, blocks: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Greedy,
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Lex,
    Random,
}

#[derive(Args, Debug)]
pub struct SeqArgs {
    /// Design file
    pub design: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub ell: usize,
    #[arg(long, value_enum, default_value_t = Method::Greedy)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = Policy::Lex)]
    pub policy: Policy,
    /// Seed for `--policy random`
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Node limit for exhaustive search
    #[arg(long)]
    pub budget: Option<u64>,
    /// Output sequencing file (default: stdout)
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("check").required(true).multiple(true).args(["ell", "w_semi"]))]
pub struct VerifyArgs {
    pub design: PathBuf,
    pub sequencing: PathBuf,
    /// Require that no N consecutive points contain a block
    #[arg(long)]
    pub ell: Option<usize>,
    /// Require that no t <= N consecutive points (t a multiple of 3) split into blocks
    #[arg(long = "w-semi")]
    pub w_semi: Option<usize>,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("mode").required(true).args(["exact", "samples"]))]
pub struct CountArgs {
    pub design: PathBuf,
    /// Enumerate all v! permutations
    #[arg(long)]
    pub exact: bool,
    /// Largest v allowed with --exact
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    /// Number of random permutations to sample
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 3)]
    pub ell: usize,
}

#[derive(Args, Debug)]
pub struct BatchArgs {
    /// Manifest: one subcommand per line, `#` comments allowed
    pub manifest: PathBuf,
    /// Summary TSV (default: stdout)
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Lines run concurrently; only safe when lines do not depend on each other's files
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Append each line's text output here, in manifest order
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

/// One row of a batch summary.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub instance: String,
    pub v: Option<usize>,
    pub method: String,
    pub ell: Option<usize>,
    pub outcome: String,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub code: i32,
    pub summary: Summary,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn write_or_print(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => out
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

pub fn read_design(path: &Path) -> Result<TripleSystem, CliError> {
    load_design(&read(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn read_sequencing(path: &Path) -> Result<Sequencing, CliError> {
    load_sequencing(&read(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Design produced by a `gen` spec, with its file text.
pub fn generate(spec: &GenSpec) -> (TripleSystem, String) {
    match spec {
        GenSpec::Fano => {
            let s = generators::fano();
            let text = store_design_with_comments(&s, &[("generator", "fano".into())]);
            (s, text)
        }
        GenSpec::Bose { n } => {
            let s = generators::bose(*n);
            let text = store_design_with_comments(&s, &[("generator", format!("bose n={n}"))]);
            (s, text)
        }
        GenSpec::Skolem { n } => {
            let s = generators::skolem(*n);
            let text = store_design_with_comments(&s, &[("generator", format!("skolem n={n}"))]);
            (s, text)
        }
        GenSpec::RandomPsts { v, blocks, seed } => {
            let p = generators::random_psts(*v, *blocks, *seed);
            let text = store_design_with_comments(
                &p.system,
                &[
                    ("generator", "random-psts".into()),
                    ("seed", seed.to_string()),
                    ("target", p.target.to_string()),
                    ("achieved", p.achieved.to_string()),
                ],
            );
            (p.system, text)
        }
    }
}

pub fn cmd_gen(args: &GenArgs, out: &mut dyn Write, log: &mut dyn Write) -> Result<Outcome, CliError> {
    if matches!(args.spec, GenSpec::Bose { n: 0 } | GenSpec::Skolem { n: 0 }) {
        return Err(CliError::Usage("n must be at least 1".into()));
    }
    if let GenSpec::RandomPsts { v, blocks, .. } = args.spec {
        let max = v * v.saturating_sub(1) / 6;
        if v == 0 || blocks > max {
            return Err(CliError::Usage(format!("need v >= 1 and blocks <= {max}")));
        }
    }
    let (system, text) = generate(&args.spec);
    write_or_print(args.out.as_deref(), &text, out)?;
    let (instance, seed, outcome) = match &args.spec {
        GenSpec::Fano => ("fano".to_string(), None, "ok".to_string()),
        GenSpec::Bose { n } => (format!("bose {n}"), None, "ok".to_string()),
        GenSpec::Skolem { n } => (format!("skolem {n}"), None, "ok".to_string()),
        GenSpec::RandomPsts { v, blocks, seed } => (
            format!("random-psts {v} {blocks}"),
            Some(*seed),
            format!("ok achieved={}", system.blocks().len()),
        ),
    };
    let _ = writeln!(log, "{} {} with {} blocks ({outcome})", system.kind(), system.v(), system.blocks().len());
    Ok(Outcome {
        code: EXIT_OK,
        summary: Summary { instance, v: Some(system.v()), method: "gen".into(), ell: None, outcome, seed },
    })
}

/// The library call behind `seq`; the sequencing (if any) and the exit code.
pub fn run_seq(system: &TripleSystem, args: &SeqArgs) -> Result<(Option<Sequencing>, i32, String), CliError> {
    let policy = match args.policy {
        Policy::Lex => GreedyPolicy::LexSmallest,
        Policy::Random => GreedyPolicy::SeededRandom(args.seed),
    };
    let seq_err = |e: SequencerError| match e {
        SequencerError::EllOutOfRange { .. } | SequencerError::OrderTooSmall { .. } | SequencerError::NotSts => {
            CliError::Usage(e.to_string())
        }
        e => CliError::Data(e.to_string()),
    };
    match args.method {
        Method::Greedy => {
            let result = match args.ell {
                3 => greedy_3good(system, policy).map(|s| (s, String::new())),
                4 => greedy_4good(system, policy)
                    .map(|run| {
                        let note = format!(" m={} kappa={}", run.plan.m(), run.endgame.kappa);
                        (run.sequencing, note)
                    }),
                ell => return Err(CliError::Usage(format!("greedy construction exists for ell 3 and 4, not {ell}"))),
            };
            match result {
                Ok((seq, note)) => Ok((Some(seq), EXIT_OK, format!("found{note}"))),
                Err(SequencerError::InsufficientOrder { .. }) => {
                    Ok((None, EXIT_INSUFFICIENT_ORDER, "insufficient-order".into()))
                }
                Err(e) => Err(seq_err(e)),
            }
        }
        Method::Exhaustive => {
            let order = match args.policy {
                Policy::Lex => ValueOrder::Lex,
                Policy::Random => ValueOrder::Shuffled(args.seed),
            };
            let outcome = exhaustive_search(system, args.ell, SearchOptions { budget: args.budget, order })
                .map_err(seq_err)?;
            Ok(match outcome {
                ExhaustiveOutcome::Found { sequencing, nodes } => {
                    (Some(sequencing), EXIT_OK, format!("found nodes={nodes}"))
                }
                ExhaustiveOutcome::NoSequencing { nodes } => (None, EXIT_NONEXISTENT, format!("none nodes={nodes}")),
                ExhaustiveOutcome::BudgetExhausted { nodes } => (None, EXIT_BUDGET, format!("budget nodes={nodes}")),
            })
        }
    }
}

pub fn cmd_seq(args: &SeqArgs, out: &mut dyn Write, log: &mut dyn Write) -> Result<Outcome, CliError> {
    let system = read_design(&args.design)?;
    let (seq, code, outcome) = run_seq(&system, args)?;
    if let Some(seq) = &seq {
        write_or_print(args.out.as_deref(), &store_sequencing(seq), out)?;
    }
    let _ = writeln!(log, "{}: {outcome}", args.design.display());
    let method = match args.method {
        Method::Greedy => format!("greedy-{}", if args.policy == Policy::Lex { "lex" } else { "random" }),
        Method::Exhaustive => format!("exhaustive-{}", if args.policy == Policy::Lex { "lex" } else { "random" }),
    };
    Ok(Outcome {
        code,
        summary: Summary {
            instance: args.design.display().to_string(),
            v: Some(system.v()),
            method,
            ell: Some(args.ell),
            outcome,
            seed: (args.policy == Policy::Random).then_some(args.seed),
        },
    })
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let system = read_design(&args.design)?;
    system.ensure_valid().map_err(|e| CliError::Data(format!("{}: {e}", args.design.display())))?;
    let seq = read_sequencing(&args.sequencing)?;
    if seq.len() != system.v() {
        return Err(CliError::Data(format!(
            "{} has {} points, design has {}",
            args.sequencing.display(),
            seq.len(),
            system.v()
        )));
    }
    let mut code = EXIT_OK;
    let mut outcomes = Vec::new();
    let mut text = String::new();
    if let Some(ell) = args.ell {
        let verdict = verify_ell_good(&system, &seq, ell).map_err(|e| CliError::Usage(e.to_string()))?;
        report(&mut text, &mut code, &mut outcomes, &format!("ell={ell}"), &verdict);
    }
    if let Some(w) = args.w_semi {
        let verdict = is_w_semi(&system, &seq, w).map_err(|e| CliError::Usage(e.to_string()))?;
        report(&mut text, &mut code, &mut outcomes, &format!("w-semi={w}"), &verdict);
    }
    write_or_print(None, &text, out)?;
    Ok(Outcome {
        code,
        summary: Summary {
            instance: format!("{} {}", args.design.display(), args.sequencing.display()),
            v: Some(system.v()),
            method: "verify".into(),
            ell: args.ell,
            outcome: outcomes.join(","),
            seed: seq.meta.seed,
        },
    })
}

fn report(text: &mut String, code: &mut i32, outcomes: &mut Vec<String>, what: &str, verdict: &Verdict) {
    match verdict {
        Verdict::Good => {
            let _ = writeln!(text, "GOOD {what}");
            outcomes.push(format!("good {what}"));
        }
        Verdict::Violated(v) => {
            let _ = writeln!(text, "VIOLATION {what}: {v}");
            outcomes.push(format!("violation {what}"));
            *code = EXIT_VIOLATION;
        }
    }
}

pub fn cmd_count(args: &CountArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let system = read_design(&args.design)?;
    let report = if args.exact {
        census_exact(&system, args.ell, args.cap)
    } else {
        census_sample_parallel(&system, args.ell, args.samples.unwrap_or(0), args.seed, args.workers)
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let text = format!("{}\n[census]\n{}", report.to_text(), report.to_key_values());
    write_or_print(None, &text, out)?;
    let outcome = match report.good_count() {
        Some(g) => format!("exact forbidden={} good={g}", report.total_forbidden),
        None => format!(
            "sampled forbidden_freq={:.6} pooled={:.6}",
            report.forbidden_estimate().mean,
            match report.mode {
                crate::census::CensusMode::MonteCarlo { pooled, .. } => pooled.mean,
                crate::census::CensusMode::Exact => unreachable!(),
            }
        ),
    };
    Ok(Outcome {
        code: EXIT_OK,
        summary: Summary {
            instance: args.design.display().to_string(),
            v: Some(system.v()),
            method: if args.exact { "count-exact".into() } else { "count-sample".into() },
            ell: Some(args.ell),
            outcome,
            seed: (!args.exact).then_some(args.seed),
        },
    })
}

struct LineResult {
    line: usize,
    summary: Summary,
    code: i32,
    millis: u128,
    text: Vec<u8>,
}

fn run_line(line: usize, raw: &str) -> LineResult {
    let start = Instant::now();
    let mut text = Vec::new();
    let argv = std::iter::once("tripleseq").chain(raw.split_whitespace());
    let (summary, code) = match Cli::try_parse_from(argv) {
        Err(e) => (Summary { instance: raw.to_string(), outcome: format!("error: {}", first_line(&e.to_string())), ..Default::default() }, EXIT_USAGE),
        Ok(Cli { command: Command::Batch(_) }) => (
            Summary { instance: raw.to_string(), outcome: "error: nested batch".into(), ..Default::default() },
            EXIT_USAGE,
        ),
        Ok(cli) => {
            let mut log = Vec::new();
            let result = dispatch(&cli.command, &mut text, &mut log);
            text.extend(log);
            match result {
                Ok(o) => (o.summary, o.code),
                Err(e) => {
                    let _ = writeln!(text, "error: {e}");
                    (
                        Summary { instance: raw.to_string(), outcome: format!("error: {}", first_line(&e.to_string())), ..Default::default() },
                        e.exit_code(),
                    )
                }
            }
        }
    };
    LineResult { line, summary, code, millis: start.elapsed().as_millis(), text }
}

fn first_line(s: &str) -> String {
    s.lines().next().unwrap_or("").trim().to_string()
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(|| "-".to_string(), ToString::to_string)
}

pub const SUMMARY_HEADER: &str = "line\tinstance\tv\tmethod\tell\toutcome\texit\twall_ms\tseed";

pub fn cmd_batch(args: &BatchArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let manifest = read(&args.manifest)?;
    let lines: Vec<(usize, &str)> = manifest
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if args.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let results: Vec<LineResult> = if args.jobs == 1 {
        lines.iter().map(|&(n, l)| run_line(n, l)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.jobs)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        pool.install(|| lines.par_iter().map(|&(n, l)| run_line(n, l)).collect())
    };

    let mut tsv = String::from(SUMMARY_HEADER);
    tsv.push('\n');
    let mut errors = 0;
    let mut log_text = Vec::new();
    for r in &results {
        let s = &r.summary;
        let _ = writeln!(
            tsv,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.line,
            s.instance.replace('\t', " "),
            opt(&s.v),
            if s.method.is_empty() { "-" } else { &s.method },
            opt(&s.ell),
            s.outcome.replace('\t', " "),
            r.code,
            r.millis,
            opt(&s.seed)
        );
        errors += usize::from(r.code >= EXIT_USAGE);
        let _ = writeln!(log_text, "## line {}", r.line);
        log_text.extend_from_slice(&r.text);
    }
    if let Some(log) = &args.log {
        fs::write(log, log_text).map_err(|source| CliError::Io { path: log.display().to_string(), source })?;
    }
    write_or_print(args.out.as_deref(), &tsv, out)?;
    Ok(Outcome {
        code: if errors == 0 { EXIT_OK } else { EXIT_VIOLATION },
        summary: Summary {
            instance: args.manifest.display().to_string(),
            method: "batch".into(),
            outcome: format!("{} lines, {errors} errors", results.len()),
            ..Default::default()
        },
    })
}

fn dispatch(command: &Command, out: &mut dyn Write, log: &mut dyn Write) -> Result<Outcome, CliError> {
    match command {
        Command::Gen(a) => cmd_gen(a, out, log),
        Command::Seq(a) => cmd_seq(a, out, log),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Count(a) => cmd_count(a, out),
        Command::Batch(a) => cmd_batch(a, out),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut log = io::stderr();
    match dispatch(&cli.command, &mut out, &mut log) {
        Ok(o) => o.code,
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            e.exit_code()
        }
    }
}
