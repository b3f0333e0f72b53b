//! The `ineqlab` command line.
//!
//! Exit codes: `verify` returns 0 on pass, 2 on fail, 3 on hypothesis-refuted
//! and 4 on divergent or domain-error. `falsify` and `check-class` return 0
//! when nothing was refuted and 2 otherwise. Usage errors return 1.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use super::config::SweepConfig;
use super::report::{csv_header, fmt_real, reports_csv, to_canonical_json};
use super::sweep::run_sweep;
use super::validate_builtin_labels;
use crate::classcheck::{falsify, hypothesis_gate, ConvexityClass, Falsification, GateReport, Hypothesis};
use crate::error::{Error, Result};
use crate::funcmodel::{FunctionSpec, FAMILY_NAMES};
use crate::theorems::{verify, Status, TheoremId, TheoremParams, DEFAULT_BUDGET, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_REFUTED: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ineqlab", version, about = "Numerical checks of Hermite-Hadamard type inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gate and grade one inequality chain.
    Verify(VerifyArgs),
    /// Search for a violation of a convexity class.
    Falsify(FalsifyArgs),
    /// Check hypotheses for a function, or re-validate the built-in labels.
    CheckClass(CheckClassArgs),
    /// Run a sweep described by a config file.
    Sweep(SweepArgs),
    /// Print theorem ids, class ids and function families.
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Falsifier samples per class.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_parser = parse_with::<TheoremId>)]
    pub theorem: TheoremId,
    #[arg(long, value_parser = parse_with::<FunctionSpec>)]
    pub function: FunctionSpec,
    #[arg(long, value_parser = parse_with::<FunctionSpec>)]
    pub function2: Option<FunctionSpec>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = crate::quadrature::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e6)]
    pub max_evals: f64,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FalsifyArgs {
    #[arg(long, value_parser = parse_with::<ConvexityClass>)]
    pub class: ConvexityClass,
    #[arg(long, value_parser = parse_with::<FunctionSpec>)]
    pub function: FunctionSpec,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CheckClassArgs {
    /// Function to gate; without it the built-in labels are re-validated.
    #[arg(long, value_parser = parse_with::<FunctionSpec>)]
    pub function: Option<FunctionSpec>,
    /// Class the function must belong to (repeatable).
    #[arg(long, value_parser = parse_with::<ConvexityClass>)]
    pub class: Vec<ConvexityClass>,
    /// Also require the function to be nondecreasing.
    #[arg(long)]
    pub nondecreasing: bool,
    /// Points where `f(x) <= 1` is required (repeatable).
    #[arg(long = "at-most-one")]
    pub at_most_one: Vec<f64>,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep config file.
    pub config: PathBuf,
    /// Overrides the config's `out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print CSV instead of JSON when writing to stdout.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

fn parse_with<T: std::str::FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Serialize)]
struct FalsifyReport<'a> {
    class: &'a ConvexityClass,
    function: &'a FunctionSpec,
    samples: usize,
    seed: u64,
    result: &'a Falsification,
}

#[derive(Serialize)]
struct CheckReport<'a> {
    function: &'a FunctionSpec,
    samples: usize,
    seed: u64,
    passed: bool,
    gate: &'a GateReport,
}

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Pass => EXIT_OK,
        Status::Fail => EXIT_FAIL,
        Status::HypothesisRefuted => EXIT_REFUTED,
        Status::Divergent | Status::DomainError => EXIT_NUMERIC,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(stderr, "{text}") } else { write!(stdout, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Verify(args) => run_verify(args, stdout, stderr),
        Command::Falsify(args) => run_falsify(args, stdout, stderr),
        Command::CheckClass(args) => run_check_class(args, stdout, stderr),
        Command::Sweep(args) => run_sweep_cmd(args, stdout, stderr),
        Command::List => {
            run_list(stdout)?;
            Ok(EXIT_OK)
        }
    }
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, text)?;
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn run_verify(args: VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    if !(args.max_evals >= 1.0) {
        return Err(Error::InvalidParams(format!("--max-evals must be >= 1, got {}", args.max_evals)));
    }
    let mut params = TheoremParams::new(args.a, args.b)?
        .with_s(args.s)
        .with_pq(args.p, args.q)
        .with_tol(args.tol)
        .with_budget(args.search.samples, args.search.seed);
    params.alpha = args.alpha;
    params.max_evals = args.max_evals as usize;
    let report = verify(args.theorem, &args.function, args.function2.as_ref(), &params)?;

    let text = match args.output.format {
        Format::Json => to_canonical_json(&report)?,
        Format::Csv => reports_csv(std::slice::from_ref(&report))?,
    };
    emit(&text, args.output.out.as_deref(), stdout)?;
    let chain: Vec<String> = report.chain.iter().map(|c| format!("{:.6}", c.value)).collect();
    writeln!(
        stderr,
        "{} {}: {} [{}]{}",
        report.theorem,
        args.function,
        report.status,
        chain.join(" <= "),
        report.diagnostic.as_deref().map(|d| format!(" ({d})")).unwrap_or_default()
    )?;
    Ok(exit_code(report.status))
}

pub fn run_falsify(args: FalsifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let cls = args.class.validate()?;
    let result = falsify(&cls, &args.function, args.search.samples, args.search.seed);
    let text = match args.output.format {
        Format::Json => to_canonical_json(&FalsifyReport {
            class: &cls,
            function: &args.function,
            samples: args.search.samples,
            seed: args.search.seed,
            result: &result,
        })?,
        Format::Csv => falsify_csv(&cls, &args.function, &result)?,
    };
    emit(&text, args.output.out.as_deref(), stdout)?;
    match &result.worst {
        Some(v) => {
            writeln!(stderr, "{cls} violated by {}: margin {}", args.function, fmt_real(v.margin))?;
            Ok(EXIT_FAIL)
        }
        None => {
            writeln!(stderr, "{cls}: no violation in {} samples", result.evaluated)?;
            Ok(EXIT_OK)
        }
    }
}

fn falsify_csv(cls: &ConvexityClass, f: &FunctionSpec, r: &Falsification) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Io(format!("csv: {e}"));
    w.write_record(["class", "function", "evaluated", "skipped", "x", "y", "weight", "lhs", "rhs", "margin"])
        .map_err(err)?;
    let mut row = vec![cls.to_string(), f.to_string(), r.evaluated.to_string(), r.skipped.to_string()];
    match &r.worst {
        Some(v) => row.extend([v.point.x, v.point.y, v.point.weight, v.lhs, v.rhs, v.margin].map(fmt_real)),
        None => row.extend(std::iter::repeat_n(String::new(), 6)),
    }
    w.write_record(&row).map_err(err)?;
    let bytes = w.into_inner().map_err(|e| Error::Io(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn run_check_class(args: CheckClassArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let Some(f) = args.function else {
        let checks = validate_builtin_labels(args.search.samples, args.search.seed);
        let bad: Vec<_> = checks.iter().filter(|c| !c.confirmed).collect();
        emit(&to_canonical_json(&checks)?, args.output.out.as_deref(), stdout)?;
        for c in &bad {
            writeln!(stderr, "label not confirmed: {} {} (claimed {})", c.function, c.label, c.claimed)?;
        }
        writeln!(stderr, "{} of {} built-in labels confirmed", checks.len() - bad.len(), checks.len())?;
        return Ok(if bad.is_empty() { EXIT_OK } else { EXIT_FAIL });
    };
    let mut hyps: Vec<Hypothesis> = args
        .class
        .iter()
        .map(|c| c.validate().map(Hypothesis::Member))
        .collect::<Result<_>>()?;
    if args.nondecreasing {
        hyps.push(Hypothesis::Nondecreasing);
    }
    if !args.at_most_one.is_empty() {
        hyps.push(Hypothesis::AtMostOne(args.at_most_one.clone()));
    }
    if hyps.is_empty() {
        return Err(Error::InvalidParams("give at least one --class, --nondecreasing or --at-most-one".into()));
    }
    let gate = hypothesis_gate(&hyps, &f, args.search.samples, args.search.seed);
    let text = match args.output.format {
        Format::Json => to_canonical_json(&CheckReport {
            function: &f,
            samples: args.search.samples,
            seed: args.search.seed,
            passed: gate.passed(),
            gate: &gate,
        })?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let err = |e: csv::Error| Error::Io(format!("csv: {e}"));
            w.write_record(["function", "hypothesis", "passed", "margin"]).map_err(err)?;
            for c in &gate.checks {
                let margin = c.violation.as_ref().map(|v| fmt_real(v.margin)).unwrap_or_default();
                w.write_record([c.function.to_string(), c.hypothesis.clone(), c.passed.to_string(), margin])
                    .map_err(err)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
                .map_err(|e| Error::Io(e.to_string()))?
        }
    };
    emit(&text, args.output.out.as_deref(), stdout)?;
    for c in gate.checks.iter().filter(|c| !c.passed) {
        writeln!(stderr, "{}: {} refuted", c.function, c.hypothesis)?;
    }
    Ok(if gate.passed() { EXIT_OK } else { EXIT_FAIL })
}

pub fn run_sweep_cmd(args: SweepArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let cfg = SweepConfig::load(&args.config)?;
    let set = run_sweep(&cfg);
    let json_out = args.out.clone().or_else(|| cfg.out.clone());
    match (&json_out, args.format) {
        (None, Format::Csv) => emit(&set.to_csv()?, None, stdout)?,
        _ => emit(&set.to_json()?, json_out.as_deref(), stdout)?,
    }
    if let Some(csv_path) = &cfg.csv {
        emit(&set.to_csv()?, Some(csv_path), stdout)?;
    }
    let counts: Vec<String> = set.summary.counts.iter().map(|(s, n)| format!("{s}={n}")).collect();
    writeln!(stderr, "{} cells: {}", set.summary.total, counts.join(" "))?;
    Ok(EXIT_OK)
}

pub fn run_list(stdout: &mut dyn Write) -> Result<()> {
    writeln!(stdout, "theorems:")?;
    for id in TheoremId::ALL {
        writeln!(stdout, "  {id}")?;
    }
    writeln!(stdout, "classes:")?;
    for id in ConvexityClass::IDS {
        writeln!(stdout, "  {id}")?;
    }
    writeln!(stdout, "families:")?;
    for name in FAMILY_NAMES {
        writeln!(stdout, "  {name}")?;
    }
    writeln!(stdout, "csv columns: {}", csv_header().join(","))?;
    Ok(())
}
