//! Command-line front end for the jcloak obfuscation pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 lex/parse error, 3 verification
//! mismatch, 4 runtime error in the program under test. All diagnostics go
//! to standard error with line:column positions where available.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use jcloak::arraylib::ArrayKind;
use jcloak::consthide::{HidingConfig, YFactorTable};
use jcloak::rewriter::{self, Mode, ObfuscationConfig, RewriteError};
use jcloak::{exec_options_for, measure_source, run_source, sweep_reports, verify_source};
use jcloak::{minij, PipelineError};

#[derive(Parser)]
#[command(
    name = "jcloak",
    version,
    about = "Source-level obfuscator and interpreter for MiniJ programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rewrite a program, hiding integer constants behind F expressions
    Obfuscate(ObfuscateArgs),
    /// Interpret a MiniJ program, print its output, and report steps
    Run(RunArgs),
    /// Obfuscate, run both versions, and compare stdout byte for byte
    Verify(VerifyArgs),
    /// Report F-call depths, statement count, size, and steps
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Seed for hidden-expression generation (pass i uses seed+i)
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of rewrite passes applied to the program
    #[arg(long, default_value_t = 1)]
    iterations: u32,
    /// Container layout assumed by the emitted runtime source
    #[arg(long, value_enum, default_value_t = ArrayChoice::Split)]
    array: ArrayChoice,
    /// Backing parts for split containers (at least 2)
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Row width for fold and flatten containers (at least 1)
    #[arg(long, default_value_t = 16)]
    cols: usize,
    /// Comma-separated strictly increasing primes, smallest at least 3
    #[arg(long, value_parser = parse_table)]
    table: Option<YFactorTable>,
    /// Prepend the F runtime and container runtime source to the output
    #[arg(long)]
    emit_runtime: bool,
    /// Dialect of the emitted runtime source
    #[arg(long, value_enum, default_value_t = ModeChoice::Minij)]
    mode: ModeChoice,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArrayChoice {
    Split,
    Fold,
    Flatten,
}

impl From<ArrayChoice> for ArrayKind {
    fn from(choice: ArrayChoice) -> ArrayKind {
        match choice {
            ArrayChoice::Split => ArrayKind::Split,
            ArrayChoice::Fold => ArrayKind::Fold,
            ArrayChoice::Flatten => ArrayKind::Flatten,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeChoice {
    Minij,
    Textual,
}

impl From<ModeChoice> for Mode {
    fn from(choice: ModeChoice) -> Mode {
        match choice {
            ModeChoice::Minij => Mode::MiniJ,
            ModeChoice::Textual => Mode::Textual,
        }
    }
}

#[derive(Args)]
struct ObfuscateArgs {
    /// Source file to rewrite
    input: PathBuf,
    /// Write the obfuscated program here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the rewrite report JSON here instead of standard output
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct RunArgs {
    /// MiniJ source file to interpret
    input: PathBuf,
    /// Write the step report JSON here instead of standard output
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// MiniJ source file to check (--emit-runtime is implied)
    input: PathBuf,
    /// Also write the obfuscated program here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the verification report JSON here instead of standard output
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct MetricsArgs {
    /// MiniJ source file to measure
    input: PathBuf,
    /// Measure obfuscated variants over an inclusive iteration range,
    /// e.g. 1..5 (--emit-runtime is implied so outputs stay runnable)
    #[arg(long, value_parser = parse_sweep)]
    sweep: Option<SweepRange>,
    /// Write report lines here instead of standard output
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Clone, Copy, Debug)]
struct SweepRange {
    lo: u32,
    hi: u32,
}

fn parse_table(s: &str) -> Result<YFactorTable, String> {
    let mut primes = Vec::new();
    for part in s.split(',') {
        let value: i64 = part
            .trim()
            .parse()
            .map_err(|_| format!("'{}' is not an integer", part.trim()))?;
        primes.push(value);
    }
    YFactorTable::new(primes).map_err(|e| e.to_string())
}

fn parse_sweep(s: &str) -> Result<SweepRange, String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| "expected an inclusive range like 1..5".to_string())?;
    let lo: u32 = lo
        .trim()
        .parse()
        .map_err(|_| "range start must be an integer".to_string())?;
    let hi: u32 = hi
        .trim()
        .parse()
        .map_err(|_| "range end must be an integer".to_string())?;
    if lo < 1 {
        return Err("range start must be at least 1".to_string());
    }
    if hi < lo {
        return Err("range end must not precede the start".to_string());
    }
    Ok(SweepRange { lo, hi })
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Read(PathBuf, std::io::Error),
    Write(PathBuf, std::io::Error),
    Pipeline(PipelineError),
    Mismatch,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Read(path, e) => write!(f, "cannot read {}: {e}", path.display()),
            CliError::Write(path, e) => write!(f, "cannot write {}: {e}", path.display()),
            CliError::Pipeline(e) => write!(f, "{e}"),
            CliError::Mismatch => write!(f, "stdout differs between original and obfuscated run"),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> CliError {
        CliError::Pipeline(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Read(..) | CliError::Write(..) => 1,
            CliError::Mismatch => 3,
            CliError::Pipeline(e) => match e {
                PipelineError::MiniJ(_) | PipelineError::Metrics(_) => 2,
                PipelineError::Rewrite(rw) => match rw {
                    RewriteError::Frontend(_)
                    | RewriteError::LiteralTooLarge { .. }
                    | RewriteError::LiteralOverflow { .. } => 2,
                    RewriteError::Hide(_) | RewriteError::ZeroIterations => 1,
                },
                PipelineError::Runtime { .. } => 4,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Obfuscate(args) => obfuscate(args),
        Command::Run(args) => run(args),
        Command::Verify(args) => verify(args),
        Command::Metrics(args) => metrics(args),
    }
}

fn build_config(c: &ConfigArgs) -> Result<ObfuscationConfig, CliError> {
    if c.iterations == 0 {
        return Err(CliError::Usage("iterations must be at least 1".to_string()));
    }
    if c.k < 2 {
        return Err(CliError::Usage("k must be at least 2".to_string()));
    }
    if c.cols < 1 {
        return Err(CliError::Usage("cols must be at least 1".to_string()));
    }
    let table = c.table.clone().unwrap_or_default();
    Ok(ObfuscationConfig {
        hiding: HidingConfig::new(table, c.seed),
        iterations: c.iterations,
        array_kind: c.array.into(),
        k: c.k,
        cols: c.cols,
        emit_runtime: c.emit_runtime,
        mode: c.mode.into(),
    })
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Read(path.clone(), e))
}

/// Writes to the file when a path is given, otherwise to standard output.
fn write_out(target: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match target {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Write(path.clone(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_report_line(target: Option<&PathBuf>, line: &str) -> Result<(), CliError> {
    write_out(target, &format!("{line}\n"))
}

fn obfuscate(args: ObfuscateArgs) -> Result<(), CliError> {
    let cfg = build_config(&args.config)?;
    let source = read_input(&args.input)?;
    let (output, report) = rewriter::obfuscate_program(&source, &cfg)
        .map_err(|e| CliError::Pipeline(PipelineError::Rewrite(e)))?;
    write_out(args.out.as_ref(), &output)?;
    let line = serde_json::to_string(&report).expect("report serializes");
    write_report_line(args.report.as_ref(), &line)
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let cfg = build_config(&args.config)?;
    let source = read_input(&args.input)?;
    let opts = exec_options_for(&cfg);
    let result = run_source(&source, &opts)
        .map_err(|e| CliError::Pipeline(PipelineError::MiniJ(e)))?;
    print!("{}", result.stdout);
    if let minij::ExecStatus::RuntimeError { pos, kind } = result.status {
        return Err(CliError::Pipeline(PipelineError::Runtime {
            which: "interpreted",
            line: pos.line,
            column: pos.column,
            kind,
        }));
    }
    let line = serde_json::json!({ "steps": result.steps });
    write_report_line(args.report.as_ref(), &line.to_string())
}

fn verify(args: VerifyArgs) -> Result<(), CliError> {
    let mut cfg = build_config(&args.config)?;
    // The obfuscated program must be able to resolve F to run at all.
    cfg.emit_runtime = true;
    let source = read_input(&args.input)?;
    let outcome = verify_source(&source, &cfg)?;
    if let Some(out) = args.out.as_ref() {
        write_out(Some(out), &outcome.obfuscated_source)?;
    }
    let line = serde_json::json!({
        "cost": outcome.cost,
        "rewrite": outcome.report,
    });
    write_report_line(args.report.as_ref(), &line.to_string())?;
    if outcome.matched() {
        Ok(())
    } else {
        Err(CliError::Mismatch)
    }
}

fn metrics(args: MetricsArgs) -> Result<(), CliError> {
    let mut cfg = build_config(&args.config)?;
    let source = read_input(&args.input)?;
    let lines = match args.sweep {
        None => {
            let opts = exec_options_for(&cfg);
            vec![measure_source(&source, 0, &opts)?.to_json_line()]
        }
        Some(range) => {
            // Sweep outputs are interpreted to count steps, so they need the
            // runtime prelude regardless of the flag.
            cfg.emit_runtime = true;
            sweep_reports(&source, &cfg, range.lo..=range.hi)?
                .iter()
                .map(|r| r.to_json_line())
                .collect()
        }
    };
    write_out(
        args.report.as_ref(),
        &lines
            .iter()
            .map(|l| format!("{l}\n"))
            .collect::<String>(),
    )
}
