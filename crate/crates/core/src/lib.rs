//! Source-level obfuscation for MiniJ, a Java-like mini-language.
//!
//! The pipeline hides integer constants behind chained-modulo `F(A,k)`
//! expressions, restructures arrays through index bijections (split, fold,
//! flatten), and rewrites programs statement by statement. An embedded
//! interpreter executes original and obfuscated programs for differential
//! verification, and a metrics layer reports the potency/cost trade-off.

pub mod arraylib;
pub mod consthide;
pub mod frontend;
pub mod metrics;
pub mod minij;
pub mod rewriter;

use thiserror::Error;

use metrics::{compare_runs, CostSummary, MetricsError, MetricsReport, RunMeasurement};
use minij::{ExecOptions, ExecResult, ExecStatus, MiniJError, RuntimeErrorKind};
use rewriter::{ObfuscationConfig, RewriteError, RewriteReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    MiniJ(#[from] MiniJError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{which} program: {line}:{column}: {kind}")]
    Runtime {
        which: &'static str,
        line: u32,
        column: u32,
        kind: RuntimeErrorKind,
    },
}

/// Interpreter options matching an obfuscation configuration, so original and
/// obfuscated programs see the same table and container layout.
pub fn exec_options_for(cfg: &ObfuscationConfig) -> ExecOptions {
    ExecOptions {
        table: cfg.hiding.table.clone(),
        split_k: cfg.k,
        fold_cols: cfg.cols,
        ..ExecOptions::default()
    }
}

/// Parses and interprets a program. The result carries stdout, the step
/// count, and the halt status; runtime failures are data, not `Err`.
pub fn run_source(source: &str, opts: &ExecOptions) -> Result<ExecResult, MiniJError> {
    let program = minij::parse_program(source)?;
    Ok(minij::execute(&program, opts))
}

fn completed(which: &'static str, result: ExecResult) -> Result<ExecResult, PipelineError> {
    match result.status {
        ExecStatus::Ok => Ok(result),
        ExecStatus::RuntimeError { pos, kind } => Err(PipelineError::Runtime {
            which,
            line: pos.line,
            column: pos.column,
            kind,
        }),
    }
}

/// Measures one program variant: F-call histogram, statement count, byte
/// size, and interpreter steps. `wall_time` is left unset so reports stay
/// byte-reproducible.
pub fn measure_source(
    source: &str,
    iteration: u32,
    opts: &ExecOptions,
) -> Result<MetricsReport, PipelineError> {
    let f_calls_by_depth = metrics::count_f_calls(source)?;
    let (_, _, statements) = frontend::analyze(source).map_err(MiniJError::from)?;
    let result = completed("measured", run_source(source, opts)?)?;
    Ok(MetricsReport {
        f_calls_by_depth,
        total_statements: statements.len(),
        byte_size: source.len(),
        steps: result.steps,
        wall_time: None,
        iteration,
    })
}

/// Everything `verify` learns from one differential run.
#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub obfuscated_source: String,
    pub report: RewriteReport,
    pub original: RunMeasurement,
    pub obfuscated: RunMeasurement,
    pub cost: CostSummary,
}

impl VerifyOutcome {
    /// True when both runs produced byte-identical stdout.
    pub fn matched(&self) -> bool {
        self.cost.stdout_equal
    }
}

/// Obfuscates `source` under `cfg`, interprets both versions with matching
/// options, and compares stdout byte for byte. Differential verification only
/// makes sense when the obfuscated program can resolve F, so callers
/// normally pass a config with `emit_runtime` enabled.
pub fn verify_source(
    source: &str,
    cfg: &ObfuscationConfig,
) -> Result<VerifyOutcome, PipelineError> {
    let opts = exec_options_for(cfg);
    let original_run = completed("original", run_source(source, &opts)?)?;
    let (obfuscated_source, report) = rewriter::obfuscate_program(source, cfg)?;
    let obfuscated_run = completed("obfuscated", run_source(&obfuscated_source, &opts)?)?;
    let original = RunMeasurement {
        byte_size: source.len(),
        steps: original_run.steps,
        stdout: original_run.stdout,
    };
    let obfuscated = RunMeasurement {
        byte_size: obfuscated_source.len(),
        steps: obfuscated_run.steps,
        stdout: obfuscated_run.stdout,
    };
    let cost = compare_runs(&original, &obfuscated);
    Ok(VerifyOutcome {
        obfuscated_source,
        report,
        original,
        obfuscated,
        cost,
    })
}

/// Obfuscates at each requested iteration count (always from the original
/// source) and measures every output. Reports come back in request order.
pub fn sweep_reports(
    source: &str,
    cfg: &ObfuscationConfig,
    iterations: impl IntoIterator<Item = u32>,
) -> Result<Vec<MetricsReport>, PipelineError> {
    let opts = exec_options_for(cfg);
    let mut reports = Vec::new();
    for n in iterations {
        let run_cfg = ObfuscationConfig {
            iterations: n,
            ..cfg.clone()
        };
        let (obfuscated, _) = rewriter::obfuscate_program(source, &run_cfg)?;
        reports.push(measure_source(&obfuscated, n, &opts)?);
    }
    Ok(reports)
}
