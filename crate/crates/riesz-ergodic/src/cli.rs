//! Batch front end: `validate-weights`, `analyze`, and `converge`
//! subcommands over a TOML experiment config.
//!
//! Exit codes: 0 success, 1 config error, 2 numerical/structural failure,
//! 3 validation failure.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{ExperimentConfig, OperatorKind};
use crate::error::{Error, Result};
use crate::ergodic::{self, CondExpWitness, EstimateRow};
use crate::fixed_points;
use crate::matrix_core::spectral_norm;
use crate::weights::{LimitCheck, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "riesz-ergodic", version, about = "Weighted-mean ergodicity of Markov operators on matrix algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check regularity, Cesaro domination, and the P(n) condition of the
    /// configured weight family.
    ValidateWeights(CommonArgs),
    /// Markov, fixed-space, subalgebra, unique-ergodicity, complete
    /// positivity and conditional-expectation report for the operator.
    Analyze(CommonArgs),
    /// Riesz-mean convergence experiment with per-checkpoint CSV output.
    Converge(CommonArgs),
}

#[derive(Debug, Parser)]
pub struct CommonArgs {
    /// Experiment config file (TOML)
    #[arg(long)]
    pub config: PathBuf,
    /// Override run.seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override run.tolerance
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Suppress the report on stdout
    #[arg(long)]
    pub quiet: bool,
}

pub fn run(cli: &Cli) -> i32 {
    let (args, result) = match &cli.command {
        Command::ValidateWeights(args) => (args, cmd_validate_weights(args)),
        Command::Analyze(args) => (args, cmd_analyze(args)),
        Command::Converge(args) => (args, cmd_converge(args)),
    };
    let _ = args;
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err);
            exit_code_for(&err)
        }
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::Parse(_)
        | Error::InvalidWeights(_)
        | Error::InvalidStochastic(_)
        | Error::Io(_) => EXIT_CONFIG,
        Error::DimensionMismatch(_)
        | Error::NotAState(_)
        | Error::NotHermitian(_)
        | Error::SumNotDirect(_) => EXIT_NUMERICAL,
    }
}

fn load_config(args: &CommonArgs) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::from_file(&args.config)?;
    if let Some(seed) = args.seed {
        config.run.seed = seed;
    }
    if let Some(tol) = args.tolerance {
        if !(tol > 0.0) {
            return Err(Error::Config("--tolerance must be positive".into()));
        }
        config.run.tolerance = tol;
    }
    config.validate()?;
    Ok(config)
}

/// Write atomically: temp file in the target directory, then rename.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn emit_report(args: &CommonArgs, config: &ExperimentConfig, report: &str) -> Result<()> {
    if !args.quiet {
        print!("{}", report);
    }
    if let Some(path) = &config.output.report_path {
        write_atomic(path, report)?;
    }
    Ok(())
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn format_trace(check: &LimitCheck) -> String {
    check
        .trace
        .iter()
        .map(|(n, v)| format!("({}, {:.3e})", n, v))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_validate_weights(args: &CommonArgs) -> Result<i32> {
    let config = load_config(args)?;
    let w = config.build_weights()?;
    let horizon = config.run.n_max.max(10);
    let tol = config.run.limit_tol;

    let reg = w.check_regularity(horizon, tol);
    let dom = w.check_cesaro_domination(horizon.max(2));
    let pcond = w.check_p_condition(horizon, tol);

    let mut report = String::new();
    writeln!(report, "weight validation (horizon N = {}, tol = {:e})", horizon, tol).unwrap();
    writeln!(report, "regularity p_n/S_n -> 0:       {}", verdict_name(reg.verdict)).unwrap();
    writeln!(report, "  trace: {}", format_trace(&reg)).unwrap();
    writeln!(
        report,
        "cesaro domination (p non-increasing, n p_n/S_n <= C): {} (C = {:.6})",
        verdict_name(dom.verdict),
        dom.witness
    )
    .unwrap();
    if let Some(n) = dom.increase_at {
        writeln!(report, "  first increase at n = {}", n).unwrap();
    }
    writeln!(report, "P(n) -> 0:                     {}", verdict_name(pcond.verdict)).unwrap();
    writeln!(report, "  trace: {}", format_trace(&pcond)).unwrap();
    if w.was_extended() {
        writeln!(report, "note: explicit list extended by repeating its last entry").unwrap();
    }
    emit_report(args, &config, &report)?;

    let any_fail = [reg.verdict, dom.verdict, pcond.verdict]
        .iter()
        .any(|&v| v == Verdict::Fail);
    Ok(if any_fail { EXIT_VALIDATION } else { EXIT_OK })
}

fn cmd_analyze(args: &CommonArgs) -> Result<i32> {
    let config = load_config(args)?;
    let (s, pi) = config.build_operator()?;
    let tol = config.run.tolerance;
    let report_data = ergodic::unique_ergodicity_check(&s, tol, config.run.seed);
    let fixed = fixed_points::fixed_space(&s, tol);
    let subalgebra = fixed_points::is_subalgebra(&fixed, tol.max(1e-8))?;
    let cp_t = s.is_completely_positive(tol.max(1e-10))?;

    let mut report = String::new();
    writeln!(report, "operator on M_{}", s.dim()).unwrap();
    writeln!(
        report,
        "markov: unital = {} (residual {:.3e}), positivity violations {}/{} (worst eigenvalue {:.3e})",
        report_data.markov.unital,
        report_data.markov.unital_residual,
        report_data.markov.positivity_violations,
        report_data.markov.positivity_samples,
        report_data.markov.worst_negative_eigenvalue
    )
    .unwrap();
    writeln!(report, "dim fixed space = {}", report_data.dim_fixed).unwrap();
    writeln!(report, "fixed space is a subalgebra: {}", subalgebra.closed).unwrap();
    writeln!(
        report,
        "uniquely ergodic relative to the fixed space: {}",
        report_data.uniquely_ergodic_relative
    )
    .unwrap();
    writeln!(
        report,
        "intersection of fixed space and coboundary range: dim {}",
        report_data.intersection_dim
    )
    .unwrap();
    writeln!(report, "ergodic: {}", report_data.ergodic).unwrap();
    writeln!(report, "operator completely positive: {}", cp_t).unwrap();

    if let Some(e) = &report_data.projection {
        let cp_e = e.is_completely_positive(tol.max(1e-10))?;
        writeln!(report, "projection E_T completely positive: {}", cp_e).unwrap();
        let cond = ergodic::is_conditional_expectation(
            e,
            &fixed,
            config.run.samples,
            config.run.seed,
            tol.max(1e-8),
        )?;
        writeln!(report, "projection E_T is a conditional expectation: {}", cond.holds).unwrap();
        match cond.witness {
            Some(CondExpWitness::NotSubalgebra(..)) => {
                writeln!(report, "  witness: fixed-space product leaves the span").unwrap();
            }
            Some(CondExpWitness::Bimodule(_, _, _, res)) => {
                writeln!(report, "  witness: bimodule identity violated by {:.3e}", res).unwrap();
            }
            None => {}
        }
    } else {
        writeln!(report, "projection E_T: unavailable (sum not direct)").unwrap();
    }

    if let Some(pi) = &pi {
        let fix_pi = fixed_points::fix_stochastic(pi, tol);
        writeln!(report, "dim Fix(Pi) = {}", fix_pi.dimension()).unwrap();
        if config.operator.kind == OperatorKind::EntangledPsi {
            let lemma = fixed_points::verify_lemma_fixed(pi, tol.max(1e-8));
            writeln!(
                report,
                "fixed space equals diagonal embedding of Fix(Pi): {} (projector distance {:.3e})",
                lemma.holds, lemma.distance
            )
            .unwrap();
        }
    }

    emit_report(args, &config, &report)?;
    Ok(EXIT_OK)
}

fn format_sig17(v: f64) -> String {
    format!("{:.16e}", v)
}

fn csv_table(rows: &[EstimateRow]) -> String {
    let mut out = String::from("n,p_n,S_n,P_n,err,bound,ok\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            format_sig17(r.p_n),
            format_sig17(r.s_n),
            format_sig17(r.p_condition),
            format_sig17(r.err),
            format_sig17(r.bound),
            r.ok
        )
        .unwrap();
    }
    out
}

fn cmd_converge(args: &CommonArgs) -> Result<i32> {
    let config = load_config(args)?;
    let (s, _) = config.build_operator()?;
    let tol = config.run.tolerance;
    let analysis = ergodic::unique_ergodicity_check(&s, tol, config.run.seed);
    if !analysis.uniquely_ergodic_relative {
        eprintln!(
            "error: operator is not uniquely ergodic relative to its fixed space \
             (dim fixed = {}, intersection dim = {}); no projection to converge to",
            analysis.dim_fixed, analysis.intersection_dim
        );
        return Ok(EXIT_NUMERICAL);
    }

    let w = config.build_weights()?;
    let x = config.build_input(s.dim(), config.run.seed)?;
    let checkpoints = config.checkpoints()?;
    let rows = ergodic::verify_estimate(&s, &x, &w, &checkpoints, tol)?;

    if let Some(path) = &config.output.csv_path {
        write_atomic(path, &csv_table(&rows))?;
    }

    let max_ratio = rows
        .iter()
        .filter(|r| r.bound > 0.0)
        .map(|r| r.err / r.bound)
        .fold(0.0f64, f64::max);
    let first_small = rows.iter().find(|r| r.err <= 1e-6).map(|r| r.n);
    let all_ok = rows.iter().all(|r| r.ok);

    let mut report = String::new();
    writeln!(report, "convergence of Riesz means on M_{}", s.dim()).unwrap();
    writeln!(report, "input norm = {:.6e}", spectral_norm(&x)).unwrap();
    writeln!(report, "checkpoints: {}", rows.len()).unwrap();
    writeln!(report, "max err/bound = {:.6e}", max_ratio).unwrap();
    match first_small {
        Some(n) => writeln!(report, "first checkpoint with err <= 1e-6: n = {}", n).unwrap(),
        None => writeln!(report, "no checkpoint reached err <= 1e-6").unwrap(),
    }
    writeln!(report, "all checkpoints within the P(n) bound: {}", all_ok).unwrap();
    emit_report(args, &config, &report)?;

    Ok(if all_ok { EXIT_OK } else { EXIT_VALIDATION })
}
