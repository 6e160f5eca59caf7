//! `loewner-lab`: certify or falsify operator inequalities from the shell.
//!
//! Exit codes: 0 success with no violations, 1 violations recorded (or a
//! replay that did not reproduce), 2 usage or configuration error,
//! 3 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use loewner_core::cdj::{corollary_majorization, theorem1_sandwich, CdjScales};
use loewner_core::entropy::{
    lemma4_bounds, lemma5_bounds, lemma6_bounds, lemma7_phi_of_tsallis_bounds, relative_operator_entropy,
    theorem2_sandwich, tsallis_relative_entropy, EntropyParams,
};
use loewner_core::funcspec::{Params, ScalarFunction};
use loewner_core::harness::{replay, run_suite_with_jobs, CounterexampleRecord, Scenario, SuiteConfig, SuiteReport};
use loewner_core::kantorovich::{kantorovich_f, kantorovich_r};
use loewner_core::loewner::LoewnerVerdict;
use loewner_core::phimap::PhiMap;
use loewner_core::sandwich::{build_sandwich, sandwich_at_degree};
use loewner_core::{Error, HermitianMatrix};

#[derive(Parser)]
#[command(name = "loewner-lab", version, about = "Operator-inequality certification on Hermitian matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a certified polynomial pair p_L <= f <= p_U on [m, M].
    Sandwich(SandwichArgs),
    /// Evaluate K(m, M, r) or K(m, M, f).
    Kantorovich(KantorovichArgs),
    /// Jensen-type bound chain for f(Phi(A)).
    Bound(BoundArgs),
    /// Tsallis / relative operator entropy and their bounds.
    Entropy(EntropyArgs),
    /// Run a seeded randomized suite.
    Verify(VerifyArgs),
    /// Re-run the trial behind a counterexample record.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct FunctionArgs {
    /// Catalog name (exp, log, sqrt, abs, identity, square, inverse,
    /// power(p), q_log(q), tsallis_dev(q), constant(c)) or an expression in x.
    #[arg(long = "f")]
    f: String,
    /// Named parameter for the expression, as name=value (repeatable).
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
}

impl FunctionArgs {
    fn build(&self) -> Result<ScalarFunction, Failure> {
        let params: Params = self.params.iter().cloned().collect();
        Ok(ScalarFunction::from_spec(&self.f, params)?)
    }
}

#[derive(Args)]
struct SandwichArgs {
    #[command(flatten)]
    function: FunctionArgs,
    #[arg(long, allow_negative_numbers = true)]
    m: f64,
    #[arg(long = "M", allow_negative_numbers = true)]
    big_m: f64,
    /// Target sup-gap; ignored when --degree is given.
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Use a fixed interpolation degree instead of a target accuracy.
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KantorovichArgs {
    #[arg(long, allow_negative_numbers = true)]
    m: f64,
    #[arg(long = "M", allow_negative_numbers = true)]
    big_m: f64,
    #[arg(long, conflicts_with = "f", required_unless_present = "f", allow_negative_numbers = true)]
    r: Option<f64>,
    #[arg(long = "f")]
    f: Option<String>,
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long = "A")]
    a: PathBuf,
    #[arg(long)]
    phi: PathBuf,
    #[command(flatten)]
    function: FunctionArgs,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    d: f64,
    #[arg(long, default_value_t = 1.0)]
    e: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the gap spectra of both verdicts as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EntropyOp {
    Tsallis,
    Relent,
    Lemma4,
    Lemma5,
    Lemma6,
    Lemma7,
    Theorem2,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(value_enum)]
    op: EntropyOp,
    #[arg(long = "A")]
    a: PathBuf,
    #[arg(long = "B")]
    b: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    #[arg(long, default_value_t = 2.0)]
    m: f64,
    #[arg(long = "M", default_value_t = 10.0)]
    big_m: f64,
    #[arg(long)]
    phi: Option<PathBuf>,
    /// Allow m < 2 or M < 5m; results are marked as outside the hypotheses.
    #[arg(long)]
    relax_hypotheses: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    scenario: Option<String>,
    /// JSON suite configuration; command-line flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the gap spectra of every trial as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// A counterexample record, or a suite report (see --which).
    record: PathBuf,
    /// Counterexample to replay when the file is a suite report.
    #[arg(long, default_value_t = 0)]
    which: usize,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Convergence { .. } | Error::ApproximationFailure { .. } => Failure::Numerical(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn parse_param(text: &str) -> Result<(String, f64), String> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got '{text}'"))?;
    let v: f64 = value.trim().parse().map_err(|_| format!("'{value}' is not a number"))?;
    Ok((name.trim().to_string(), v))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    match out {
        Some(p) => write_text(p, &text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn verdict_csv(pairs: &[(&str, &LoewnerVerdict)]) -> String {
    let mut s = String::from("verdict,k,gap\n");
    for (name, v) in pairs {
        for (k, g) in v.gap_spectrum.iter().enumerate() {
            s.push_str(&format!("{name},{k},{g:e}\n"));
        }
    }
    s
}

fn status(holds: bool) -> u8 {
    if holds {
        0
    } else {
        1
    }
}

fn run_sandwich(args: SandwichArgs) -> Result<u8, Failure> {
    let f = args.function.build()?;
    let pair = match args.degree {
        Some(d) => sandwich_at_degree(&f, args.m, args.big_m, d)?,
        None => build_sandwich(&f, args.m, args.big_m, args.epsilon)?,
    };
    emit(&pair, args.out.as_deref())?;
    Ok(0)
}

fn run_kantorovich(args: KantorovichArgs) -> Result<u8, Failure> {
    let value = match (&args.r, &args.f) {
        (Some(r), _) => {
            let k = kantorovich_r(args.m, args.big_m, *r)?;
            serde_json::json!({"m": args.m, "M": args.big_m, "r": r, "value": k})
        }
        (None, Some(spec)) => {
            let f = ScalarFunction::from_spec(spec, args.params.iter().cloned().collect())?;
            let k = kantorovich_f(args.m, args.big_m, &f)?;
            serde_json::json!({"m": args.m, "M": args.big_m, "f": f.describe(), "value": k.value, "argMax": k.arg_max})
        }
        (None, None) => return Err(Failure::Usage("one of --r or --f is required".into())),
    };
    emit(&value, None)?;
    Ok(0)
}

fn run_bound(args: BoundArgs) -> Result<u8, Failure> {
    let a: HermitianMatrix = read_json(&args.a)?;
    let phi: PhiMap = read_json(&args.phi)?;
    let f = args.function.build()?;
    let scales = CdjScales::new(args.c, args.d, args.e)?;
    let report = corollary_majorization(theorem1_sandwich(&phi, &f, &a, args.epsilon, scales)?)?;
    if let Some(csv) = &args.csv {
        write_text(csv, &verdict_csv(&[("lower", &report.verdict_lower), ("upper", &report.verdict_upper)]))?;
    }
    emit(&report, args.out.as_deref())?;
    Ok(status(report.holds()))
}

fn run_entropy(args: EntropyArgs) -> Result<u8, Failure> {
    let a: HermitianMatrix = read_json(&args.a)?;
    let b: HermitianMatrix = read_json(&args.b)?;
    let mut params = EntropyParams::new(args.q, args.m, args.big_m);
    params.relaxed = args.relax_hypotheses;
    let phi = || -> Result<PhiMap, Failure> {
        match &args.phi {
            Some(p) => read_json(p),
            None => Err(Failure::Usage("--phi is required for this operation".into())),
        }
    };
    let out = args.out.as_deref();
    let code = match args.op {
        EntropyOp::Tsallis => {
            emit(&tsallis_relative_entropy(&a, &b, args.q)?, out)?;
            0
        }
        EntropyOp::Relent => {
            emit(&relative_operator_entropy(&a, &b)?, out)?;
            0
        }
        EntropyOp::Lemma4 => {
            let r = lemma4_bounds(&a, &b, &params)?;
            emit(&r, out)?;
            status(r.holds())
        }
        EntropyOp::Lemma5 => {
            let r = lemma5_bounds(&a, &b, args.m, args.big_m, args.relax_hypotheses)?;
            emit(&r, out)?;
            status(r.holds())
        }
        EntropyOp::Lemma6 => {
            let r = lemma6_bounds(&a, &b, &params, &phi()?)?;
            emit(&r, out)?;
            status(r.holds())
        }
        EntropyOp::Lemma7 => {
            let r = lemma7_phi_of_tsallis_bounds(&a, &b, &params, &phi()?)?;
            emit(&r, out)?;
            status(r.holds())
        }
        EntropyOp::Theorem2 => {
            let r = theorem2_sandwich(&a, &b, &params, &phi()?)?;
            emit(&r, out)?;
            status(r.holds())
        }
    };
    Ok(code)
}

fn suite_config(args: &VerifyArgs) -> Result<SuiteConfig, Failure> {
    let scenario = match &args.scenario {
        Some(s) => Some(Scenario::parse(s).ok_or_else(|| Failure::Usage(format!("unknown scenario '{s}'")))?),
        None => None,
    };
    let mut config = match (&args.config, scenario) {
        (Some(path), _) => read_json::<SuiteConfig>(path)?,
        (None, Some(s)) => SuiteConfig::new(s, 0, 100),
        (None, None) => return Err(Failure::Usage("--scenario or --config is required".into())),
    };
    if let Some(s) = scenario {
        config.scenario = s;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    Ok(config)
}

fn suite_exit_code(report: &SuiteReport) -> u8 {
    if report.numerical_failure_count > 0 {
        3
    } else if report.violation_count > 0 {
        1
    } else {
        0
    }
}

fn run_verify(args: VerifyArgs) -> Result<u8, Failure> {
    let config = suite_config(&args)?;
    let report = run_suite_with_jobs(&config, args.jobs)?;
    if let Some(csv) = &args.csv {
        write_text(csv, &report.gap_spectra_csv())?;
    }
    emit(&report, args.out.as_deref())?;
    eprintln!(
        "{}: {} trials, {} violations, {} errors, {} numerical failures, {:.2}s",
        config.scenario.name(),
        report.trials.len(),
        report.violation_count,
        report.error_count,
        report.numerical_failure_count,
        report.wall_time_seconds
    );
    Ok(suite_exit_code(&report))
}

fn run_replay(args: ReplayArgs) -> Result<u8, Failure> {
    let value: serde_json::Value = read_json(&args.record)?;
    let record: CounterexampleRecord = if value.get("counterexamples").is_some() {
        let report: SuiteReport =
            serde_json::from_value(value).map_err(|e| Failure::Usage(format!("invalid suite report: {e}")))?;
        report
            .counterexamples
            .get(args.which)
            .cloned()
            .ok_or_else(|| Failure::Usage(format!("report has no counterexample #{}", args.which)))?
    } else {
        serde_json::from_value(value).map_err(|e| Failure::Usage(format!("invalid record: {e}")))?
    };
    let outcome = replay(&record)?;
    emit(&outcome, None)?;
    Ok(status(outcome.reproduced))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sandwich(a) => run_sandwich(a),
        Command::Kantorovich(a) => run_kantorovich(a),
        Command::Bound(a) => run_bound(a),
        Command::Entropy(a) => run_entropy(a),
        Command::Verify(a) => run_verify(a),
        Command::Replay(a) => run_replay(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
