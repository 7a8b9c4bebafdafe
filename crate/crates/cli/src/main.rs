#![allow(clippy::result_large_err)]

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use nme::continuation::{
    solve, verify_theorem_bounds, ContinuationConfig, OutcomeJson, SolveFailure, SolveOutcome, TamePolicy,
    TheoremReport,
};
use nme::tame::{check_tame_at, ConstantsProvenance, ConstantsSpec, ProblemConfig, TameCheckReport};
use nme::{BoundSeq, Element, ElementJson, GradedElement, Grading, Problem};

/// Path-following solver for `f(x) = y` on truncated graded spaces, with
/// certification of the tame bounds `‖x‖_n <= c_n ‖y‖_{n+d}`.
#[derive(Debug, Parser)]
#[command(name = "nme", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve `f(x) = y` by continuation and certify the result.
    Solve(RunArgs),
    /// Solve, then check the result against the problem's tame constants.
    Verify(RunArgs),
    /// Run the seeded property suites.
    Props(PropsArgs),
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Problem configuration file (JSON); the flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// identity, quadratic, smoothing or nonlinear_smoothing.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    mu: Option<f64>,
    /// Fourier degree.
    #[arg(long = "K")]
    k: Option<usize>,
    /// Highest norm level.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Grid oversampling factor.
    #[arg(long)]
    q: Option<usize>,
    /// Tame constants: comma-separated values (`inf` allowed) or `estimate`.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    /// Seed for sampled constants.
    #[arg(long, env = "NME_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Target: terms `sin:k:amp`, `cos:k:amp` or `const:amp` joined by `+`,
    /// or `@file.json` with `{"K": .., "a": [..], "b": [..]}`.
    #[arg(long, allow_hyphen_values = true)]
    y: String,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 0.125)]
    r0: f64,
    #[arg(long, default_value_t = 2f64.powi(-20))]
    rmin: f64,
    #[arg(long, default_value_t = 2.0)]
    growth: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: usize,
    /// Highest monitored level.
    #[arg(long, default_value_t = 0)]
    levels: usize,
    /// Trace CSV destination.
    #[arg(long)]
    out_trace: Option<PathBuf>,
    /// Report JSON destination; printed to stdout when absent.
    #[arg(long)]
    out_report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PropsArgs {
    #[arg(long, env = "NME_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_report: Option<PathBuf>,
}

/// Usage and IO problems exit with 1, mathematical failures with 2.
enum Failure {
    Usage(anyhow::Error),
    Math(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Props(args) => cmd_props(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Math(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}

fn problem_config(args: &ProblemArgs) -> anyhow::Result<ProblemConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ProblemConfig::from_json(&text)?
        }
        None => {
            let name = args.problem.as_deref().ok_or_else(|| anyhow!("--problem or --config is required"))?;
            ProblemConfig::named(name)
        }
    };
    if let Some(name) = &args.problem {
        cfg.problem = name.clone();
    }
    if let Some(mu) = args.mu {
        cfg.mu = mu;
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(q) = args.q {
        cfg.q = q;
    }
    if let Some(c) = &args.c {
        cfg.c = Some(parse_constants(c)?);
    }
    Ok(cfg)
}

fn parse_constants(text: &str) -> anyhow::Result<ConstantsSpec> {
    if text.trim() == "estimate" {
        return Ok(ConstantsSpec::Keyword("estimate".into()));
    }
    let values = text
        .split(',')
        .map(|v| match v.trim() {
            "inf" => Ok(f64::INFINITY),
            v => v.parse::<f64>().with_context(|| format!("bad tame constant {v:?}")),
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(ConstantsSpec::Values(BoundSeq::new(values)?))
}

fn build_problem(args: &ProblemArgs) -> anyhow::Result<Problem> {
    let cfg = problem_config(args)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    Ok(cfg.build::<f64, _>(&mut rng)?)
}

/// Parses the target mini-language or loads a coefficient file.
fn parse_target(spec: &Arc<Grading>, text: &str) -> anyhow::Result<Element> {
    if let Some(path) = text.strip_prefix('@') {
        let raw = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let json: ElementJson = serde_json::from_str(&raw).with_context(|| format!("parsing {path}"))?;
        return Ok(GradedElement::from_json(spec, &json)?);
    }
    let mut y = GradedElement::zero(spec);
    for term in split_terms(text) {
        let parts: Vec<&str> = term.trim().split(':').collect();
        let number = |s: &str| s.trim().parse::<f64>().with_context(|| format!("bad number {s:?} in {term:?}"));
        let mode = |s: &str| s.trim().parse::<usize>().with_context(|| format!("bad mode {s:?} in {term:?}"));
        let piece = match parts.as_slice() {
            ["sin", k, amp] => GradedElement::sin_mode(spec, mode(k)?, number(amp)?)?,
            ["cos", k, amp] => GradedElement::cos_mode(spec, mode(k)?, number(amp)?)?,
            ["const", amp] => GradedElement::constant(spec, number(amp)?),
            _ => bail!("bad target term {term:?}; expected sin:k:amp, cos:k:amp or const:amp"),
        };
        y = y.try_add(&piece)?;
    }
    Ok(y)
}

/// Splits on `+` only where a new term starts, so `1e+3` survives.
fn split_terms(text: &str) -> Vec<&str> {
    let mut terms = Vec::new();
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        if ch == '+' && text[i + 1..].trim_start().starts_with(|c: char| c.is_ascii_alphabetic()) {
            terms.push(&text[start..i]);
            start = i + 1;
        }
    }
    terms.push(&text[start..]);
    terms
}

fn continuation_config(args: &RunArgs, spec: &Grading) -> ContinuationConfig<f64> {
    let mut cfg = ContinuationConfig::new(args.eps, spec).with_r0(args.r0).with_monitored_levels(args.levels);
    cfg.r_min = args.rmin;
    cfg.growth = args.growth;
    cfg.max_steps = args.max_steps;
    cfg
}

fn write_output(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_output(path, &text)
}

fn write_trace(path: Option<&Path>, trace: &nme::Trace) -> anyhow::Result<()> {
    if let Some(path) = path {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        trace.write_csv(file).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Runs the solve and writes the trace; a solver error comes back as the
/// failure report.
fn run(
    args: &RunArgs,
    problem: &Problem,
    y: &Element,
    policy: TamePolicy,
) -> Result<SolveOutcome<f64>, (OutcomeJson, SolveFailure<f64>)> {
    let cfg = continuation_config(args, problem.spec()).with_tame_policy(policy);
    match solve(problem, y, &cfg) {
        Ok(outcome) => Ok(outcome),
        Err(failure) => Err((OutcomeJson::from_failure(problem, y, args.eps, &failure), failure)),
    }
}

fn setup(args: &RunArgs) -> anyhow::Result<(Problem, Element)> {
    let problem = build_problem(&args.problem)?;
    let y = parse_target(problem.spec(), &args.y)?;
    continuation_config(args, problem.spec()).validate(problem.spec())?;
    Ok((problem, y))
}

fn cmd_solve(args: &RunArgs) -> Result<(), Failure> {
    let (problem, y) = setup(args)?;
    match run(args, &problem, &y, TamePolicy::Auto) {
        Ok(outcome) => {
            write_trace(args.out_trace.as_deref(), &outcome.trace)?;
            write_json(args.out_report.as_deref(), &OutcomeJson::from_outcome(&problem, &y, &outcome))?;
            if outcome.is_certified() {
                Ok(())
            } else {
                Err(Failure::Math("solve finished but the result is not certified".into()))
            }
        }
        Err((report, failure)) => {
            write_trace(args.out_trace.as_deref(), &failure.trace)?;
            write_json(args.out_report.as_deref(), &report)?;
            Err(Failure::Math(format!("{}: {}", failure.error.kind(), failure.error)))
        }
    }
}

#[derive(Serialize)]
struct VerifyReport {
    outcome: OutcomeJson,
    theorem: Option<TheoremReport>,
    /// The tame estimate at the origin with `v = y`.
    tame_at_origin: Option<TameCheckReport<f64>>,
    pass: bool,
}

fn cmd_verify(args: &RunArgs) -> Result<(), Failure> {
    let (problem, y) = setup(args)?;
    // Violations are the point of the check, so the solve never aborts on them.
    let tame = check_tame_at(&problem, &GradedElement::zero(problem.spec()), &y, 1e-6).ok();
    let (outcome, theorem, trace) = match run(args, &problem, &y, TamePolicy::Record) {
        Ok(outcome) => {
            let theorem = verify_theorem_bounds(&outcome, &problem, &y, 1e-6).map_err(|e| Failure::Usage(e.into()))?;
            (OutcomeJson::from_outcome(&problem, &y, &outcome), Some(theorem), outcome.trace)
        }
        Err((report, failure)) => (report, None, failure.trace),
    };
    let lenient = matches!(problem.provenance(), ConstantsProvenance::Estimated { .. });
    let tame_ok = tame.as_ref().is_some_and(|t| t.pass) || lenient;
    let pass = theorem.as_ref().is_some_and(|t| t.pass) && tame_ok;
    write_trace(args.out_trace.as_deref(), &trace)?;
    let error = outcome.message.clone();
    write_json(args.out_report.as_deref(), &VerifyReport { outcome, theorem, tame_at_origin: tame, pass })?;
    match (pass, error) {
        (true, _) => Ok(()),
        (false, Some(msg)) => Err(Failure::Math(msg)),
        (false, None) => Err(Failure::Math("theorem bounds not verified".into())),
    }
}

fn cmd_props(args: &PropsArgs) -> Result<(), Failure> {
    let report = nme::properties::run_all(args.seed).map_err(|e| Failure::Usage(e.into()))?;
    write_json(args.out_report.as_deref(), &report)?;
    let failed: Vec<&str> = report.results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Math(format!("failed properties: {}", failed.join(", "))))
    }
}
