//! `avgmdp` command-line harness: runs the value-iteration family on MDP
//! files, worst-case families or random instances, checks certificates, and
//! generates, solves and classifies instances.
//!
//! Exit codes: 0 success, 1 certificate violated, 2 invalid configuration,
//! 3 invalid MDP, 4 exact solver found no verified solution.

mod source;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use avgmdp::bounds::{k_anc, k_rx, lower_bound, trace_upper_bound, BoundInputs, Family};
use avgmdp::certify::{certify, CertConfig, CertKind, Instance};
use avgmdp::generate::{random_mdp, RandomKind};
use avgmdp::iterate::{run, Algorithm, IterationTrace};
use avgmdp::schedule::{NormalizationFn, Schedule};
use avgmdp::trace_io::{write_iterates_csv, write_metrics_csv, TraceRow};
use avgmdp::{classify, solve_modified_bellman, Error, MdpClass, SolutionPair};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use source::{load, CliResult, Failure, Loaded, SourceArgs, V0Spec};

#[derive(Debug, Parser)]
#[command(
    name = "avgmdp",
    version,
    about = "Average-reward MDP value iteration harness"
)]
struct Cli {
    /// Suppress diagnostics on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one algorithm and write its per-iteration metrics as CSV.
    Run(RunArgs),
    /// Check a certificate on one or more instances.
    Verify(VerifyArgs),
    /// Generate a random MDP file.
    Gen(GenArgs),
    /// Solve the modified Bellman equations exactly.
    Solve(SolveArgs),
    /// Classify an MDP as unichain, weakly communicating or multichain.
    Classify(ClassifyArgs),
    /// Run VI, Rx-VI and Anc-VI on a worst-case family against its lower bound.
    LowerBound(LowerBoundArgs),
}

#[derive(Debug, Args)]
struct StartArgs {
    /// Starting point: zero, const:<c>, file:<path> or random[:<seed>].
    #[arg(long, default_value = "zero")]
    v0: V0Spec,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    start: StartArgs,
    /// Algorithm: vi, rx-vi, anc-vi, rx-rvi or anc-rvi.
    #[arg(long, default_value = "anc-vi")]
    algo: Algorithm,
    /// Schedule: zero, anchor, const:<x> or file:<path>; defaults per algorithm.
    #[arg(long)]
    lambda: Option<String>,
    /// Normalization for relative variants: h:<i>, th:<i>, max, min or mid.
    #[arg(long)]
    f: Option<String>,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    /// Metrics CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the iterates `k,v_0,...` to this path.
    #[arg(long)]
    iterates: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    start: StartArgs,
    /// Certificate: anc-vi, rx-vi, vi-normalized, policy-error, lower-bound, coefficients or rvi.
    #[arg(long, default_value = "anc-vi")]
    cert: CertKind,
    /// Number of random instances (consecutive seeds).
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Schedule override: zero, anchor, const:<x> or file:<path>.
    #[arg(long)]
    lambda: Option<String>,
    /// Normalization for the relative certificate.
    #[arg(long, default_value = "h:0")]
    f: String,
    #[arg(long, default_value_t = 500)]
    iters: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Coefficient table size for the coefficients certificate.
    #[arg(long, default_value_t = 200)]
    k_max: usize,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// random_general, random_unichain or random_weakly_comm.
    #[arg(long, default_value = "random_general")]
    kind: RandomKind,
    #[arg(long, visible_alias = "states")]
    n: usize,
    #[arg(long, default_value_t = 2)]
    actions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    start: StartArgs,
    /// Schedule entering the burn-in constants.
    #[arg(long, default_value = "anchor")]
    lambda: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LowerBoundArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    start: StartArgs,
    /// Iterations; defaults to the last index the bound covers.
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Ctx {
    quiet: bool,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, v: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(v).expect("json value");
    text.push('\n');
    emit(out, &text)
}

/// `+inf` as the string "inf", finite values as numbers.
fn ext(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn class_name(c: MdpClass) -> &'static str {
    match c {
        MdpClass::Unichain => "unichain",
        MdpClass::WeaklyCommunicatingNotUnichain => "weakly_communicating",
        MdpClass::MultichainGeneral => "multichain",
    }
}

fn default_schedule(algo: Algorithm) -> Schedule {
    match algo {
        Algorithm::Vi => Schedule::Zero,
        Algorithm::RxVi | Algorithm::RxRvi => Schedule::Constant(0.5),
        Algorithm::AncVi | Algorithm::AncRvi => Schedule::Anchor,
    }
}

fn parse_schedule(spec: Option<&str>, fallback: Schedule) -> CliResult<Schedule> {
    Ok(match spec {
        Some(s) => Schedule::from_spec(s)?,
        None => fallback,
    })
}

/// Solution for metrics; `None` (with a note) when enumeration is too large.
fn solution_for(ctx: &Ctx, inst: &Loaded) -> CliResult<Option<SolutionPair>> {
    match inst.solution() {
        Ok(s) => Ok(Some(s)),
        Err(Failure { code: 2, message }) => {
            ctx.note(format!(
                "no ground truth, metric columns left empty: {message}"
            ));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn lower_bound_cell(inst: &Loaded, algo: Algorithm, k: usize, dist0: f64) -> Option<f64> {
    let n = inst.mdp.n_states();
    match (inst.family?, algo) {
        (Family::Unichain, Algorithm::Vi | Algorithm::RxVi | Algorithm::AncVi) if k <= n - 2 => {
            Some(lower_bound(k, dist0, Family::Unichain))
        }
        (Family::Multichain, Algorithm::Vi) if k >= 1 && k <= n - 2 => {
            Some(lower_bound(k - 1, dist0, Family::Multichain))
        }
        _ => None,
    }
}

fn cmd_run(ctx: &Ctx, args: &RunArgs) -> CliResult<u8> {
    let started = Instant::now();
    let schedule = parse_schedule(args.lambda.as_deref(), default_schedule(args.algo))?;
    let f = match (args.algo.is_relative(), &args.f) {
        (true, spec) => Some(NormalizationFn::from_spec(
            spec.as_deref().unwrap_or("h:0"),
        )?),
        (false, Some(_)) => {
            return Err(Failure::config(format!(
                "--f does not apply to {}",
                args.algo
            )))
        }
        (false, None) => None,
    };
    let inst = load(&args.source, &args.start.v0, 1)?.remove(0);
    let m = &inst.mdp;
    let solution = solution_for(ctx, &inst)?;
    let class = match classify(m) {
        Ok(c) => Some(c),
        Err(Error::TooManyPolicies { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let mut trace: IterationTrace = run(m, args.algo, &inst.v0, &schedule, f, args.iters)?;
    let inputs = match &solution {
        Some(sol) => {
            trace.attach_metrics(m, sol)?;
            Some(BoundInputs::from_instance(
                m,
                &inst.v0,
                sol,
                schedule.clone(),
            )?)
        }
        None => None,
    };
    let rows: Vec<TraceRow> = trace
        .records
        .iter()
        .map(|rec| {
            let mut row = TraceRow::from_record(rec);
            if let Some(b) = &inputs {
                row.upper_bound = class.and_then(|c| trace_upper_bound(args.algo, rec.k, b, c));
                row.lower_bound = lower_bound_cell(&inst, args.algo, rec.k, b.dist0);
            }
            row
        })
        .collect();
    emit(args.out.as_deref(), &write_metrics_csv(&rows))?;
    if let Some(path) = &args.iterates {
        emit(Some(path), &write_iterates_csv(&trace))?;
    }
    let last = rows.last().expect("k = 0 row");
    let summary = json!({
        "instance": inst.label,
        "algorithm": args.algo.name(),
        "schedule": schedule.to_string(),
        "normalization": f.map(|f| f.to_string()),
        "iterations": args.iters,
        "n_states": m.n_states(),
        "n_actions": m.n_actions(),
        "class": class.map(class_name),
        "epsilon": inputs.as_ref().map(|b| ext(b.eps)),
        "dist0": inputs.as_ref().map(|b| b.dist0),
        "k_rx": inputs.as_ref().map(|b| ext(k_rx(b))),
        "k_anc": inputs.as_ref().map(|b| ext(k_anc(b))),
        "final": {
            "k": last.k,
            "f_value": last.f_value,
            "bellman_sup_err": last.bellman_sup_err,
            "bellman_span": last.bellman_span,
            "normalized_err": last.normalized_err,
            "policy_err": last.policy_err,
            "upper_bound": last.upper_bound,
        },
        "wall_time_s": started.elapsed().as_secs_f64(),
    });
    if args.out.is_some() {
        emit_json(None, &summary)?;
    } else if !ctx.quiet {
        eprintln!(
            "{}",
            serde_json::to_string_pretty(&summary).expect("json value")
        );
    }
    Ok(0)
}

fn cmd_verify(ctx: &Ctx, args: &VerifyArgs) -> CliResult<u8> {
    let src = &args.source;
    let has_source = src.mdp.is_some() || src.family.is_some() || src.random.is_some();
    let loaded = if has_source || args.cert.needs_instances() {
        load(src, &args.start.v0, args.count)?
    } else {
        Vec::new()
    };
    let mut instances = Vec::with_capacity(loaded.len());
    for inst in loaded {
        let solution = inst.solution()?;
        instances.push(Instance {
            label: inst.label,
            mdp: inst.mdp,
            solution,
            v0: inst.v0,
            family: inst.family,
        });
    }
    let cfg = CertConfig {
        schedule: args
            .lambda
            .as_deref()
            .map(Schedule::from_spec)
            .transpose()?,
        normalization: NormalizationFn::from_spec(&args.f)?,
        iters: args.iters,
        tol: args.tol,
        k_max: args.k_max,
    };
    let cert = certify(args.cert, &instances, &cfg)?;
    let report = serde_json::to_value(&cert).expect("serialisable report");
    emit_json(args.out.as_deref(), &report)?;
    if cert.pass {
        ctx.note(format!("certificate {}: pass", cert.certificate));
        return Ok(0);
    }
    for ineq in cert.inequalities.iter().filter(|r| !r.pass) {
        let first = ineq.violations.first().map_or(String::new(), |v| {
            format!(
                "; first at {} k={}: {:.6e} > {:.6e}",
                v.instance, v.k, v.lhs, v.rhs
            )
        });
        ctx.note(format!(
            "violated: {} ({} of {} checks){first}",
            ineq.name, ineq.violation_count, ineq.checked
        ));
    }
    Ok(1)
}

fn cmd_gen(args: &GenArgs) -> CliResult<u8> {
    let m = random_mdp(args.kind, args.n, args.actions, args.seed)?;
    let mut text = m.to_file().to_json();
    text.push('\n');
    emit(args.out.as_deref(), &text)?;
    Ok(0)
}

fn cmd_solve(args: &SolveArgs) -> CliResult<u8> {
    let schedule = Schedule::from_spec(&args.lambda)?;
    let inst = load(&args.source, &args.start.v0, 1)?.remove(0);
    let m = &inst.mdp;
    let sol = solve_modified_bellman(m)?;
    let class = classify(m)?;
    let b = BoundInputs::from_instance(m, &inst.v0, &sol, schedule)?;
    let out = json!({
        "instance": inst.label,
        "gain": sol.gain.as_slice(),
        "bias": sol.bias.as_slice(),
        "policy": sol.attaining_policy.as_slice(),
        "class": class_name(class),
        "epsilon": ext(b.eps),
        "dist0": b.dist0,
        "k_rx": ext(k_rx(&b)),
        "k_anc": ext(k_anc(&b)),
    });
    emit_json(args.out.as_deref(), &out)?;
    Ok(0)
}

fn cmd_classify(args: &ClassifyArgs) -> CliResult<u8> {
    let inst = load(&args.source, &V0Spec::Zero, 1)?.remove(0);
    let class = classify(&inst.mdp)?;
    let out = json!({
        "instance": inst.label,
        "n_states": inst.mdp.n_states(),
        "n_actions": inst.mdp.n_actions(),
        "class": class_name(class),
    });
    emit_json(args.out.as_deref(), &out)?;
    Ok(0)
}

fn cmd_lower_bound(ctx: &Ctx, args: &LowerBoundArgs) -> CliResult<u8> {
    let src = SourceArgs {
        mdp: None,
        family: Some(args.family),
        random: None,
        n: Some(args.n),
        actions: 1,
        seed: 0,
    };
    let inst = load(&src, &args.start.v0, 1)?.remove(0);
    let sol = inst.solution()?;
    let iters = args.iters.unwrap_or(args.n - 2);
    let mut holds = true;
    let mut algorithms = Vec::new();
    let mut dist0 = 0.0;
    for (algo, schedule) in [
        (Algorithm::Vi, Schedule::Zero),
        (Algorithm::RxVi, Schedule::Constant(0.5)),
        (Algorithm::AncVi, Schedule::Anchor),
    ] {
        let b = BoundInputs::from_instance(&inst.mdp, &inst.v0, &sol, schedule.clone())?;
        dist0 = b.dist0;
        let mut trace = run(&inst.mdp, algo, &inst.v0, &schedule, None, iters)?;
        trace.attach_metrics(&inst.mdp, &sol)?;
        let mut rows = Vec::new();
        for rec in &trace.records {
            let lower = lower_bound_cell(&inst, algo, rec.k, b.dist0);
            let measured = match args.family {
                Family::Unichain => rec.metrics.bellman_sup_err,
                Family::Multichain => rec.metrics.normalized_err,
            };
            if let (Some(lo), Some(x)) = (lower, measured) {
                holds &= lo <= x + args.tol;
            }
            rows.push(json!({
                "k": rec.k,
                "bellman_sup_err": rec.metrics.bellman_sup_err,
                "normalized_err": rec.metrics.normalized_err,
                "lower_bound": lower,
                "upper_bound": trace_upper_bound(algo, rec.k, &b, MdpClass::Unichain),
            }));
        }
        algorithms.push(
            json!({ "algorithm": algo.name(), "schedule": schedule.to_string(), "rows": rows }),
        );
    }
    let out = json!({
        "family": args.family,
        "n": args.n,
        "dist0": dist0,
        "holds": holds,
        "algorithms": algorithms,
    });
    emit_json(args.out.as_deref(), &out)?;
    if holds {
        Ok(0)
    } else {
        ctx.note("lower bound violated");
        Ok(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx { quiet: cli.quiet };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(&ctx, a),
        Command::Verify(a) => cmd_verify(&ctx, a),
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Classify(a) => cmd_classify(a),
        Command::LowerBound(a) => cmd_lower_bound(&ctx, a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
