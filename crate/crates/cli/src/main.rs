//! `gdatool`: build GDA instances from Pure-Circuit and LinVI inputs, solve
//! them, decode the result and audit it.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gda_core::decoder::{decode, dichotomy_check, lemma_audit};
use gda_core::experiment::{
    read_json, run_pipeline, start_points, ExperimentConfig, InstanceMeta, PcSource, SolverReport,
    StartKind, ViSource,
};
use gda_core::gradcheck::{check_random, Tolerances};
use gda_core::params::{Exact, PaperParams};
use gda_core::pure_circuit::ExampleKind;
use gda_core::reduction::dim_cap;
use gda_core::seeds::{self, stream};
use gda_core::solver::{solve_restarts, Method, SolverConfig};
use gda_core::{Error, GdaInstance, GdaParams, JointPoint, LinViInstance, PureCircuitInstance};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  I/O error
  2  parse error (bad flags or malformed JSON)
  3  validation failure (bad instance, parameter or point; point not stationary)
  4  cap exceeded (dimension or grid evaluations)
  5  grad-check mismatch
  6  audit assertion failure

Environment:
  GDA_DIM_CAP   largest dimension d = kappa*n*m that build will materialize (default 10000000)
  GDA_EVAL_CAP  largest number of grid evaluations for --method grid (default 10000000)";

#[derive(Parser)]
#[command(name = "gdatool", version, about, after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an example Pure-Circuit instance.
    GenPc(GenPcArgs),
    /// Generate a random LinVI instance.
    GenVi(GenViArgs),
    /// Combine a Pure-Circuit and a LinVI instance into a GDA instance.
    Build(BuildArgs),
    /// Evaluate f, its gradient and per-vertex diagnostics at a point.
    Eval(PointArgs),
    /// Compare both gradient routes and finite differences at random points.
    GradCheck(GradCheckArgs),
    /// Search for an approximate stationary point.
    Solve(SolveArgs),
    /// Read a point back as a LinVI solution or a Pure-Circuit assignment.
    Decode(DecodeArgs),
    /// Evaluate the stationarity lemmas and the dichotomy at a point.
    Audit(AuditArgs),
    /// Generate, build, solve, decode and audit in one run.
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Ring,
    PurifyTree,
}

impl From<Kind> for ExampleKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Ring => ExampleKind::Ring,
            Kind::PurifyTree => ExampleKind::PurifyTree,
        }
    }
}

#[derive(Args)]
struct Output {
    /// Write JSON here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenPcArgs {
    #[arg(long, value_enum, default_value = "ring")]
    kind: Kind,
    /// Number of vertices (at least 3).
    #[arg(long, default_value_t = 3)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct GenViArgs {
    #[arg(long, short, default_value_t = 1)]
    m: usize,
    /// Tolerance stored with the instance.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    pc: Option<PathBuf>,
    #[arg(long)]
    vi: Option<PathBuf>,
    /// Copies per vertex.
    #[arg(long, required_unless_present = "paper")]
    n: Option<usize>,
    #[arg(long, required_unless_present = "paper")]
    epsilon: Option<f64>,
    #[arg(long, required_unless_present = "paper")]
    delta: Option<f64>,
    /// Derive n, epsilon and delta exactly from (m, kappa, rho).
    #[arg(long, conflicts_with_all = ["n", "epsilon", "delta"])]
    paper: bool,
    /// With --paper: LinVI dimension when no --vi is given.
    #[arg(long, requires = "paper")]
    m: Option<u64>,
    /// With --paper: vertex count when no --pc is given.
    #[arg(long, requires = "paper")]
    kappa: Option<u64>,
    /// With --paper: exact tolerance such as 1/2 or 0.125 (default: the LinVI instance's).
    #[arg(long, requires = "paper")]
    rho: Option<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long)]
    instance: PathBuf,
    /// A point {"x","y"}, or any report with a "point" field.
    #[arg(long)]
    point: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct GradCheckArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Central-difference step.
    #[arg(long, default_value_t = 1e-6)]
    h: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Gda,
    Extragradient,
    Grid,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Gda => Method::Gda,
            MethodArg::Extragradient => Method::Extragradient,
            MethodArg::Grid => Method::Grid,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StartArg {
    Uniform,
    Structured,
}

impl From<StartArg> for StartKind {
    fn from(s: StartArg) -> Self {
        match s {
            StartArg::Uniform => StartKind::Uniform,
            StartArg::Structured => StartKind::Structured,
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value = "extragradient")]
    method: MethodArg,
    /// Step size (default 1/L from the instance bounds).
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    /// Stop once the maximum violation is at most this.
    #[arg(long, default_value_t = 1e-6)]
    target: f64,
    /// Iterations per recorded trajectory epoch.
    #[arg(long, default_value_t = 100)]
    epoch: usize,
    /// Grid spacing for --method grid.
    #[arg(long, default_value_t = 0.25)]
    grid_step: f64,
    #[arg(long, value_enum, default_value = "uniform")]
    start: StartArg,
}

impl SolverArgs {
    fn config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            method: self.method.into(),
            step: self.step,
            max_iters: self.max_iters,
            restarts: self.restarts,
            seed,
            target: self.target,
            epoch: self.epoch,
            grid_step: self.grid_step,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    point: PathBuf,
    /// Decoding tolerance (default: the LinVI instance's).
    #[arg(long)]
    rho: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    point: PathBuf,
    /// Stationarity tolerance (default: the instance's epsilon).
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct PipelineArgs {
    /// Experiment config file; the flags below are ignored when given,
    /// except --seed which overrides the file's seed.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ring")]
    kind: Kind,
    #[arg(long, default_value_t = 3)]
    size: usize,
    #[arg(long, short, default_value_t = 1)]
    m: usize,
    /// Tolerance for the generated LinVI instance and for decoding.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Leave wall-clock timings out so reruns are byte-identical.
    #[arg(long)]
    no_timings: bool,
    #[command(flatten)]
    output: Output,
}

enum Failure {
    Core(Error),
    Parse(String),
    GradCheck,
    Audit,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(Error::Io(_)) => 1,
            Failure::Core(Error::Json(_)) | Failure::Parse(_) => 2,
            Failure::Core(Error::CapExceeded { .. }) => 4,
            Failure::Core(_) => 3,
            Failure::GradCheck => 5,
            Failure::Audit => 6,
        }
    }
}

type CmdResult = Result<(), Failure>;

fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    read_json(path).map_err(|e| match e {
        Error::Json(j) => Failure::Parse(format!("{}: {j}", path.display())),
        other => other.into(),
    })
}

fn load_instance(path: &Path) -> Result<GdaInstance, Failure> {
    load(path)
}

/// Accepts a bare point or any object carrying one under `"point"`.
fn load_point(path: &Path) -> Result<JointPoint, Failure> {
    let value: serde_json::Value = load(path)?;
    let inner = match value.get("point") {
        Some(p) if value.get("x").is_none() => p.clone(),
        _ => value,
    };
    serde_json::from_value(inner).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(value: &T, output: &Output) -> CmdResult {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(Error::from)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn gen_pc(a: &GenPcArgs) -> CmdResult {
    let seed = seeds::derive(a.seed, stream::PURE_CIRCUIT, 0);
    emit(
        &PureCircuitInstance::gen_example(a.kind.into(), a.size, seed)?,
        &a.output,
    )
}

fn gen_vi(a: &GenViArgs) -> CmdResult {
    let mut vi = LinViInstance::gen_random(a.m, seeds::derive(a.seed, stream::LIN_VI, 0))?;
    if let Some(rho) = a.rho {
        vi.rho = rho;
        vi.validate()?;
    }
    emit(&vi, &a.output)
}

#[derive(Serialize)]
struct PaperReport<'a> {
    paper: &'a PaperParams,
    premises: gda_core::Premises,
}

fn build(a: &BuildArgs) -> CmdResult {
    let pc: Option<PureCircuitInstance> = a.pc.as_deref().map(load).transpose()?;
    let vi: Option<LinViInstance> = a.vi.as_deref().map(load).transpose()?;
    let params = if a.paper {
        let m = a.m.or(vi.as_ref().map(|v| v.m as u64));
        let kappa = a.kappa.or(pc.as_ref().map(|p| p.kappa as u64));
        let (Some(m), Some(kappa)) = (m, kappa) else {
            return Err(Failure::Parse(
                "paper mode needs --m/--vi and --kappa/--pc".into(),
            ));
        };
        let rho = match (&a.rho, &vi) {
            (Some(r), _) => r.parse::<Exact>()?,
            (None, Some(v)) => Exact::from_f64(v.rho)
                .ok_or_else(|| Error::InvalidParameter(format!("rho = {}", v.rho)))?,
            (None, None) => return Err(Failure::Parse("paper mode needs --rho or --vi".into())),
        };
        let paper = PaperParams::new(m, kappa, rho, dim_cap())?;
        let report = PaperReport {
            premises: paper.premises(),
            paper: &paper,
        };
        let gda = match paper.to_gda_params() {
            Ok(p) => p,
            Err(e) => {
                // the exact record is still the useful output here
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).map_err(Error::from)?
                );
                return Err(e.into());
            }
        };
        if pc.is_none() || vi.is_none() {
            return emit(&report, &a.output);
        }
        gda
    } else {
        GdaParams::custom(
            a.n.unwrap_or(0),
            a.epsilon.unwrap_or(0.0),
            a.delta.unwrap_or(0.0),
        )?
    };
    let (Some(pc), Some(vi)) = (pc, vi) else {
        return Err(Failure::Parse("build needs --pc and --vi".into()));
    };
    emit(&GdaInstance::build(pc, vi, params)?, &a.output)
}

#[derive(Serialize)]
struct EvalReport {
    f: f64,
    gx: Vec<f64>,
    gy: Vec<f64>,
    diagnostics: gda_core::reduction::NodeDiagnostics,
}

fn eval(a: &PointArgs) -> CmdResult {
    let inst = load_instance(&a.instance)?;
    let p = load_point(&a.point)?;
    let f = inst.eval_f(&p)?;
    let (gx, gy) = inst.eval_grad(&p)?;
    let diagnostics = inst.diagnostics(&p)?;
    emit(
        &EvalReport {
            f,
            gx,
            gy,
            diagnostics,
        },
        &a.output,
    )
}

fn grad_check(a: &GradCheckArgs) -> CmdResult {
    let inst = load_instance(&a.instance)?;
    let tol = Tolerances {
        h: a.h,
        ..Tolerances::default()
    };
    let report = check_random(&inst, a.points, a.seed, tol)?;
    emit(&report, &a.output)?;
    if report.ok() {
        Ok(())
    } else {
        Err(Failure::GradCheck)
    }
}

#[derive(Serialize)]
struct SolveOutput {
    #[serde(flatten)]
    report: SolverReport,
    point: JointPoint,
}

fn solve(a: &SolveArgs) -> CmdResult {
    let inst = load_instance(&a.instance)?;
    let cfg = a.solver.config(a.seed);
    let starts = start_points(&inst, a.solver.start.into(), cfg.restarts, a.seed);
    let (restart, out) = solve_restarts(&inst, &starts, &cfg)?;
    let eps = inst.params.epsilon;
    let report = SolverReport {
        max_violation: out.max_violation,
        epsilon: eps,
        pass: out.max_violation <= eps,
        method: cfg.method,
        iterations: out.trajectory.iterations,
        seed: a.seed,
        restart,
        trajectory: out.trajectory,
    };
    emit(
        &SolveOutput {
            report,
            point: out.point,
        },
        &a.output,
    )
}

fn decode_cmd(a: &DecodeArgs) -> CmdResult {
    let inst = load_instance(&a.instance)?;
    let p = load_point(&a.point)?;
    emit(&decode(&inst, &p, a.rho)?, &a.output)
}

#[derive(Serialize)]
struct AuditOutput {
    instance: InstanceMeta,
    audit: gda_core::decoder::LemmaAudit,
    dichotomy: gda_core::decoder::DichotomyReport,
    holds: bool,
}

fn audit(a: &AuditArgs) -> CmdResult {
    let inst = load_instance(&a.instance)?;
    let p = load_point(&a.point)?;
    let eps = a.epsilon.unwrap_or(inst.params.epsilon);
    let audit = lemma_audit(&inst, &p, eps, a.rho)?;
    let dichotomy = dichotomy_check(&inst, &p, eps, a.rho)?;
    let holds = audit.unconditional_holds && audit.conditional_holds() && dichotomy.holds;
    let out = AuditOutput {
        instance: InstanceMeta::of(&inst, audit.rho),
        audit,
        dichotomy,
        holds,
    };
    emit(&out, &a.output)?;
    if holds {
        Ok(())
    } else {
        Err(Failure::Audit)
    }
}

fn pipeline(a: &PipelineArgs) -> CmdResult {
    let mut config = match &a.config {
        Some(path) => load::<ExperimentConfig>(path)?,
        None => ExperimentConfig {
            pc: PcSource::Generate {
                kind: a.kind.into(),
                size: a.size,
            },
            vi: ViSource::Generate { m: a.m, rho: a.rho },
            params: GdaParams::custom(a.n, a.epsilon, a.delta)?,
            solver: a.solver.config(0),
            start: a.solver.start.into(),
            rho: a.rho,
            output: a.output.out.as_ref().map(|p| p.display().to_string()),
            seed: 0,
        },
    };
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    let report = run_pipeline(&config, !a.no_timings)?;
    let output = Output {
        out: a
            .output
            .out
            .clone()
            .or(config.output.as_ref().map(PathBuf::from)),
    };
    emit(&report, &output)?;
    let holds = match (&report.audit, &report.dichotomy) {
        (Some(audit), Some(d)) => audit.unconditional_holds && audit.conditional_holds() && d.holds,
        _ => true,
    };
    if holds {
        Ok(())
    } else {
        Err(Failure::Audit)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GenPc(a) => gen_pc(a),
        Command::GenVi(a) => gen_vi(a),
        Command::Build(a) => build(a),
        Command::Eval(a) => eval(a),
        Command::GradCheck(a) => grad_check(a),
        Command::Solve(a) => solve(a),
        Command::Decode(a) => decode_cmd(a),
        Command::Audit(a) => audit(a),
        Command::Pipeline(a) => pipeline(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Parse(msg) => eprintln!("error: {msg}"),
                Failure::GradCheck => eprintln!("error: gradient check failed"),
                Failure::Audit => eprintln!("error: audit assertion failed"),
            }
            ExitCode::from(failure.code())
        }
    }
}
