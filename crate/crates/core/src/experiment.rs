//! Seeded end-to-end runs: build, solve, decode, audit.

use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decoder::{
    decode, dichotomy_check, lemma_audit, DecodeOutcome, DichotomyReport, LemmaAudit,
};
use crate::error::Result;
use crate::lin_vi::LinViInstance;
use crate::params::{GdaParams, Premises};
use crate::pure_circuit::{ExampleKind, PureCircuitInstance};
use crate::reduction::sample::{structured_point, uniform_point};
use crate::reduction::{Bounds, GdaInstance, JointPoint, BOUNDS_FORMULA};
use crate::seeds::{self, stream};
use crate::solver::{solve_restarts, Method, SolverConfig, Trajectory};

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcSource {
    Generate { kind: ExampleKind, size: usize },
    Path(String),
    Inline(PureCircuitInstance),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViSource {
    Generate {
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho: Option<f64>,
    },
    Path(String),
    Inline(LinViInstance),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartKind {
    #[default]
    Uniform,
    Structured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub pc: PcSource,
    pub vi: ViSource,
    pub params: GdaParams,
    pub solver: SolverConfig,
    #[serde(default)]
    pub start: StartKind,
    /// Decoding `ρ`; defaults to the LinVI instance's own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub seed: u64,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

impl PcSource {
    pub fn resolve(&self, root_seed: u64) -> Result<PureCircuitInstance> {
        match self {
            PcSource::Generate { kind, size } => PureCircuitInstance::gen_example(
                *kind,
                *size,
                seeds::derive(root_seed, stream::PURE_CIRCUIT, 0),
            ),
            PcSource::Path(p) => read_json(p),
            PcSource::Inline(inst) => Ok(inst.clone()),
        }
    }
}

impl ViSource {
    pub fn resolve(&self, root_seed: u64) -> Result<LinViInstance> {
        match self {
            ViSource::Generate { m, rho } => {
                let mut inst =
                    LinViInstance::gen_random(*m, seeds::derive(root_seed, stream::LIN_VI, 0))?;
                if let Some(r) = rho {
                    inst.rho = *r;
                }
                Ok(inst)
            }
            ViSource::Path(p) => read_json(p),
            ViSource::Inline(inst) => Ok(inst.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub d: usize,
    pub kappa: usize,
    pub n: usize,
    pub m: usize,
    pub params: GdaParams,
    pub bounds: Bounds,
    pub bounds_formula: String,
    pub premises: Premises,
}

impl InstanceMeta {
    pub fn of(inst: &GdaInstance, rho: f64) -> Self {
        Self {
            d: inst.dim,
            kappa: inst.kappa(),
            n: inst.n(),
            m: inst.m(),
            params: inst.params,
            bounds: inst.bounds,
            bounds_formula: BOUNDS_FORMULA.to_string(),
            premises: Premises::for_params(inst.m(), inst.kappa(), rho, &inst.params),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub max_violation: f64,
    pub epsilon: f64,
    pub pass: bool,
    pub method: Method,
    pub iterations: usize,
    pub seed: u64,
    /// Restart that produced the reported point.
    pub restart: usize,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub build_ms: f64,
    pub solve_ms: f64,
    pub decode_ms: f64,
    pub audit_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: ToolInfo,
    /// The run's configuration with both instances inlined.
    pub config: ExperimentConfig,
    pub instance: InstanceMeta,
    pub solver: SolverReport,
    pub point: JointPoint,
    pub decode: DecodeOutcome,
    /// Present when the solver certified ε-stationarity.
    pub audit: Option<LemmaAudit>,
    pub dichotomy: Option<DichotomyReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
    pub seed: u64,
}

/// Start points for each restart, derived from the root seed.
pub fn start_points(
    inst: &GdaInstance,
    kind: StartKind,
    restarts: usize,
    root: u64,
) -> Vec<JointPoint> {
    (0..restarts)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(root, stream::RESTART, r as u64));
            match kind {
                StartKind::Uniform => uniform_point(inst, &mut rng),
                StartKind::Structured => structured_point(inst, &mut rng),
            }
        })
        .collect()
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn run_pipeline(config: &ExperimentConfig, timings: bool) -> Result<RunReport> {
    let t0 = Instant::now();
    let pc = config.pc.resolve(config.seed)?;
    let vi = config.vi.resolve(config.seed)?;
    let inst = GdaInstance::build(pc.clone(), vi.clone(), config.params)?;
    let build_ms = ms(t0);

    let mut solver_cfg = config.solver.clone();
    solver_cfg.seed = config.seed;
    let t1 = Instant::now();
    let starts = start_points(&inst, config.start, solver_cfg.restarts, config.seed);
    let (restart, outcome) = solve_restarts(&inst, &starts, &solver_cfg)?;
    let solve_ms = ms(t1);

    let eps = inst.params.epsilon;
    let rho = config.rho.unwrap_or(inst.vi.rho);
    let t2 = Instant::now();
    let decoded = decode(&inst, &outcome.point, Some(rho))?;
    let decode_ms = ms(t2);

    let t3 = Instant::now();
    let pass = outcome.max_violation <= eps;
    let (audit, dichotomy) = if pass {
        (
            Some(lemma_audit(&inst, &outcome.point, eps, Some(rho))?),
            Some(dichotomy_check(&inst, &outcome.point, eps, Some(rho))?),
        )
    } else {
        (None, None)
    };
    let audit_ms = ms(t3);

    let mut resolved = config.clone();
    resolved.pc = PcSource::Inline(pc);
    resolved.vi = ViSource::Inline(vi);
    resolved.solver = solver_cfg.clone();

    Ok(RunReport {
        tool: ToolInfo {
            name: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
        },
        config: resolved,
        instance: InstanceMeta::of(&inst, rho),
        solver: SolverReport {
            max_violation: outcome.max_violation,
            epsilon: eps,
            pass,
            method: solver_cfg.method,
            iterations: outcome.trajectory.iterations,
            seed: config.seed,
            restart,
            trajectory: outcome.trajectory,
        },
        point: outcome.point,
        decode: decoded,
        audit,
        dichotomy,
        timings: timings.then_some(Timings {
            build_ms,
            solve_ms,
            decode_ms,
            audit_ms,
        }),
        seed: config.seed,
    })
}
