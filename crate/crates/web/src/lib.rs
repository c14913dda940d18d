//! WebAssembly bindings for the demo page in `www/`. Every export takes plain
//! numbers or a JSON string and returns JSON.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use gda_core::decoder::{decode, DecodeOutcome};
use gda_core::experiment::{start_points, StartKind};
use gda_core::gates::{GateFn, GateKind};
use gda_core::pure_circuit::ExampleKind;
use gda_core::solver::{solve_from, Method, SolverConfig};
use gda_core::{GdaInstance, GdaParams, JointPoint, LinViInstance, PureCircuitInstance};

/// Instance description sent by the page.
#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct DemoSpec {
    pub kind: ExampleKind,
    pub size: usize,
    pub m: usize,
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
}

impl Default for DemoSpec {
    fn default() -> Self {
        Self {
            kind: ExampleKind::Ring,
            size: 3,
            m: 1,
            n: 4,
            epsilon: 1e-3,
            delta: 0.5,
            seed: 1,
        }
    }
}

impl DemoSpec {
    /// Keeps requests small enough for a browser tab.
    const MAX_DIM: usize = 4096;

    pub fn build(&self) -> Result<GdaInstance, String> {
        let dim = self.size.saturating_mul(self.n).saturating_mul(self.m);
        if dim > Self::MAX_DIM {
            return Err(format!(
                "d = {dim} exceeds the demo limit {}",
                Self::MAX_DIM
            ));
        }
        let pc = PureCircuitInstance::gen_example(self.kind, self.size, self.seed)
            .map_err(|e| e.to_string())?;
        let vi = LinViInstance::gen_random(self.m, self.seed).map_err(|e| e.to_string())?;
        let params =
            GdaParams::custom(self.n, self.epsilon, self.delta).map_err(|e| e.to_string())?;
        GdaInstance::build(pc, vi, params).map_err(|e| e.to_string())
    }
}

fn parse_spec(json: &str) -> Result<DemoSpec, String> {
    if json.trim().is_empty() {
        return Ok(DemoSpec::default());
    }
    serde_json::from_str(json).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Curve {
    z: Vec<f64>,
    value: Vec<f64>,
    slope: Vec<f64>,
    breakpoints: [f64; 2],
    slope_bound: f64,
}

pub fn gate_curves_json(samples: usize, m: usize) -> Result<String, String> {
    let samples = samples.clamp(2, 20_000);
    let curve = |kind| -> Result<Curve, String> {
        let gf = GateFn::new(kind, m).map_err(|e| e.to_string())?;
        let [a, b] = gf.breakpoints();
        let pad = 0.25 * (b - a);
        let z: Vec<f64> = (0..samples)
            .map(|k| a - pad + (b - a + 2.0 * pad) * k as f64 / (samples - 1) as f64)
            .collect();
        Ok(Curve {
            value: z.iter().map(|&v| gf.eval(v).unwrap_or(f64::NAN)).collect(),
            slope: z.iter().map(|&v| gf.prime(v).unwrap_or(f64::NAN)).collect(),
            z,
            breakpoints: [a, b],
            slope_bound: gf.derivative_sup(),
        })
    };
    let out = serde_json::json!({
        "g": curve(GateKind::G)?,
        "l": curve(GateKind::L)?,
        "lambda": curve(GateKind::Lambda)?,
    });
    Ok(out.to_string())
}

#[derive(Serialize)]
struct VertexView {
    s: f64,
    lambda: f64,
    dist2: f64,
    delta: f64,
}

#[derive(Serialize)]
struct SolveView {
    d: usize,
    method: Method,
    step: f64,
    initial_violation: f64,
    epoch_best: Vec<f64>,
    max_violation: f64,
    epsilon: f64,
    pass: bool,
    iterations: usize,
    vertices: Vec<VertexView>,
    decode: DecodeOutcome,
    point: JointPoint,
}

pub fn solve_json(spec: &str, method: &str, step: f64, iters: usize) -> Result<String, String> {
    let spec = parse_spec(spec)?;
    let inst = spec.build()?;
    let method = match method {
        "gda" => Method::Gda,
        "extragradient" => Method::Extragradient,
        other => return Err(format!("unknown method {other:?}")),
    };
    let cfg = SolverConfig {
        method,
        step: Some(step),
        max_iters: iters.clamp(1, 200_000),
        seed: spec.seed,
        epoch: (iters / 100).max(1),
        ..SolverConfig::default()
    };
    let p0 = start_points(&inst, StartKind::Uniform, 1, spec.seed).remove(0);
    let out = solve_from(&inst, &p0, &cfg).map_err(|e| e.to_string())?;
    let diag = inst.diagnostics(&out.point).map_err(|e| e.to_string())?;
    let decoded = decode(&inst, &out.point, None).map_err(|e| e.to_string())?;
    let view = SolveView {
        d: inst.dim,
        method,
        step,
        initial_violation: out.trajectory.initial_violation,
        epoch_best: out.trajectory.epoch_best,
        max_violation: out.max_violation,
        epsilon: inst.params.epsilon,
        pass: out.max_violation <= inst.params.epsilon,
        iterations: out.trajectory.iterations,
        vertices: diag
            .nodes
            .iter()
            .map(|v| VertexView {
                s: v.s,
                lambda: v.lambda,
                dist2: v.dist2,
                delta: v.delta,
            })
            .collect(),
        decode: decoded,
        point: out.point,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SliceView {
    /// `values[a][b]` is `f` with coordinate `k` of x at `ticks[a]` and of y
    /// at `ticks[b]`.
    values: Vec<Vec<f64>>,
    ticks: Vec<f64>,
    min: f64,
    max: f64,
    coordinate: usize,
}

/// `f` on the square spanned by `x_k` and `y_k`, `k = index(q, i, j)`, with
/// every other coordinate at a seeded random point.
pub fn objective_slice_json(
    spec: &str,
    q: usize,
    i: usize,
    j: usize,
    resolution: usize,
) -> Result<String, String> {
    let spec = parse_spec(spec)?;
    let inst = spec.build()?;
    let k = inst.index(q, i, j).map_err(|e| e.to_string())?;
    let resolution = resolution.clamp(2, 200);
    let ticks: Vec<f64> = (0..resolution)
        .map(|t| t as f64 / (resolution - 1) as f64)
        .collect();
    let mut p = start_points(&inst, StartKind::Structured, 1, spec.seed).remove(0);
    let mut values = Vec::with_capacity(resolution);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &a in &ticks {
        let mut row = Vec::with_capacity(resolution);
        for &b in &ticks {
            p.x[k] = a;
            p.y[k] = b;
            let f = inst.eval_f(&p).map_err(|e| e.to_string())?;
            min = min.min(f);
            max = max.max(f);
            row.push(f);
        }
        values.push(row);
    }
    serde_json::to_string(&SliceView {
        values,
        ticks,
        min,
        max,
        coordinate: k,
    })
    .map_err(|e| e.to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// Values and slopes of `g`, `ℓ` and `λ` around their transition intervals.
#[wasm_bindgen(js_name = gateCurves)]
pub fn gate_curves(samples: u32, m: u32) -> Result<String, JsError> {
    js(gate_curves_json(samples as usize, m as usize))
}

/// Runs one solver start on the instance described by `spec` and decodes
/// the best point.
#[wasm_bindgen]
pub fn solve(spec: &str, method: &str, step: f64, iters: u32) -> Result<String, JsError> {
    js(solve_json(spec, method, step, iters as usize))
}

#[wasm_bindgen(js_name = objectiveSlice)]
pub fn objective_slice(
    spec: &str,
    q: u32,
    i: u32,
    j: u32,
    resolution: u32,
) -> Result<String, JsError> {
    js(objective_slice_json(
        spec,
        q as usize,
        i as usize,
        j as usize,
        resolution as usize,
    ))
}
