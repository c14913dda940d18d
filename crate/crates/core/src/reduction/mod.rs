//! Compiling a Pure-Circuit instance and a LinVI instance into a min-max
//! problem over `[0,1]^d × [0,1]^d` with `d = κ n m`.
//!
//! Every vertex `q` owns `n` copies of an `m`-vector on each side. Copy `i`
//! (1-based) carries the regularizer weight `M_i = δ(i - n/2)`.

mod eval;
pub mod sample;

use serde::{Deserialize, Serialize};

pub use eval::{NodeDiag, NodeDiagnostics};

use crate::error::{Error, Result};
use crate::gates::{
    G_PRIME_SUP, G_SECOND_SUP, LAMBDA_PRIME_SUP, LAMBDA_SECOND_SUP, L_PRIME_SUP, L_SECOND_SUP,
};
use crate::lin_vi::{check_box, LinViInstance};
use crate::params::{GdaParams, DEFAULT_DIM_CAP};
use crate::pure_circuit::{GateType, PureCircuitInstance};

/// Environment variable overriding the dimension cap for materialization.
pub const DIM_CAP_ENV: &str = "GDA_DIM_CAP";

pub fn dim_cap() -> u64 {
    std::env::var(DIM_CAP_ENV)
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_DIM_CAP)
}

/// The single gate producing a vertex, and which output slot it fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum Producer {
    /// `w` of `NOR(u, v → w)`.
    Nor { gate: usize, u: usize, v: usize },
    /// `v` of `PURIFY(u → v, w)`, driven by `ℓ(λ_u + 1/4)`.
    PurifyHigh { gate: usize, u: usize },
    /// `w` of `PURIFY(u → v, w)`, driven by `ℓ(λ_u - 1/4)`.
    PurifyLow { gate: usize, u: usize },
}

impl Producer {
    pub fn gate_type(&self) -> GateType {
        match self {
            Producer::Nor { .. } => GateType::Nor,
            _ => GateType::Purify,
        }
    }
}

/// Conservative range, Lipschitz and smoothness constants for `f` on the box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub struct Bounds {
    pub g: f64,
    pub l: f64,
    pub b: f64,
}

pub const BOUNDS_FORMULA: &str = "H = 2nm^2 bounds |H_v|; \
B = 2*kappa*n*m^2 + kappa*m*sum|M_i|; \
Dmax_q = H * sum over gates consuming q of (6*1.5 per NOR, 2*9*1.5 per PURIFY); \
G = sqrt(2d) * (3m + 2(max|M_i| + max_q Dmax_q)); \
L = max_q [3m + 12nm^2 * a_q * b_q * k_q + 4(max|M_i| + Dmax_q) + 2 sum over consumer terms \
(a'' * 1.5^2 * 4nm * k * H + a' * 6 * 4nm * H + a' * 1.5 * 5nm^2)] \
with (a', a'') = (6, 96) for g and (9, 216) for l, k the gate's input count; \
L bounds the max absolute row sum of the Hessian";

#[derive(Debug, Clone, PartialEq)]
pub struct GdaInstance {
    pub pc: PureCircuitInstance,
    pub vi: LinViInstance,
    pub params: GdaParams,
    /// `M_i` for `i = 1..=n`, stored 0-based.
    pub m_grid: Vec<f64>,
    pub dim: usize,
    pub bounds: Bounds,
    /// `None` only for vertices of relaxed instances that no gate produces.
    pub output_gate: Vec<Option<Producer>>,
    pub relaxed: bool,
}

#[derive(Serialize, Deserialize)]
struct GdaInstanceFile {
    pc: PureCircuitInstance,
    vi: LinViInstance,
    params: GdaParams,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    relaxed: bool,
    d: usize,
    bounds: Bounds,
    bounds_formula: String,
}

impl From<GdaInstance> for GdaInstanceFile {
    fn from(inst: GdaInstance) -> Self {
        Self {
            d: inst.dim,
            bounds: inst.bounds,
            bounds_formula: BOUNDS_FORMULA.to_string(),
            pc: inst.pc,
            vi: inst.vi,
            params: inst.params,
            relaxed: inst.relaxed,
        }
    }
}

impl TryFrom<GdaInstanceFile> for GdaInstance {
    type Error = Error;

    fn try_from(f: GdaInstanceFile) -> Result<Self> {
        if f.relaxed {
            GdaInstance::build_relaxed(f.pc, f.vi, f.params)
        } else {
            GdaInstance::build(f.pc, f.vi, f.params)
        }
    }
}

impl Serialize for GdaInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GdaInstanceFile::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GdaInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = GdaInstanceFile::deserialize(d)?;
        GdaInstance::try_from(file).map_err(serde::de::Error::custom)
    }
}

/// Paired strategies, flattened in index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl JointPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { x, y }
    }

    pub fn diagonal(x: Vec<f64>) -> Self {
        Self { y: x.clone(), x }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

impl GdaInstance {
    /// Builds with the default dimension cap (overridable by `GDA_DIM_CAP`).
    pub fn build(pc: PureCircuitInstance, vi: LinViInstance, params: GdaParams) -> Result<Self> {
        Self::build_with_cap(pc, vi, params, dim_cap())
    }

    pub fn build_with_cap(
        pc: PureCircuitInstance,
        vi: LinViInstance,
        params: GdaParams,
        cap: u64,
    ) -> Result<Self> {
        pc.validate()?;
        Self::assemble(pc, vi, params, cap, false)
    }

    /// Skips Pure-Circuit validation. Vertices no gate produces get
    /// `s_q = 0`; a vertex produced twice keeps its first producer.
    pub fn build_relaxed(
        pc: PureCircuitInstance,
        vi: LinViInstance,
        params: GdaParams,
    ) -> Result<Self> {
        let known = pc.gates().all(|(_, t)| t.iter().all(|&v| v < pc.kappa));
        if !known || pc.kappa == 0 {
            return Err(Error::InvalidCircuit(pc.violations()));
        }
        Self::assemble(pc, vi, params, dim_cap(), true)
    }

    fn assemble(
        pc: PureCircuitInstance,
        vi: LinViInstance,
        params: GdaParams,
        cap: u64,
        relaxed: bool,
    ) -> Result<Self> {
        vi.validate()?;
        params.validate()?;
        let dim = (pc.kappa as u128) * (params.n as u128) * (vi.m as u128);
        if dim > cap as u128 {
            return Err(Error::CapExceeded {
                what: "dimension d = kappa * n * m".into(),
                size: dim.to_string(),
                cap: cap.to_string(),
            });
        }
        let n = params.n;
        let m_grid = (1..=n)
            .map(|i| params.delta * (i as f64 - n as f64 / 2.0))
            .collect();
        let mut output_gate = vec![None; pc.kappa];
        for (gate, &[u, v, w]) in pc.nor_gates.iter().enumerate() {
            output_gate[w].get_or_insert(Producer::Nor { gate, u, v });
        }
        for (gate, &[u, v, w]) in pc.purify_gates.iter().enumerate() {
            output_gate[v].get_or_insert(Producer::PurifyHigh { gate, u });
            output_gate[w].get_or_insert(Producer::PurifyLow { gate, u });
        }
        let mut inst = Self {
            pc,
            vi,
            params,
            m_grid,
            dim: dim as usize,
            bounds: Bounds {
                g: 0.0,
                l: 0.0,
                b: 0.0,
            },
            output_gate,
            relaxed,
        };
        inst.bounds = inst.compute_bounds();
        Ok(inst)
    }

    pub fn kappa(&self) -> usize {
        self.pc.kappa
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn m(&self) -> usize {
        self.vi.m
    }

    /// Flat position of `x^q_{i,j}` with `i` in `1..=n` and `j` in `0..m`.
    pub fn index(&self, q: usize, i: usize, j: usize) -> Result<usize> {
        let (n, m) = (self.n(), self.m());
        if q >= self.kappa() || i == 0 || i > n || j >= m {
            return Err(Error::InvalidParameter(format!(
                "index (q={q}, i={i}, j={j}) outside kappa={}, n={n}, m={m}",
                self.kappa()
            )));
        }
        Ok((q * n + (i - 1)) * m + j)
    }

    pub fn unindex(&self, flat: usize) -> Result<(usize, usize, usize)> {
        if flat >= self.dim {
            return Err(Error::InvalidParameter(format!(
                "flat index {flat} outside d={}",
                self.dim
            )));
        }
        let (n, m) = (self.n(), self.m());
        Ok((flat / (n * m), (flat / m) % n + 1, flat % m))
    }

    /// `M_i` for 1-based copy `i`.
    pub fn weight(&self, i: usize) -> f64 {
        self.m_grid[i - 1]
    }

    pub fn check_point(&self, p: &JointPoint) -> Result<()> {
        for v in [&p.x, &p.y] {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    actual: v.len(),
                });
            }
        }
        check_box(&p.x)?;
        check_box(&p.y)
    }

    /// Gates consuming each vertex, as `(gate type, gate index)`.
    pub fn consumers(&self) -> Vec<Vec<(GateType, usize)>> {
        let mut out = vec![Vec::new(); self.kappa()];
        for (k, &[u, v, _]) in self.pc.nor_gates.iter().enumerate() {
            out[u].push((GateType::Nor, k));
            if v != u {
                out[v].push((GateType::Nor, k));
            }
        }
        for (k, &[u, _, _]) in self.pc.purify_gates.iter().enumerate() {
            out[u].push((GateType::Purify, k));
        }
        out
    }

    fn compute_bounds(&self) -> Bounds {
        let (kappa, n, m) = (self.kappa() as f64, self.n() as f64, self.m() as f64);
        let h_max = 2.0 * n * m * m;
        let m_abs_max = self.m_grid.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let m_abs_sum: f64 = self.m_grid.iter().map(|v| v.abs()).sum();
        let b = 2.0 * kappa * n * m * m + kappa * m * m_abs_sum;

        let consumers = self.consumers();
        let delta_max: Vec<f64> = consumers
            .iter()
            .map(|gates| {
                gates
                    .iter()
                    .map(|(t, _)| match t {
                        GateType::Nor => G_PRIME_SUP * LAMBDA_PRIME_SUP,
                        GateType::Purify => 2.0 * L_PRIME_SUP * LAMBDA_PRIME_SUP,
                    })
                    .sum::<f64>()
                    * h_max
            })
            .collect();
        let g_inf = 3.0 * m + 2.0 * (m_abs_max + delta_max.iter().copied().fold(0.0, f64::max));
        let g = (2.0 * self.dim as f64).sqrt() * g_inf;

        let term = |first: f64, second: f64, inputs: f64| {
            second * LAMBDA_PRIME_SUP * LAMBDA_PRIME_SUP * inputs * 4.0 * n * m * h_max
                + first * LAMBDA_SECOND_SUP * 4.0 * n * m * h_max
                + first * LAMBDA_PRIME_SUP * 5.0 * n * m * m
        };
        let l = (0..self.kappa())
            .map(|q| {
                let producer = match self.output_gate[q] {
                    Some(Producer::Nor { .. }) => {
                        3.0 * m * G_PRIME_SUP * LAMBDA_PRIME_SUP * 2.0 * 4.0 * n * m
                    }
                    Some(_) => 3.0 * m * L_PRIME_SUP * LAMBDA_PRIME_SUP * 4.0 * n * m,
                    None => 0.0,
                };
                let consumer: f64 = consumers[q]
                    .iter()
                    .map(|(t, _)| match t {
                        GateType::Nor => term(G_PRIME_SUP, G_SECOND_SUP, 2.0),
                        GateType::Purify => 2.0 * term(L_PRIME_SUP, L_SECOND_SUP, 1.0),
                    })
                    .sum();
                3.0 * m + producer + 4.0 * (m_abs_max + delta_max[q]) + 2.0 * consumer
            })
            .fold(0.0, f64::max);
        Bounds { g, l, b }
    }
}
