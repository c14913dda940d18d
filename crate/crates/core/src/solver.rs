//! Finding and certifying approximate fixed points of gradient
//! descent-ascent on the box.
//!
//! The x-player ascends `f`, the y-player descends. A point is
//! ε-stationary when no single-coordinate move inside the box improves
//! either player's linearization by more than ε.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lin_vi::grid_ticks;
use crate::reduction::{GdaInstance, JointPoint};

/// Environment variable overriding [`DEFAULT_EVAL_CAP`].
pub const EVAL_CAP_ENV: &str = "GDA_EVAL_CAP";
/// Default cap on the number of gradient evaluations a grid search may use.
pub const DEFAULT_EVAL_CAP: u64 = 10_000_000;

pub fn eval_cap() -> u64 {
    std::env::var(EVAL_CAP_ENV)
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_EVAL_CAP)
}

/// A min-max objective over `[0,1]^d × [0,1]^d` exposed through its gradient.
pub trait SaddleField: Sync {
    fn dim(&self) -> usize;

    /// `(∇_x f, ∇_y f)` at a point inside the box.
    fn gradient(&self, p: &JointPoint) -> (Vec<f64>, Vec<f64>);

    /// Smoothness constant used for the default step `1/L`.
    fn smoothness(&self) -> f64;
}

impl SaddleField for GdaInstance {
    fn dim(&self) -> usize {
        self.dim
    }

    fn gradient(&self, p: &JointPoint) -> (Vec<f64>, Vec<f64>) {
        self.grad_unchecked(p)
    }

    fn smoothness(&self) -> f64 {
        self.bounds.l
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub vx: Vec<f64>,
    pub vy: Vec<f64>,
    pub max_violation: f64,
    pub epsilon: f64,
    pub pass: bool,
}

/// Worst single-coordinate gain for each player. The inner objective is
/// affine in the deviation, so the endpoints 0 and 1 suffice.
pub fn stationarity(gx: &[f64], gy: &[f64], p: &JointPoint, eps: f64) -> StationarityReport {
    let vx: Vec<f64> = gx.iter().zip(&p.x).map(|(&g, &x)| x_gain(g, x)).collect();
    let vy: Vec<f64> = gy.iter().zip(&p.y).map(|(&g, &y)| x_gain(-g, y)).collect();
    let max_violation = max_violation(&vx, &vy);
    StationarityReport {
        pass: max_violation <= eps,
        vx,
        vy,
        max_violation,
        epsilon: eps,
    }
}

/// Gain from moving one ascending coordinate to the better endpoint. Never
/// negative zero.
fn x_gain(g: f64, x: f64) -> f64 {
    let v = (g * (1.0 - x)).max(-g * x);
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

fn max_violation(vx: &[f64], vy: &[f64]) -> f64 {
    vx.iter().chain(vy).copied().fold(0.0, f64::max)
}

fn violation_only(gx: &[f64], gy: &[f64], p: &JointPoint) -> f64 {
    let mut worst = 0.0f64;
    for ((&g, &x), (&h, &y)) in gx.iter().zip(&p.x).zip(gy.iter().zip(&p.y)) {
        worst = worst.max(x_gain(g, x)).max(x_gain(-h, y));
    }
    worst
}

pub fn check_stationary(
    inst: &GdaInstance,
    p: &JointPoint,
    eps: f64,
) -> Result<StationarityReport> {
    let (gx, gy) = inst.eval_grad(p)?;
    Ok(stationarity(&gx, &gy, p, eps))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gda,
    Extragradient,
    Grid,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Gda => "gda",
            Method::Extragradient => "extragradient",
            Method::Grid => "grid",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    /// Step size; `None` means `1/L`.
    pub step: Option<f64>,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Stop once the violation drops to this value.
    pub target: f64,
    /// Iterations per trajectory epoch.
    pub epoch: usize,
    /// Grid spacing for `Method::Grid`.
    pub grid_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Extragradient,
            step: None,
            max_iters: 10_000,
            restarts: 1,
            seed: 0,
            target: 1e-6,
            epoch: 100,
            grid_step: 0.25,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.step {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter(format!("step {s} must be > 0")));
            }
        }
        if self.max_iters == 0 || self.restarts == 0 || self.epoch == 0 {
            return Err(Error::InvalidParameter(
                "max_iters, restarts and epoch must be >= 1".into(),
            ));
        }
        if self.target.is_nan() || self.target < 0.0 {
            return Err(Error::InvalidParameter("target must be >= 0".into()));
        }
        Ok(())
    }

    fn step_for<F: SaddleField + ?Sized>(&self, field: &F) -> f64 {
        self.step.unwrap_or_else(|| 1.0 / field.smoothness())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Violation at the starting point.
    pub initial_violation: f64,
    /// Best violation seen by the end of each epoch.
    pub epoch_best: Vec<f64>,
    /// Updates performed.
    pub iterations: usize,
    /// Update after which the best point was reached (0 = start).
    pub best_iteration: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub point: JointPoint,
    pub max_violation: f64,
    pub trajectory: Trajectory,
}

fn project(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// `(Π(x + η ∇_x f), Π(y - η ∇_y f))`
fn gda_map(p: &JointPoint, gx: &[f64], gy: &[f64], step: f64) -> JointPoint {
    JointPoint {
        x: p.x
            .iter()
            .zip(gx)
            .map(|(x, g)| project(x + step * g))
            .collect(),
        y: p.y
            .iter()
            .zip(gy)
            .map(|(y, g)| project(y - step * g))
            .collect(),
    }
}

fn finite_gradient(gx: &[f64], gy: &[f64], iteration: usize) -> Result<()> {
    if gx.iter().chain(gy).all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteGradient { iteration })
    }
}

struct Tracker {
    best: (f64, usize, JointPoint),
    traj: Trajectory,
    epoch: usize,
}

impl Tracker {
    fn new(p0: &JointPoint, v0: f64, epoch: usize) -> Self {
        Self {
            best: (v0, 0, p0.clone()),
            traj: Trajectory {
                initial_violation: v0,
                epoch_best: Vec::new(),
                iterations: 0,
                best_iteration: 0,
            },
            epoch,
        }
    }

    /// Records the iterate reached after `iteration` updates.
    fn record(&mut self, iteration: usize, p: &JointPoint, v: f64) {
        if v < self.best.0 {
            self.best = (v, iteration, p.clone());
        }
        self.traj.iterations = iteration;
        if iteration.is_multiple_of(self.epoch) {
            self.traj.epoch_best.push(self.best.0);
        }
    }

    fn finish(mut self) -> SolveOutcome {
        if !self.traj.iterations.is_multiple_of(self.epoch) {
            self.traj.epoch_best.push(self.best.0);
        }
        self.traj.best_iteration = self.best.1;
        SolveOutcome {
            max_violation: self.best.0,
            point: self.best.2,
            trajectory: self.traj,
        }
    }
}

fn check_start<F: SaddleField + ?Sized>(field: &F, p0: &JointPoint) -> Result<()> {
    for v in [&p0.x, &p0.y] {
        if v.len() != field.dim() {
            return Err(Error::DimensionMismatch {
                expected: field.dim(),
                actual: v.len(),
            });
        }
    }
    crate::lin_vi::check_box(&p0.x)?;
    crate::lin_vi::check_box(&p0.y)
}

/// Simultaneous projected gradient descent-ascent. Returns the best iterate
/// visited, which is not necessarily the last.
pub fn projected_gda<F: SaddleField + ?Sized>(
    field: &F,
    p0: &JointPoint,
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    check_start(field, p0)?;
    let step = cfg.step_for(field);
    let mut p = p0.clone();
    let (mut gx, mut gy) = field.gradient(&p);
    finite_gradient(&gx, &gy, 0)?;
    let mut tracker = Tracker::new(&p, violation_only(&gx, &gy, &p), cfg.epoch);
    if tracker.best.0 <= cfg.target {
        return Ok(tracker.finish());
    }
    for it in 1..=cfg.max_iters {
        p = gda_map(&p, &gx, &gy, step);
        (gx, gy) = field.gradient(&p);
        finite_gradient(&gx, &gy, it)?;
        let v = violation_only(&gx, &gy, &p);
        tracker.record(it, &p, v);
        if v <= cfg.target {
            break;
        }
    }
    Ok(tracker.finish())
}

/// Extragradient: extrapolate with the gradient at the current point, then
/// update from the current point with the gradient at the extrapolation.
pub fn extragradient<F: SaddleField + ?Sized>(
    field: &F,
    p0: &JointPoint,
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    check_start(field, p0)?;
    let step = cfg.step_for(field);
    let mut p = p0.clone();
    let (mut gx, mut gy) = field.gradient(&p);
    finite_gradient(&gx, &gy, 0)?;
    let mut tracker = Tracker::new(&p, violation_only(&gx, &gy, &p), cfg.epoch);
    if tracker.best.0 <= cfg.target {
        return Ok(tracker.finish());
    }
    for it in 1..=cfg.max_iters {
        let half = gda_map(&p, &gx, &gy, step);
        let (hx, hy) = field.gradient(&half);
        finite_gradient(&hx, &hy, it)?;
        p = gda_map(&p, &hx, &hy, step);
        (gx, gy) = field.gradient(&p);
        finite_gradient(&gx, &gy, it)?;
        let v = violation_only(&gx, &gy, &p);
        tracker.record(it, &p, v);
        if v <= cfg.target {
            break;
        }
    }
    Ok(tracker.finish())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub point: JointPoint,
    pub max_violation: f64,
    pub evaluations: u64,
}

/// Exhaustive search of the product grid with spacing `h` (endpoints always
/// included) for the smallest maximum violation. Ties go to the
/// lexicographically smallest `(x, y)`.
pub fn grid_search<F: SaddleField + ?Sized>(field: &F, h: f64, cap: u64) -> Result<GridOutcome> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "grid step {h} must lie in (0, 1]"
        )));
    }
    let ticks = grid_ticks(h);
    let k = ticks.len() as u64;
    let d = field.dim();
    let total = (0..2 * d).try_fold(1u64, |acc, _| acc.checked_mul(k));
    let total = match total {
        Some(t) if t <= cap => t,
        _ => {
            return Err(Error::CapExceeded {
                what: "grid evaluations".into(),
                size: format!("{k}^{}", 2 * d),
                cap: cap.to_string(),
            })
        }
    };
    let decode = |mut flat: u64| {
        let mut coords = vec![0.0; 2 * d];
        for c in coords.iter_mut().rev() {
            *c = ticks[(flat % k) as usize];
            flat /= k;
        }
        let y = coords.split_off(d);
        JointPoint { x: coords, y }
    };
    let chunk = 4096u64;
    let chunks = total.div_ceil(chunk);
    let (best_v, best_flat) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut best = (f64::INFINITY, u64::MAX);
            for flat in c * chunk..((c + 1) * chunk).min(total) {
                let p = decode(flat);
                let (gx, gy) = field.gradient(&p);
                let v = violation_only(&gx, &gy, &p);
                if v < best.0 {
                    best = (v, flat);
                }
            }
            best
        })
        .reduce(
            || (f64::INFINITY, u64::MAX),
            |a, b| {
                if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    Ok(GridOutcome {
        point: decode(best_flat),
        max_violation: best_v,
        evaluations: total,
    })
}

/// Runs the configured method from `p0` (ignored for the grid method).
pub fn solve_from<F: SaddleField + ?Sized>(
    field: &F,
    p0: &JointPoint,
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    match cfg.method {
        Method::Gda => projected_gda(field, p0, cfg),
        Method::Extragradient => extragradient(field, p0, cfg),
        Method::Grid => {
            let g = grid_search(field, cfg.grid_step, eval_cap())?;
            Ok(SolveOutcome {
                max_violation: g.max_violation,
                trajectory: Trajectory {
                    initial_violation: g.max_violation,
                    epoch_best: vec![g.max_violation],
                    iterations: g.evaluations as usize,
                    best_iteration: 0,
                },
                point: g.point,
            })
        }
    }
}

/// One run per start point, in parallel; the winner is the smallest
/// violation, ties to the earliest start.
pub fn solve_restarts<F: SaddleField + ?Sized>(
    field: &F,
    starts: &[JointPoint],
    cfg: &SolverConfig,
) -> Result<(usize, SolveOutcome)> {
    let runs: Vec<Result<SolveOutcome>> = starts
        .par_iter()
        .map(|p0| solve_from(field, p0, cfg))
        .collect();
    let mut best: Option<(usize, SolveOutcome)> = None;
    for (r, run) in runs.into_iter().enumerate() {
        let run = run?;
        if best
            .as_ref()
            .is_none_or(|(_, b)| run.max_violation < b.max_violation)
        {
            best = Some((r, run));
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("no start points".into()))
}
