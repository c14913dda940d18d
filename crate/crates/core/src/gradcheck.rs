//! Agreement checks between the two analytic gradient routes and central
//! finite differences of the objective.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::reduction::sample::structured_point;
use crate::reduction::{GdaInstance, JointPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Finite-difference step.
    pub h: f64,
    /// Relative tolerance between the two analytic routes.
    pub dual_rtol: f64,
    /// Relative tolerance against finite differences.
    pub fd_rtol: f64,
    /// Absolute floor for the finite-difference comparison.
    pub fd_atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            h: 1e-6,
            dual_rtol: 1e-12,
            fd_rtol: 1e-5,
            fd_atol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub points: usize,
    /// Worst `|a - b| / max(|a|, |b|, 1)` between the routes.
    pub max_dual_error: f64,
    /// Worst excess of `|analytic - fd|` over `max(rtol * max(|a|, |b|), atol)`,
    /// as a ratio; values ≤ 1 pass.
    pub max_fd_ratio: f64,
    pub dual_ok: bool,
    pub fd_ok: bool,
    pub tolerances: Tolerances,
}

impl GradCheckReport {
    pub fn ok(&self) -> bool {
        self.dual_ok && self.fd_ok
    }
}

/// Unit-floored relative difference.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Ratio of the finite-difference error to its allowance.
pub fn fd_ratio(analytic: f64, fd: f64, tol: &Tolerances) -> f64 {
    let allow = (tol.fd_rtol * analytic.abs().max(fd.abs())).max(tol.fd_atol);
    (analytic - fd).abs() / allow
}

/// Central differences of `f` in every coordinate of both players.
/// Probes may leave the box; the objective is defined on all of `R^{2d}`.
pub fn finite_difference(inst: &GdaInstance, p: &JointPoint, h: f64) -> (Vec<f64>, Vec<f64>) {
    let mut q = p.clone();
    let mut gx = vec![0.0; inst.dim];
    let mut gy = vec![0.0; inst.dim];
    for k in 0..inst.dim {
        gx[k] = central(inst, &mut q, h, |q| &mut q.x[k]);
        gy[k] = central(inst, &mut q, h, |q| &mut q.y[k]);
    }
    (gx, gy)
}

fn central(
    inst: &GdaInstance,
    q: &mut JointPoint,
    h: f64,
    coord: impl Fn(&mut JointPoint) -> &mut f64,
) -> f64 {
    let orig = *coord(q);
    *coord(q) = orig + h;
    let up = inst.f_unchecked(q);
    *coord(q) = orig - h;
    let down = inst.f_unchecked(q);
    *coord(q) = orig;
    (up - down) / (2.0 * h)
}

pub fn check_points(
    inst: &GdaInstance,
    points: &[JointPoint],
    tol: Tolerances,
) -> Result<GradCheckReport> {
    let mut max_dual = 0.0f64;
    let mut max_fd = 0.0f64;
    for p in points {
        let (ax, ay) = inst.eval_grad(p)?;
        let (bx, by) = inst.eval_grad_direct(p)?;
        let (fx, fy) = finite_difference(inst, p, tol.h);
        for k in 0..inst.dim {
            max_dual = max_dual
                .max(rel_diff(ax[k], bx[k]))
                .max(rel_diff(ay[k], by[k]));
            for (a, f) in [
                (ax[k], fx[k]),
                (bx[k], fx[k]),
                (ay[k], fy[k]),
                (by[k], fy[k]),
            ] {
                max_fd = max_fd.max(fd_ratio(a, f, &tol));
            }
        }
    }
    Ok(GradCheckReport {
        points: points.len(),
        max_dual_error: max_dual,
        max_fd_ratio: max_fd,
        dual_ok: max_dual <= tol.dual_rtol,
        fd_ok: max_fd <= 1.0,
        tolerances: tol,
    })
}

/// Checks `count` structured random points drawn from `seed`.
pub fn check_random(
    inst: &GdaInstance,
    count: usize,
    seed: u64,
    tol: Tolerances,
) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<JointPoint> = (0..count)
        .map(|_| structured_point(inst, &mut rng))
        .collect();
    check_points(inst, &points, tol)
}
