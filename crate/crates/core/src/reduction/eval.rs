//! Objective, gradient and per-vertex diagnostics.
//!
//! `f = f_NOR + f_PURIFY + φ` where each gate multiplies a smooth gate value
//! of its inputs' thresholded distances by the linking term `H_w` of an
//! output, and `φ = Σ_v Σ_i M_i ‖x^v_i - y^v_i‖²`.

use serde::{Deserialize, Serialize};

use super::{GdaInstance, JointPoint, Producer};
use crate::error::Result;
use crate::gates::{g, g_prime, l, l_prime, lambda, lambda_prime};

/// Per-point quantities shared by every evaluation route.
pub(crate) struct Pass {
    /// `(D x^q_i + c)` in flat index order.
    pub op: Vec<f64>,
    /// `Dᵀ (y^q_i - x^q_i)` in flat index order.
    pub dt_diff: Vec<f64>,
    pub dist2: Vec<f64>,
    pub l1: Vec<f64>,
    pub lam: Vec<f64>,
    pub lam_prime: Vec<f64>,
    pub h: Vec<f64>,
}

impl GdaInstance {
    pub(crate) fn pass(&self, p: &JointPoint) -> Pass {
        let (kappa, n, m) = (self.kappa(), self.n(), self.m());
        let mut op = vec![0.0; self.dim];
        let mut dt_diff = vec![0.0; self.dim];
        let mut dist2 = vec![0.0; kappa];
        let mut l1 = vec![0.0; kappa];
        let mut h = vec![0.0; kappa];
        let mut gap = vec![0.0; m];
        for q in 0..kappa {
            for i in 0..n {
                let lo = (q * n + i) * m;
                let (x, y) = (&p.x[lo..lo + m], &p.y[lo..lo + m]);
                self.vi.operator_into(x, &mut op[lo..lo + m]);
                for j in 0..m {
                    gap[j] = y[j] - x[j];
                }
                self.vi.transpose_mul_into(&gap, &mut dt_diff[lo..lo + m]);
                for j in 0..m {
                    dist2[q] += gap[j] * gap[j];
                    l1[q] += gap[j].abs();
                    h[q] += op[lo + j] * gap[j];
                }
            }
        }
        let lam = dist2.iter().map(|&r| lambda(r, m)).collect();
        let lam_prime = dist2.iter().map(|&r| lambda_prime(r, m)).collect();
        Pass {
            op,
            dt_diff,
            dist2,
            l1,
            lam,
            lam_prime,
            h,
        }
    }

    /// `s_q` from the single gate producing `q`.
    pub(crate) fn gate_values(&self, pass: &Pass) -> Vec<f64> {
        self.output_gate
            .iter()
            .map(|prod| match *prod {
                Some(Producer::Nor { u, v, .. }) => g(pass.lam[u] + pass.lam[v]),
                Some(Producer::PurifyHigh { u, .. }) => l(pass.lam[u] + 0.25),
                Some(Producer::PurifyLow { u, .. }) => l(pass.lam[u] - 0.25),
                None => 0.0,
            })
            .collect()
    }

    /// `Δ_q`: the gradient weight on `x^q - y^q` contributed by gates that
    /// take `q` as an input.
    pub(crate) fn noise_terms(&self, pass: &Pass) -> Vec<f64> {
        let mut delta = vec![0.0; self.kappa()];
        for &[u, v, w] in &self.pc.nor_gates {
            let gp = g_prime(pass.lam[u] + pass.lam[v]) * pass.h[w];
            delta[u] += gp * pass.lam_prime[u];
            delta[v] += gp * pass.lam_prime[v];
        }
        for &[u, v, w] in &self.pc.purify_gates {
            let lu = pass.lam[u];
            delta[u] += pass.lam_prime[u]
                * (l_prime(lu + 0.25) * pass.h[v] + l_prime(lu - 0.25) * pass.h[w]);
        }
        delta
    }

    pub fn eval_f(&self, p: &JointPoint) -> Result<f64> {
        self.check_point(p)?;
        Ok(self.f_unchecked(p))
    }

    /// `f` without the box check; the formula extends to all of `R^{2d}`.
    pub fn f_unchecked(&self, p: &JointPoint) -> f64 {
        let pass = self.pass(p);
        let f_nor: f64 = self
            .pc
            .nor_gates
            .iter()
            .map(|&[u, v, w]| g(pass.lam[u] + pass.lam[v]) * pass.h[w])
            .sum();
        let f_purify: f64 = self
            .pc
            .purify_gates
            .iter()
            .map(|&[u, v, w]| l(pass.lam[u] + 0.25) * pass.h[v] + l(pass.lam[u] - 0.25) * pass.h[w])
            .sum();
        f_nor + f_purify + self.regularizer(p)
    }

    /// `φ(x, y)`.
    pub fn regularizer(&self, p: &JointPoint) -> f64 {
        let (n, m) = (self.n(), self.m());
        let mut total = 0.0;
        for q in 0..self.kappa() {
            for i in 0..n {
                let lo = (q * n + i) * m;
                let sq: f64 = (lo..lo + m).map(|k| (p.x[k] - p.y[k]).powi(2)).sum();
                total += self.m_grid[i] * sq;
            }
        }
        total
    }

    /// Gradient through the aggregated `s_q` and `Δ_q`:
    ///
    /// ```text
    /// ∂f/∂x^q_{i,j} = s_q [(Dᵀ(y^q_i - x^q_i))_j - (D x^q_i + c)_j] + 2(M_i + Δ_q)(x - y)^q_{i,j}
    /// ∂f/∂y^q_{i,j} = s_q (D x^q_i + c)_j - 2(M_i + Δ_q)(x - y)^q_{i,j}
    /// ```
    pub fn eval_grad(&self, p: &JointPoint) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_point(p)?;
        Ok(self.grad_unchecked(p))
    }

    pub(crate) fn grad_unchecked(&self, p: &JointPoint) -> (Vec<f64>, Vec<f64>) {
        let (n, m) = (self.n(), self.m());
        let pass = self.pass(p);
        let s = self.gate_values(&pass);
        let delta = self.noise_terms(&pass);
        let mut gx = vec![0.0; self.dim];
        let mut gy = vec![0.0; self.dim];
        for q in 0..self.kappa() {
            for i in 0..n {
                let weight = 2.0 * (self.m_grid[i] + delta[q]);
                let lo = (q * n + i) * m;
                for k in lo..lo + m {
                    let pull = weight * (p.x[k] - p.y[k]);
                    gx[k] = s[q] * (pass.dt_diff[k] - pass.op[k]) + pull;
                    gy[k] = s[q] * pass.op[k] - pull;
                }
            }
        }
        (gx, gy)
    }

    /// Gradient accumulated gate term by gate term with the chain rule,
    /// never forming `s_q` or `Δ_q`.
    pub fn eval_grad_direct(&self, p: &JointPoint) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_point(p)?;
        let (n, m) = (self.n(), self.m());
        let block = n * m;
        let pass = self.pass(p);
        let mut gx = vec![0.0; self.dim];
        let mut gy = vec![0.0; self.dim];

        // φ
        for k in 0..self.dim {
            let i = (k / m) % n;
            let t = 2.0 * self.m_grid[i] * (p.x[k] - p.y[k]);
            gx[k] += t;
            gy[k] -= t;
        }

        // value * ∂H_target
        let link = |target: usize, value: f64, gx: &mut [f64], gy: &mut [f64]| {
            for k in target * block..(target + 1) * block {
                gx[k] += value * (pass.dt_diff[k] - pass.op[k]);
                gy[k] += value * pass.op[k];
            }
        };
        // slope * ∂‖x^u - y^u‖²
        let dist = |u: usize, slope: f64, gx: &mut [f64], gy: &mut [f64]| {
            for k in u * block..(u + 1) * block {
                let t = 2.0 * slope * (p.x[k] - p.y[k]);
                gx[k] += t;
                gy[k] -= t;
            }
        };

        for &[u, v, w] in &self.pc.nor_gates {
            let arg = pass.lam[u] + pass.lam[v];
            link(w, g(arg), &mut gx, &mut gy);
            let outer = g_prime(arg) * pass.h[w];
            dist(u, outer * pass.lam_prime[u], &mut gx, &mut gy);
            dist(v, outer * pass.lam_prime[v], &mut gx, &mut gy);
        }
        for &[u, v, w] in &self.pc.purify_gates {
            let lu = pass.lam[u];
            link(v, l(lu + 0.25), &mut gx, &mut gy);
            dist(
                u,
                l_prime(lu + 0.25) * pass.lam_prime[u] * pass.h[v],
                &mut gx,
                &mut gy,
            );
            link(w, l(lu - 0.25), &mut gx, &mut gy);
            dist(
                u,
                l_prime(lu - 0.25) * pass.lam_prime[u] * pass.h[w],
                &mut gx,
                &mut gy,
            );
        }
        Ok((gx, gy))
    }

    pub fn diagnostics(&self, p: &JointPoint) -> Result<NodeDiagnostics> {
        self.check_point(p)?;
        let pass = self.pass(p);
        let s = self.gate_values(&pass);
        let delta = self.noise_terms(&pass);
        let nodes = (0..self.kappa())
            .map(|q| NodeDiag {
                s: s[q],
                delta: delta[q],
                h: pass.h[q],
                dist2: pass.dist2[q],
                l1: pass.l1[q],
                lambda: pass.lam[q],
            })
            .collect();
        Ok(NodeDiagnostics { nodes })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDiag {
    /// Gate value of the producing gate.
    pub s: f64,
    /// Noise term from consuming gates.
    pub delta: f64,
    /// Linking term `H_q`.
    pub h: f64,
    /// `‖x^q - y^q‖²`
    pub dist2: f64,
    /// `‖x^q - y^q‖₁`
    pub l1: f64,
    /// `λ(‖x^q - y^q‖²)`
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDiagnostics {
    pub nodes: Vec<NodeDiag>,
}
