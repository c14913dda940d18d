//! Reading a stationary point back as a solution of one of the two source
//! problems, and auditing the inequalities that make that reading sound.
//!
//! Decoding first scans every copy `x^q_i` for an approximate LinVI
//! solution. Failing that, vertex `v` is assigned `λ(‖x^v - y^v‖²)` when that
//! value is pure and ⊥ otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lin_vi::SlackReport;
use crate::params::Premises;
use crate::pure_circuit::{Assignment, Trit, Verification};
use crate::reduction::{GdaInstance, JointPoint, NodeDiagnostics};
use crate::solver::check_stationary;

/// Additive slack on every audited inequality, covering rounding only.
pub const AUDIT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DecodeOutcome {
    Linvi {
        q: usize,
        /// 1-based copy index.
        i: usize,
        z: Vec<f64>,
        slack: SlackReport,
    },
    Pc {
        assignment: Assignment,
        verification: Verification,
    },
    Inconclusive {
        assignment: Assignment,
        verification: Verification,
        /// Copy with the largest worst-component slack.
        nearest_q: usize,
        nearest_i: usize,
        nearest_slack: SlackReport,
    },
}

impl DecodeOutcome {
    pub fn kind(&self) -> &'static str {
        match self {
            DecodeOutcome::Linvi { .. } => "linvi",
            DecodeOutcome::Pc { .. } => "pc",
            DecodeOutcome::Inconclusive { .. } => "inconclusive",
        }
    }
}

impl GdaInstance {
    /// The copy `x^q_i` (1-based `i`).
    pub fn copy<'a>(&self, p: &'a JointPoint, q: usize, i: usize) -> &'a [f64] {
        let m = self.m();
        let lo = (q * self.n() + (i - 1)) * m;
        &p.x[lo..lo + m]
    }

    fn copy_slack(&self, p: &JointPoint, q: usize, i: usize, rho: f64) -> SlackReport {
        self.vi
            .check_solution(self.copy(p, q, i), Some(rho))
            .expect("copies of an in-box point are in the box")
    }

    /// First copy, in ascending `(q, i)`, that solves the LinVI instance.
    pub fn find_linvi_copy(&self, p: &JointPoint, rho: f64) -> Option<(usize, usize, SlackReport)> {
        (0..self.kappa())
            .flat_map(|q| (1..=self.n()).map(move |i| (q, i)))
            .map(|(q, i)| (q, i, self.copy_slack(p, q, i, rho)))
            .find(|(_, _, s)| s.pass)
    }
}

/// `b(v) = λ(‖x^v - y^v‖²)` when that is 0 or 1, ⊥ otherwise.
pub fn interpret(diag: &NodeDiagnostics) -> Assignment {
    Assignment(
        diag.nodes
            .iter()
            .map(|d| {
                if d.lambda == 0.0 {
                    Trit::Zero
                } else if d.lambda == 1.0 {
                    Trit::One
                } else {
                    Trit::Bot
                }
            })
            .collect(),
    )
}

/// `rho` defaults to the LinVI instance's stored value.
pub fn decode(inst: &GdaInstance, p: &JointPoint, rho: Option<f64>) -> Result<DecodeOutcome> {
    inst.check_point(p)?;
    let rho = rho.unwrap_or(inst.vi.rho);
    if let Some((q, i, slack)) = inst.find_linvi_copy(p, rho) {
        return Ok(DecodeOutcome::Linvi {
            q,
            i,
            z: inst.copy(p, q, i).to_vec(),
            slack,
        });
    }
    let assignment = interpret(&inst.diagnostics(p)?);
    let verification = inst.pc.verify_assignment(&assignment)?;
    if verification.ok {
        return Ok(DecodeOutcome::Pc {
            assignment,
            verification,
        });
    }
    let mut nearest: Option<(usize, usize, SlackReport)> = None;
    for q in 0..inst.kappa() {
        for i in 1..=inst.n() {
            let s = inst.copy_slack(p, q, i, rho);
            if nearest
                .as_ref()
                .is_none_or(|(_, _, b)| s.min_slack > b.min_slack)
            {
                nearest = Some((q, i, s));
            }
        }
    }
    let (nearest_q, nearest_i, nearest_slack) = nearest.expect("instances have at least one copy");
    Ok(DecodeOutcome::Inconclusive {
        assignment,
        verification,
        nearest_q,
        nearest_i,
        nearest_slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub bound: f64,
    pub measured: f64,
    pub holds: bool,
    /// Whether the parameter prerequisites of the statement hold.
    pub premises: bool,
}

impl Check {
    fn upper(bound: f64, measured: f64, premises: bool) -> Self {
        Self {
            bound,
            measured,
            holds: measured <= bound + AUDIT_SLACK,
            premises,
        }
    }

    fn lower(bound: f64, measured: f64, premises: bool) -> Self {
        Self {
            bound,
            measured,
            holds: measured >= bound - AUDIT_SLACK,
            premises,
        }
    }
}

/// `|x^q_{i,j} - y^q_{i,j}| ≤ 3 s_q m / |M_i + Δ_q| + sqrt(ε / |M_i + Δ_q|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateCheck {
    pub q: usize,
    pub i: usize,
    pub j: usize,
    /// `None` where `M_i + Δ_q = 0` and the bound does not apply.
    pub check: Option<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexAudit {
    pub q: usize,
    pub s: f64,
    pub delta: f64,
    /// `‖x^q - y^q‖₁ ≤ 14 m² log(n) / δ + m n sqrt(ε/δ)`
    pub l1: Check,
    /// `|Δ_q| ≤ 2^9 m³ κ log(n) / δ + 2^5 m² n κ sqrt(ε/δ)`
    pub noise: Check,
    /// `#{i : |Δ_q + M_i| ≤ 1} ≥ 1/δ`
    pub well_guessed: Check,
    /// `‖x^q - y^q‖² ≤ 3m`, audited when `s_q = 0`.
    pub zero_consistency: Option<Check>,
    /// `‖x^q - y^q‖² ≥ 3m + 1`, audited when `s_q = 1` and no copy of `q`
    /// solves the LinVI instance.
    pub one_consistency: Option<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaAudit {
    pub epsilon: f64,
    pub rho: f64,
    pub premises: Premises,
    /// The log-sum absorption step of the ℓ₁ bound needs `n ≥ 3` and
    /// `δ ≤ m ln n`.
    pub sublinear_premise: bool,
    pub coordinates: Vec<CoordinateCheck>,
    pub coordinates_skipped: usize,
    pub vertices: Vec<VertexAudit>,
    /// Coordinate, ℓ₁ and noise bounds all hold.
    pub unconditional_holds: bool,
}

impl LemmaAudit {
    pub fn coordinate_bound_holds(&self) -> bool {
        self.coordinates
            .iter()
            .all(|c| c.check.is_none_or(|k| k.holds))
    }

    /// Every check whose premises hold also holds.
    pub fn conditional_holds(&self) -> bool {
        self.vertices.iter().all(|v| {
            [Some(v.well_guessed), v.zero_consistency, v.one_consistency]
                .into_iter()
                .flatten()
                .all(|c| c.holds || !c.premises)
        })
    }
}

/// Refuses points that are not `eps`-stationary.
pub fn lemma_audit(
    inst: &GdaInstance,
    p: &JointPoint,
    eps: f64,
    rho: Option<f64>,
) -> Result<LemmaAudit> {
    let report = check_stationary(inst, p, eps)?;
    if !report.pass {
        return Err(Error::NotStationary {
            eps,
            violation: report.max_violation,
        });
    }
    let rho = rho.unwrap_or(inst.vi.rho);
    let diag = inst.diagnostics(p)?;
    let (kappa, n, m) = (inst.kappa(), inst.n(), inst.m());
    let (kf, nf, mf) = (kappa as f64, n as f64, m as f64);
    let delta = inst.params.delta;
    let premises = Premises::for_params(m, kappa, rho, &inst.params);
    let sublinear_premise = n >= 3 && delta <= mf * nf.ln();

    let mut coordinates = Vec::with_capacity(inst.dim);
    let mut skipped = 0;
    for q in 0..kappa {
        let node = &diag.nodes[q];
        for i in 1..=n {
            let w = (inst.weight(i) + node.delta).abs();
            for j in 0..m {
                let k = (q * n + (i - 1)) * m + j;
                let check = (w != 0.0).then(|| {
                    let bound = 3.0 * node.s * mf / w + (eps / w).sqrt();
                    Check::upper(bound, (p.x[k] - p.y[k]).abs(), true)
                });
                skipped += usize::from(check.is_none());
                coordinates.push(CoordinateCheck { q, i, j, check });
            }
        }
    }

    let ratio = (eps / delta).sqrt();
    let l1_bound = 14.0 * mf * mf * nf.ln() / delta + mf * nf * ratio;
    let noise_bound = 512.0 * mf.powi(3) * kf * nf.ln() / delta + 32.0 * mf * mf * nf * kf * ratio;
    let vertices = diag
        .nodes
        .iter()
        .enumerate()
        .map(|(q, node)| {
            let well = (1..=n)
                .filter(|&i| (node.delta + inst.weight(i)).abs() <= 1.0)
                .count();
            let zero_consistency = (node.s == 0.0)
                .then(|| Check::upper(3.0 * mf, node.dist2, premises.eps_le_delta_over_n));
            let one_consistency = (node.s == 1.0
                && (1..=n).all(|i| !inst.copy_slack(p, q, i, rho).pass))
            .then(|| Check::lower(3.0 * mf + 1.0, node.dist2, premises.consistency_one()));
            VertexAudit {
                q,
                s: node.s,
                delta: node.delta,
                l1: Check::upper(l1_bound, node.l1, sublinear_premise),
                noise: Check::upper(noise_bound, node.delta.abs(), sublinear_premise),
                well_guessed: Check::lower(1.0 / delta, well as f64, premises.count()),
                zero_consistency,
                one_consistency,
            }
        })
        .collect::<Vec<_>>();

    let mut audit = LemmaAudit {
        epsilon: eps,
        rho,
        premises,
        sublinear_premise,
        coordinates,
        coordinates_skipped: skipped,
        vertices,
        unconditional_holds: false,
    };
    audit.unconditional_holds = audit.coordinate_bound_holds()
        && audit.vertices.iter().all(|v| v.l1.holds && v.noise.holds);
    Ok(audit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    /// All parameter prerequisites hold, so one branch is guaranteed.
    pub premises_hold: bool,
    /// First copy solving the LinVI instance, if any.
    pub linvi_branch: Option<(usize, usize)>,
    /// Every vertex with `s_q ∈ {0,1}` has `λ(‖x^q - y^q‖²) = s_q`.
    pub consistency_branch: bool,
    pub inconsistent_vertices: Vec<usize>,
    /// False only when the premises hold and neither branch was observed.
    pub holds: bool,
}

pub fn dichotomy_check(
    inst: &GdaInstance,
    p: &JointPoint,
    eps: f64,
    rho: Option<f64>,
) -> Result<DichotomyReport> {
    let report = check_stationary(inst, p, eps)?;
    if !report.pass {
        return Err(Error::NotStationary {
            eps,
            violation: report.max_violation,
        });
    }
    let rho = rho.unwrap_or(inst.vi.rho);
    let premises_hold = Premises::for_params(inst.m(), inst.kappa(), rho, &inst.params).all();
    let linvi_branch = inst.find_linvi_copy(p, rho).map(|(q, i, _)| (q, i));
    let diag = inst.diagnostics(p)?;
    let inconsistent_vertices: Vec<usize> = diag
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, d)| (d.s == 1.0 && d.lambda != 1.0) || (d.s == 0.0 && d.lambda != 0.0))
        .map(|(q, _)| q)
        .collect();
    let consistency_branch = inconsistent_vertices.is_empty();
    Ok(DichotomyReport {
        premises_hold,
        holds: !premises_hold || linvi_branch.is_some() || consistency_branch,
        linvi_branch,
        consistency_branch,
        inconsistent_vertices,
    })
}
