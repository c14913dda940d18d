//! Linear variational inequalities on the unit box, checked componentwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default approximation for generated instances. The hardness result only
/// promises some constant, so the value is plain data.
pub const DEFAULT_RHO: f64 = 0.1;

/// Largest dimension `brute_force_solve` accepts.
pub const BRUTE_FORCE_MAX_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLinVi", into = "RawLinVi")]
pub struct LinViInstance {
    pub m: usize,
    /// Row-major `m × m`.
    pub d: Vec<f64>,
    pub c: Vec<f64>,
    pub rho: f64,
}

#[derive(Serialize, Deserialize)]
struct RawLinVi {
    m: usize,
    #[serde(rename = "D")]
    d: Vec<Vec<f64>>,
    c: Vec<f64>,
    rho: f64,
}

impl TryFrom<RawLinVi> for LinViInstance {
    type Error = Error;

    fn try_from(raw: RawLinVi) -> Result<Self> {
        if raw.d.len() != raw.m || raw.d.iter().any(|row| row.len() != raw.m) {
            return Err(Error::InvalidLinVi(format!("D must be {0} x {0}", raw.m)));
        }
        let d = raw.d.into_iter().flatten().collect();
        Self::new(raw.m, d, raw.c, raw.rho)
    }
}

impl From<LinViInstance> for RawLinVi {
    fn from(inst: LinViInstance) -> Self {
        let m = inst.m.max(1);
        Self {
            m: inst.m,
            d: inst.d.chunks(m).map(<[f64]>::to_vec).collect(),
            c: inst.c,
            rho: inst.rho,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackReport {
    /// `min over z'_j ∈ {0,1} of (Dz + c)_j (z'_j - z_j)` per component.
    pub slacks: Vec<f64>,
    pub min_slack: f64,
    pub rho: f64,
    pub pass: bool,
}

impl LinViInstance {
    pub fn new(m: usize, d: Vec<f64>, c: Vec<f64>, rho: f64) -> Result<Self> {
        let inst = Self { m, d, c, rho };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidLinVi("m must be >= 1".into()));
        }
        if self.d.len() != self.m * self.m {
            return Err(Error::InvalidLinVi(format!(
                "D has {} entries, expected {}",
                self.d.len(),
                self.m * self.m
            )));
        }
        if self.c.len() != self.m {
            return Err(Error::InvalidLinVi(format!(
                "c has {} entries, expected {}",
                self.c.len(),
                self.m
            )));
        }
        if let Some((k, v)) = self
            .d
            .iter()
            .chain(&self.c)
            .enumerate()
            .find(|(_, v)| !(-1.0..=1.0).contains(*v))
        {
            return Err(Error::InvalidLinVi(format!(
                "entry {k} = {v} outside [-1, 1]"
            )));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidLinVi(format!(
                "rho = {} must be > 0",
                self.rho
            )));
        }
        Ok(())
    }

    /// Uniform entries on [-1, 1] with `rho = DEFAULT_RHO`.
    pub fn gen_random(m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("m must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = (0..m * m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let c = (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        Ok(Self {
            m,
            d,
            c,
            rho: DEFAULT_RHO,
        })
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.d[row * self.m + col]
    }

    /// `out = D z + c`.
    pub fn operator_into(&self, z: &[f64], out: &mut [f64]) {
        for (row, o) in out.iter_mut().enumerate() {
            let dr = &self.d[row * self.m..(row + 1) * self.m];
            *o = self.c[row] + dr.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    pub fn operator(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        self.operator_into(z, &mut out);
        out
    }

    /// `out = Dᵀ v`.
    pub fn transpose_mul_into(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (row, &vr) in v.iter().enumerate() {
            let dr = &self.d[row * self.m..(row + 1) * self.m];
            for (o, a) in out.iter_mut().zip(dr) {
                *o += a * vr;
            }
        }
    }

    /// Componentwise slack with `rho` overriding the stored value when given.
    ///
    /// The expression is affine in `z'_j`, so checking both endpoints of
    /// `[0, 1]` covers every feasible `z'`.
    pub fn check_solution(&self, z: &[f64], rho: Option<f64>) -> Result<SlackReport> {
        if z.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                actual: z.len(),
            });
        }
        check_box(z)?;
        let rho = rho.unwrap_or(self.rho);
        let op = self.operator(z);
        let slacks: Vec<f64> = op
            .iter()
            .zip(z)
            .map(|(&a, &zj)| component_slack(a, zj))
            .collect();
        let min_slack = slacks.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(SlackReport {
            pass: min_slack >= -rho,
            slacks,
            min_slack,
            rho,
        })
    }

    fn min_slack_unchecked(&self, z: &[f64], op: &mut [f64]) -> f64 {
        self.operator_into(z, op);
        op.iter()
            .zip(z)
            .map(|(&a, &zj)| component_slack(a, zj))
            .fold(f64::INFINITY, f64::min)
    }

    /// Exhaustive search over the grid `{0, h, 2h, ...} ∪ {1}` for the point
    /// with the largest worst-component slack. Ties go to the point closest
    /// to the box centre, then to the lexicographically smallest.
    ///
    /// Boundary points are often exact solutions too (a positive operator
    /// component at `z_j = 0`), so the centre preference picks interior
    /// solutions when they exist.
    pub fn brute_force_solve(&self, grid_step: f64) -> Result<Vec<f64>> {
        if self.m > BRUTE_FORCE_MAX_DIM {
            return Err(Error::CapExceeded {
                what: "brute-force LinVI dimension".into(),
                size: self.m.to_string(),
                cap: BRUTE_FORCE_MAX_DIM.to_string(),
            });
        }
        if !(grid_step > 0.0 && grid_step <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "grid step {grid_step} must lie in (0, 1/2]"
            )));
        }
        let ticks = grid_ticks(grid_step);
        let k = ticks.len();
        let total = k.pow(self.m as u32);
        let mut z = vec![0.0; self.m];
        let mut op = vec![0.0; self.m];
        let mut best = (f64::NEG_INFINITY, f64::INFINITY, vec![0.0; self.m]);
        for flat in 0..total {
            // most significant digit first gives lexicographic order
            let mut rest = flat;
            for j in (0..self.m).rev() {
                z[j] = ticks[rest % k];
                rest /= k;
            }
            let s = self.min_slack_unchecked(&z, &mut op);
            if s >= best.0 {
                let centre: f64 = z.iter().map(|v| (v - 0.5).powi(2)).sum();
                if s > best.0 || centre < best.1 {
                    best = (s, centre, z.clone());
                }
            }
        }
        Ok(best.2)
    }
}

/// Sorted grid points on [0, 1] with spacing `h`, always including 1.
/// `min over z'_j in {0, 1} of a (z'_j - z_j)`; adding zero turns `-0.0`
/// into `0.0`.
fn component_slack(a: f64, zj: f64) -> f64 {
    (a * (0.0 - zj)).min(a * (1.0 - zj)) + 0.0
}

pub fn grid_ticks(h: f64) -> Vec<f64> {
    let steps = (1.0 / h).floor() as usize;
    let mut ticks: Vec<f64> = (0..=steps).map(|k| (k as f64 * h).min(1.0)).collect();
    if *ticks.last().unwrap() < 1.0 {
        // tolerate 1/h that is an integer up to rounding
        if 1.0 - ticks.last().unwrap() < 1e-12 {
            *ticks.last_mut().unwrap() = 1.0;
        } else {
            ticks.push(1.0);
        }
    }
    ticks
}

pub(crate) fn check_box(z: &[f64]) -> Result<()> {
    match z.iter().position(|v| !(0.0..=1.0).contains(v)) {
        Some(index) => Err(Error::OutOfBox {
            index,
            value: z[index],
        }),
        None => Ok(()),
    }
}
