//! Piecewise-polynomial gate functions.
//!
//! `g` is the smooth NOR threshold, `ℓ` the smooth PURIFY step and `λ` the
//! distance threshold that switches on between `3m` and `3m + 1`. All three
//! are C¹ and map the reals into `[0, 1]`.
//!
//! The unchecked functions (`g`, `g_prime`, ...) are used on the evaluation
//! hot path where inputs are known to be finite. The `*_eval` / `*_prime`
//! wrappers reject non-finite input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Supremum of |g'| over the reals.
pub const G_PRIME_SUP: f64 = 6.0;
/// Supremum of |ℓ'| over the reals.
pub const L_PRIME_SUP: f64 = 9.0;
/// Supremum of |λ'| over the reals and all m.
pub const LAMBDA_PRIME_SUP: f64 = 1.5;
/// Supremum of |g''|.
pub const G_SECOND_SUP: f64 = 96.0;
/// Supremum of |ℓ''|.
pub const L_SECOND_SUP: f64 = 216.0;
/// Supremum of |λ''|.
pub const LAMBDA_SECOND_SUP: f64 = 6.0;

const G_LO: f64 = 0.25;
const G_HI: f64 = 0.5;
const L_LO: f64 = 5.0 / 12.0;
const L_HI: f64 = 7.0 / 12.0;

#[inline]
pub fn g(z: f64) -> f64 {
    if z <= G_LO {
        1.0
    } else if z >= G_HI {
        0.0
    } else {
        let t = z - G_LO;
        128.0 * t * t * t - 48.0 * t * t + 1.0
    }
}

#[inline]
pub fn g_prime(z: f64) -> f64 {
    if z <= G_LO || z >= G_HI {
        0.0
    } else {
        let t = z - G_LO;
        384.0 * t * t - 96.0 * t
    }
}

#[inline]
pub fn l(z: f64) -> f64 {
    if z <= L_LO {
        0.0
    } else if z >= L_HI {
        1.0
    } else {
        let t = z - L_LO;
        144.0 * t * t * (2.0 - 3.0 * z)
    }
}

#[inline]
pub fn l_prime(z: f64) -> f64 {
    if z <= L_LO || z >= L_HI {
        0.0
    } else {
        // d/dz [144 t² (2 - 3z)] with t = z - 5/12
        let t = z - L_LO;
        288.0 * t * (2.0 - 3.0 * z) - 432.0 * t * t
    }
}

#[inline]
pub fn lambda(z: f64, m: usize) -> f64 {
    let lo = 3.0 * m as f64;
    if z <= lo {
        0.0
    } else if z >= lo + 1.0 {
        1.0
    } else {
        let t = z - lo;
        -2.0 * t * t * t + 3.0 * t * t
    }
}

#[inline]
pub fn lambda_prime(z: f64, m: usize) -> f64 {
    let lo = 3.0 * m as f64;
    if z <= lo || z >= lo + 1.0 {
        0.0
    } else {
        let t = z - lo;
        -6.0 * t * t + 6.0 * t
    }
}

fn finite(z: f64) -> Result<f64> {
    if z.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite(z))
    }
}

fn positive_m(m: usize) -> Result<usize> {
    if m == 0 {
        Err(Error::InvalidParameter("lambda requires m >= 1".into()))
    } else {
        Ok(m)
    }
}

pub fn g_eval(z: f64) -> Result<f64> {
    finite(z).map(g)
}

pub fn g_prime_eval(z: f64) -> Result<f64> {
    finite(z).map(g_prime)
}

pub fn l_eval(z: f64) -> Result<f64> {
    finite(z).map(l)
}

pub fn l_prime_eval(z: f64) -> Result<f64> {
    finite(z).map(l_prime)
}

pub fn lambda_eval(z: f64, m: usize) -> Result<f64> {
    let m = positive_m(m)?;
    finite(z).map(|z| lambda(z, m))
}

pub fn lambda_prime_eval(z: f64, m: usize) -> Result<f64> {
    let m = positive_m(m)?;
    finite(z).map(|z| lambda_prime(z, m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    G,
    L,
    Lambda,
}

/// A gate function together with the `m` parameter λ needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateFn {
    pub kind: GateKind,
    pub m: usize,
}

impl GateFn {
    pub fn new(kind: GateKind, m: usize) -> Result<Self> {
        if kind == GateKind::Lambda {
            positive_m(m)?;
        }
        Ok(Self { kind, m })
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        match self.kind {
            GateKind::G => g_eval(z),
            GateKind::L => l_eval(z),
            GateKind::Lambda => lambda_eval(z, self.m),
        }
    }

    pub fn prime(&self, z: f64) -> Result<f64> {
        match self.kind {
            GateKind::G => g_prime_eval(z),
            GateKind::L => l_prime_eval(z),
            GateKind::Lambda => lambda_prime_eval(z, self.m),
        }
    }

    /// The points where the polynomial piece meets a constant piece.
    pub fn breakpoints(&self) -> [f64; 2] {
        match self.kind {
            GateKind::G => [G_LO, G_HI],
            GateKind::L => [L_LO, L_HI],
            GateKind::Lambda => {
                let lo = 3.0 * self.m as f64;
                [lo, lo + 1.0]
            }
        }
    }

    pub fn derivative_sup(&self) -> f64 {
        match self.kind {
            GateKind::G => G_PRIME_SUP,
            GateKind::L => L_PRIME_SUP,
            GateKind::Lambda => LAMBDA_PRIME_SUP,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_examples() {
        assert_eq!(g_eval(0.0).unwrap(), 1.0);
        assert_eq!(g_eval(0.5).unwrap(), 0.0);
        assert!((g_eval(0.375).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(g_prime_eval(0.25).unwrap(), 0.0);
        assert!((g_prime_eval(0.375).unwrap() + 6.0).abs() < 1e-12);
        assert_eq!(g_prime_eval(1.0).unwrap(), 0.0);
    }

    #[test]
    fn l_examples() {
        assert_eq!(l_eval(5.0 / 12.0).unwrap(), 0.0);
        assert_eq!(l_eval(7.0 / 12.0).unwrap(), 1.0);
        assert!((l_eval(0.5).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(l_prime_eval(5.0 / 12.0).unwrap(), 0.0);
        assert_eq!(l_prime_eval(7.0 / 12.0).unwrap(), 0.0);
    }

    #[test]
    fn l_prime_sup_on_dense_grid() {
        let n = 1_000_000;
        let max = (0..=n)
            .map(|k| l_prime(k as f64 / n as f64).abs())
            .fold(0.0, f64::max);
        assert!((8.99..=9.0).contains(&max), "{max}");
    }

    #[test]
    fn lambda_examples() {
        for m in 1..6 {
            let lo = 3.0 * m as f64;
            assert_eq!(lambda_eval(lo, m).unwrap(), 0.0);
            assert!((lambda_eval(lo + 0.5, m).unwrap() - 0.5).abs() < 1e-12);
            assert!((lambda_prime_eval(lo + 0.5, m).unwrap() - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(g_eval(f64::NAN).is_err());
        assert!(l_prime_eval(f64::INFINITY).is_err());
        assert!(lambda_eval(1.0, 0).is_err());
        assert!(lambda_prime_eval(1.0, 0).is_err());
        assert!(GateFn::new(GateKind::Lambda, 0).is_err());
    }
}
