//! Construction parameters.
//!
//! The reference choice
//!
//! ```text
//! n = 2^64 m^14 κ² / ρ^8,   ε = ρ^18 / (2^140 m^28 κ^4),   δ = ρ² / (2^10 m²)
//! ```
//!
//! is kept in exact rational arithmetic. It is far too large to materialize,
//! so experiments run with user-chosen [`GdaParams`] and the prerequisite
//! relations the consistency argument needs are reported as [`Premises`].

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the per-player dimension `d = κ n m`.
pub const DEFAULT_DIM_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamMode {
    Paper,
    Custom,
}

/// Materializable parameters: copies per vertex, stationarity tolerance and
/// regularizer grid spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdaParams {
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub mode: ParamMode,
}

impl GdaParams {
    pub fn custom(n: usize, epsilon: f64, delta: f64) -> Result<Self> {
        let p = Self {
            n,
            epsilon,
            delta,
            mode: ParamMode::Custom,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {} must be > 0",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta = {} must be > 0",
                self.delta
            )));
        }
        Ok(())
    }
}

/// An exact rational that serializes as `"p/q"` (or `"p"` when integral).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Exact(pub BigRational);

impl Exact {
    pub fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v).map(Exact)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn int(v: u64) -> Self {
        Exact(BigRational::from_integer(BigInt::from(v)))
    }

    /// `log2` when the value is a (possibly negative) power of two.
    pub fn log2_exact(&self) -> Option<i64> {
        let (num, den) = (self.0.numer(), self.0.denom());
        if !num.is_positive() {
            return None;
        }
        let pow2 = |v: &BigInt| -> Option<u64> {
            let bits = v.bits();
            (bits > 0 && *v == BigInt::one() << (bits - 1)).then_some(bits - 1)
        };
        Some(pow2(num)? as i64 - pow2(den)? as i64)
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Exact {
    type Err = Error;

    /// Accepts `p`, `p/q`, or a plain decimal such as `0.125` (parsed exactly).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse rational {s:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            return Ok(Exact(BigRational::new(p, q)));
        }
        if let Some((int, frac)) = s.split_once('.') {
            if !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let neg = int.starts_with('-');
            let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
            let num: BigInt = digits.parse().map_err(|_| bad())?;
            let den = num_traits::pow(BigInt::from(10), frac.len());
            let r = BigRational::new(num, den);
            return Ok(Exact(if neg { -r } else { r }));
        }
        let p: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Exact(BigRational::from_integer(p)))
    }
}

impl Serialize for Exact {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn pow2(e: u32) -> BigRational {
    BigRational::from_integer(BigInt::one() << e as usize)
}

fn int(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn powi(r: &BigRational, e: i32) -> BigRational {
    num_traits::Pow::pow(r, e)
}

/// The reference parameter record in exact arithmetic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperParams {
    pub m: u64,
    pub kappa: u64,
    pub rho: Exact,
    pub n: Exact,
    pub epsilon: Exact,
    pub delta: Exact,
    /// `d = κ n m` with `n` rounded up.
    pub dim: Exact,
    pub dim_cap: u64,
    pub materializable: bool,
    pub mode: ParamMode,
}

impl PaperParams {
    pub fn new(m: u64, kappa: u64, rho: Exact, dim_cap: u64) -> Result<Self> {
        if m == 0 || kappa == 0 {
            return Err(Error::InvalidParameter("m and kappa must be >= 1".into()));
        }
        if !(rho.0.is_positive() && rho.0 <= BigRational::one()) {
            return Err(Error::InvalidParameter(format!(
                "rho = {rho} must lie in (0, 1]"
            )));
        }
        let (mr, kr, r) = (int(m), int(kappa), &rho.0);
        let n = pow2(64) * powi(&mr, 14) * powi(&kr, 2) / powi(r, 8);
        let epsilon = powi(r, 18) / (pow2(140) * powi(&mr, 28) * powi(&kr, 4));
        let delta = powi(r, 2) / (pow2(10) * powi(&mr, 2));
        let dim = n.ceil() * &kr * &mr;
        let materializable = dim <= int(dim_cap);
        Ok(Self {
            m,
            kappa,
            rho,
            n: Exact(n),
            epsilon: Exact(epsilon),
            delta: Exact(delta),
            dim: Exact(dim),
            dim_cap,
            materializable,
            mode: ParamMode::Paper,
        })
    }

    pub fn premises(&self) -> Premises {
        Premises::evaluate(
            &int(self.m),
            &int(self.kappa),
            &self.rho.0,
            &self.n.0,
            &self.epsilon.0,
            &self.delta.0,
        )
    }

    /// Materializes the record, refusing when `κ n m` is above the cap.
    pub fn to_gda_params(&self) -> Result<GdaParams> {
        if !self.materializable {
            return Err(Error::CapExceeded {
                what: "dimension d = kappa * n * m".into(),
                size: self.dim.to_string(),
                cap: self.dim_cap.to_string(),
            });
        }
        Ok(GdaParams {
            n: self
                .n
                .0
                .ceil()
                .to_integer()
                .to_usize()
                .unwrap_or(usize::MAX),
            epsilon: self.epsilon.to_f64(),
            delta: self.delta.to_f64(),
            mode: ParamMode::Paper,
        })
    }
}

/// Prerequisite relations between `n`, `ε`, `δ`, `ρ` used by the
/// well-guessed-copy and consistency arguments. Evaluated exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Premises {
    /// `2^24 m^6 κ² / δ^4 ≤ n`
    pub n_large: bool,
    /// `ε ≤ δ³ / (2^16 m^4 κ²)`
    pub eps_small_for_count: bool,
    /// `ε ≤ δ / n`
    pub eps_le_delta_over_n: bool,
    /// `δ ≤ ρ² / (2^9 m²)`
    pub delta_small: bool,
    /// `ε ≤ ρ / 2`
    pub eps_le_half_rho: bool,
}

impl Premises {
    pub fn evaluate(
        m: &BigRational,
        kappa: &BigRational,
        rho: &BigRational,
        n: &BigRational,
        eps: &BigRational,
        delta: &BigRational,
    ) -> Self {
        let two = |e| pow2(e);
        Self {
            n_large: two(24) * powi(m, 6) * powi(kappa, 2) / powi(delta, 4) <= *n,
            eps_small_for_count: *eps <= powi(delta, 3) / (two(16) * powi(m, 4) * powi(kappa, 2)),
            eps_le_delta_over_n: *eps <= delta / n,
            delta_small: *delta <= powi(rho, 2) / (two(9) * powi(m, 2)),
            eps_le_half_rho: *eps <= rho / int(2),
        }
    }

    /// Premises for materialized parameters; floats convert to rationals exactly.
    pub fn for_params(m: usize, kappa: usize, rho: f64, p: &GdaParams) -> Self {
        let ex = |v: f64| BigRational::from_float(v).unwrap_or_else(BigRational::zero);
        Self::evaluate(
            &int(m as u64),
            &int(kappa as u64),
            &ex(rho),
            &int(p.n as u64),
            &ex(p.epsilon),
            &ex(p.delta),
        )
    }

    /// Premises of the count of well-guessed copies.
    pub fn count(&self) -> bool {
        self.n_large && self.eps_small_for_count
    }

    /// Premises of the `s_q = 1` consistency statement.
    pub fn consistency_one(&self) -> bool {
        self.count() && self.delta_small && self.eps_le_half_rho
    }

    pub fn all(&self) -> bool {
        self.count() && self.eps_le_delta_over_n && self.delta_small && self.eps_le_half_rho
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(s: &str) -> Exact {
        s.parse().unwrap()
    }

    #[test]
    fn unit_case_is_powers_of_two() {
        let p = PaperParams::new(1, 1, ex("1"), DEFAULT_DIM_CAP).unwrap();
        assert_eq!(p.n.to_string(), "18446744073709551616");
        assert_eq!(p.n.log2_exact(), Some(64));
        assert_eq!(p.delta.log2_exact(), Some(-10));
        assert_eq!(p.epsilon.log2_exact(), Some(-140));
        assert!(!p.materializable);
        assert!(p.to_gda_params().is_err());
    }

    #[test]
    fn delta_for_m2_rho_half() {
        let p = PaperParams::new(2, 3, ex("1/2"), DEFAULT_DIM_CAP).unwrap();
        assert_eq!(p.delta.log2_exact(), Some(-14));
        assert_eq!(p.delta.to_string(), "1/16384");
    }

    #[test]
    fn paper_premises_hold() {
        for (m, k, r) in [(1, 1, "1"), (2, 3, "1/2"), (5, 17, "3/7"), (9, 2, "0.01")] {
            let p = PaperParams::new(m, k, ex(r), DEFAULT_DIM_CAP).unwrap();
            assert!(p.premises().all(), "{m} {k} {r}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(PaperParams::new(0, 1, ex("1"), 10).is_err());
        assert!(PaperParams::new(1, 1, ex("3/2"), 10).is_err());
        assert!(PaperParams::new(1, 1, ex("0"), 10).is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(ex("0.125"), ex("1/8"));
        assert_eq!(ex("-0.5"), ex("-1/2"));
        assert_eq!(ex("4/8").to_string(), "1/2");
        assert_eq!(ex("12").to_string(), "12");
        assert!("1/0".parse::<Exact>().is_err());
        assert!("abc".parse::<Exact>().is_err());
    }

    #[test]
    fn custom_params_validate() {
        assert!(GdaParams::custom(0, 1e-3, 0.1).is_err());
        assert!(GdaParams::custom(2, 0.0, 0.1).is_err());
        assert!(GdaParams::custom(2, 1e-3, -1.0).is_err());
        assert!(GdaParams::custom(2, 1e-3, 0.5).is_ok());
    }
}
