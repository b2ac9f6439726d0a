//! Scaling regimes `σ_n = A n^{-a}`, `γ_n = B n^b` and their admissibility.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRegime {
    pub a: f64,
    pub b: f64,
    #[serde(rename = "A", default = "one")]
    pub sigma_prefactor: f64,
    #[serde(rename = "B", default = "one")]
    pub gamma_prefactor: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "reason", rename_all = "snake_case")]
pub enum Verdict {
    FluctOk,
    HydroOk,
    Reject(String),
}

impl Verdict {
    pub fn allows_hydro(&self) -> bool {
        !matches!(self, Verdict::Reject(_))
    }

    pub fn allows_fluct(&self) -> bool {
        matches!(self, Verdict::FluctOk)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sequences {
    pub sigma_n: f64,
    pub gamma_n: f64,
    pub k_n: f64,
    pub kappa_n: f64,
}

impl ScalingRegime {
    pub fn new(a: f64, b: f64, sigma_prefactor: f64, gamma_prefactor: f64) -> Result<Self> {
        let reg = ScalingRegime { a, b, sigma_prefactor, gamma_prefactor };
        reg.validate()?;
        Ok(reg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_prefactor > 0.0 && self.gamma_prefactor > 0.0) {
            return Err(Error::InvalidParams("regime prefactors A, B must be positive".into()));
        }
        if !(self.a >= 0.0 && self.b >= 0.0) {
            return Err(Error::InvalidParams("regime exponents a, b must be non-negative".into()));
        }
        Ok(())
    }

    pub fn sigma_n(&self, n: usize) -> f64 {
        self.sigma_prefactor * (n as f64).powf(-self.a)
    }

    pub fn gamma_n(&self, n: usize) -> f64 {
        self.gamma_prefactor * (n as f64).powf(self.b)
    }
}

/// Lower end of the admissible window for `b` in the fluctuation regime.
pub fn fluct_lower(a: f64) -> f64 {
    (7.0 - 28.0 * a) / 3.0
}

/// Upper end of the admissible window for `b` in the fluctuation regime.
pub fn fluct_upper(a: f64) -> f64 {
    (2.0 * a + 1.0) / 3.0
}

/// Classifies a regime. The fluctuation verdict is the stronger one and wins when both hold.
pub fn validate_regime(reg: &ScalingRegime) -> Verdict {
    let (a, b) = (reg.a, reg.b);
    let hydro = 2.0 * b < 1.0 && -6.0 * a - b + 1.5 < 0.0;
    let fluct = a > 0.2 && b >= 0.0 && b < 0.5 && b > fluct_lower(a) && b < fluct_upper(a);
    if fluct {
        return Verdict::FluctOk;
    }
    if hydro {
        return Verdict::HydroOk;
    }
    let reason = if b >= 0.5 {
        "b ≥ 1/2"
    } else if a <= 0.2 {
        "a ≤ 1/5"
    } else {
        "-6a - b + 3/2 ≥ 0"
    };
    Verdict::Reject(reason.to_string())
}

/// `(σ_n, γ_n, K_n, κ_n)` for an explicit pair `(σ_n, γ_n)`.
pub fn sequences_from(sigma_n: f64, gamma_n: f64, n: usize) -> Sequences {
    let nf = n as f64;
    let common = sigma_n.powf(1.2) * gamma_n.powf(-0.2) * nf.powf(0.8);
    Sequences { sigma_n, gamma_n, k_n: common.max(gamma_n), kappa_n: common.max(sigma_n * nf.sqrt()) }
}

pub fn compute_sequences(reg: &ScalingRegime, n: usize) -> Result<Sequences> {
    if n < 1 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    Ok(sequences_from(reg.sigma_n(n), reg.gamma_n(n), n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg(a: f64, b: f64) -> ScalingRegime {
        ScalingRegime::new(a, b, 1.0, 1.0).unwrap()
    }

    #[test]
    fn verdict_examples() {
        assert_eq!(fluct_lower(0.25), 0.0);
        assert_eq!(fluct_upper(0.25), 0.5);
        assert_eq!(validate_regime(&reg(0.25, 0.25)), Verdict::FluctOk);
        assert_eq!(validate_regime(&reg(0.1, 0.0)), Verdict::Reject("a ≤ 1/5".into()));
        assert_eq!(validate_regime(&reg(0.3, 0.6)), Verdict::Reject("b ≥ 1/2".into()));
    }

    #[test]
    fn hydro_only_window() {
        assert_eq!(validate_regime(&reg(0.2, 0.4)), Verdict::HydroOk);
        // a = 0.22: the fluctuation window closes at b = 0.48.
        assert_eq!(validate_regime(&reg(0.22, 0.49)), Verdict::HydroOk);
        assert!(matches!(validate_regime(&reg(0.21, 0.0)), Verdict::Reject(r) if r.starts_with("-6a")));
    }

    #[test]
    fn sequences_examples() {
        let s = sequences_from(1.0, 1.0, 1);
        assert_eq!(s.k_n, 1.0);
        let s = sequences_from(0.1, 2.0, 1024);
        let branch = (1.2 * 0.1f64.ln() - 0.2 * 2.0f64.ln() + 0.8 * 1024f64.ln()).exp();
        assert!((s.k_n - branch.max(2.0)).abs() < 1e-12 * s.k_n);
        let n = 100usize;
        let s = sequences_from(1.0 / n as f64, (n as f64).powf(0.6), n);
        assert!((s.k_n - 100f64.powf(0.6)).abs() < 1e-12);
    }

    #[test]
    fn bad_regime() {
        assert!(ScalingRegime::new(0.1, 0.1, 0.0, 1.0).is_err());
        assert!(ScalingRegime::new(-0.1, 0.1, 1.0, 1.0).is_err());
    }
}
