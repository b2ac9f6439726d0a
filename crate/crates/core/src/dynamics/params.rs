use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{ModelParams, Potential};

pub const DEFAULT_CFL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Strang,
    EulerMaruyama,
}

/// Which neighbour drives the stretch equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexConvention {
    /// `dr_i ∝ p_i - p_{i-1}`, consistent with `r_i = q_i - q_{i-1}`.
    #[default]
    Generator,
    /// `dr_i ∝ p_{i+1} - p_i`; kept only for sensitivity checks.
    Shifted,
}

#[derive(Debug, Clone)]
pub struct SimParams {
    pub pot: Potential,
    pub model: ModelParams,
    pub n: usize,
    pub dt: f64,
    pub cfl: f64,
    pub scheme: Scheme,
    pub convention: IndexConvention,
}

/// Largest admissible step `cfl/(n(1 + βγ))`.
pub fn max_dt(n: usize, beta: f64, gamma: f64, cfl: f64) -> f64 {
    cfl / (n as f64 * (1.0 + beta * gamma))
}

impl SimParams {
    /// Parameters with the largest admissible step at the default CFL number. Unlike
    /// [`ModelParams::new`], `γ = 0` is accepted here (the deterministic Hamiltonian chain).
    pub fn new(pot: Potential, model: ModelParams, n: usize) -> Result<Self> {
        if !(model.beta > 0.0 && model.beta.is_finite()) {
            return Err(Error::InvalidParams(format!("beta must be > 0, got {}", model.beta)));
        }
        if !(0.0..1.0).contains(&model.sigma) {
            return Err(Error::InvalidParams(format!("sigma must lie in [0, 1), got {}", model.sigma)));
        }
        if !(model.gamma >= 0.0 && model.gamma.is_finite()) {
            return Err(Error::InvalidParams(format!("gamma must be >= 0, got {}", model.gamma)));
        }
        if n < 2 {
            return Err(Error::InvalidParams(format!("need n >= 2, got {n}")));
        }
        Ok(SimParams {
            pot,
            model,
            n,
            dt: max_dt(n, model.beta, model.gamma, DEFAULT_CFL),
            cfl: DEFAULT_CFL,
            scheme: Scheme::Strang,
            convention: IndexConvention::Generator,
        })
    }

    /// Sets the CFL number and the matching largest step.
    pub fn with_cfl(mut self, cfl: f64) -> Result<Self> {
        if !(cfl > 0.0 && cfl.is_finite()) {
            return Err(Error::InvalidParams(format!("cfl must be > 0, got {cfl}")));
        }
        self.cfl = cfl;
        self.dt = self.max_dt();
        Ok(self)
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.dt = dt;
        self.validate()?;
        Ok(self)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_convention(mut self, convention: IndexConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn max_dt(&self) -> f64 {
        max_dt(self.n, self.model.beta, self.model.gamma, self.cfl)
    }

    pub fn validate(&self) -> Result<()> {
        let lim = self.max_dt();
        if !(self.dt > 0.0 && self.dt <= lim * (1.0 + 1e-12)) {
            return Err(Error::Precondition(format!("dt = {} violates the CFL bound {lim}", self.dt)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_step_is_cfl_limit() {
        let m = ModelParams { beta: 1.0, sigma: 0.1, gamma: 1.0 };
        let p = SimParams::new(Potential::OneMinusCosine, m, 100).unwrap();
        assert!((p.dt - 0.1 / 200.0).abs() < 1e-18);
        assert!(p.clone().with_dt(1e-3).is_err());
        assert!(p.with_dt(1e-4).is_ok());
        let det = ModelParams { gamma: 0.0, ..m };
        assert!(SimParams::new(Potential::OneMinusCosine, det, 8).is_ok());
        assert!(SimParams::new(Potential::OneMinusCosine, m, 1).is_err());
    }
}
