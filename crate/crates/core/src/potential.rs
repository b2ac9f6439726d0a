//! Anharmonic perturbation `U`, the composite potential `r²/2 + σU(r)` and model parameters.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Zero,
    OneMinusCosine,
    User,
}

/// Perturbation with `U(0) = U'(0) = 0` and `|U''| ≤ 1`.
#[derive(Clone)]
pub enum Potential {
    Zero,
    OneMinusCosine,
    User(UserPotential),
}

#[derive(Clone)]
pub struct UserPotential {
    name: String,
    u: ScalarFn,
    u1: ScalarFn,
    u2: ScalarFn,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Zero => write!(f, "Potential::Zero"),
            Potential::OneMinusCosine => write!(f, "Potential::OneMinusCosine"),
            Potential::User(p) => write!(f, "Potential::User({})", p.name),
        }
    }
}

impl Default for Potential {
    fn default() -> Self {
        Potential::OneMinusCosine
    }
}

const CHECK_TOL: f64 = 1e-12;
const CHECK_HALF_WIDTH: f64 = 50.0;
const CHECK_STEP: f64 = 1e-3;

impl Potential {
    /// Registers a user-supplied perturbation after checking the structural invariants
    /// on the grid `|r| ≤ 50` with step `1e-3`.
    pub fn user<U, U1, U2>(name: impl Into<String>, u: U, u1: U1, u2: U2) -> Result<Self>
    where
        U: Fn(f64) -> f64 + Send + Sync + 'static,
        U1: Fn(f64) -> f64 + Send + Sync + 'static,
        U2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let name = name.into();
        if u(0.0).abs() > CHECK_TOL {
            return Err(Error::InvalidPotential(format!("{name}: U(0) = {} != 0", u(0.0))));
        }
        if u1(0.0).abs() > CHECK_TOL {
            return Err(Error::InvalidPotential(format!("{name}: U'(0) = {} != 0", u1(0.0))));
        }
        let steps = (2.0 * CHECK_HALF_WIDTH / CHECK_STEP).round() as usize;
        for k in 0..=steps {
            let r = -CHECK_HALF_WIDTH + k as f64 * CHECK_STEP;
            let (a, b, c) = (u(r), u1(r), u2(r));
            if !(a.is_finite() && b.is_finite() && c.is_finite()) {
                return Err(Error::InvalidPotential(format!("{name}: non-finite value at r = {r}")));
            }
            if c.abs() > 1.0 + CHECK_TOL {
                return Err(Error::InvalidPotential(format!("{name}: |U''({r})| = {} > 1", c.abs())));
            }
        }
        Ok(Potential::User(UserPotential { name, u: Arc::new(u), u1: Arc::new(u1), u2: Arc::new(u2) }))
    }

    pub fn kind(&self) -> PotentialKind {
        match self {
            Potential::Zero => PotentialKind::Zero,
            Potential::OneMinusCosine => PotentialKind::OneMinusCosine,
            Potential::User(_) => PotentialKind::User,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Potential::Zero => "zero",
            Potential::OneMinusCosine => "one-minus-cosine",
            Potential::User(p) => &p.name,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Potential::Zero)
    }

    #[inline]
    pub fn u(&self, r: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::OneMinusCosine => 1.0 - r.cos(),
            Potential::User(p) => (p.u)(r),
        }
    }

    #[inline]
    pub fn u1(&self, r: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::OneMinusCosine => r.sin(),
            Potential::User(p) => (p.u1)(r),
        }
    }

    #[inline]
    pub fn u2(&self, r: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::OneMinusCosine => r.cos(),
            Potential::User(p) => (p.u2)(r),
        }
    }

    /// `V_σ(r) = r²/2 + σU(r)`.
    #[inline]
    pub fn v(&self, sigma: f64, r: f64) -> f64 {
        0.5 * r * r + sigma * self.u(r)
    }

    /// `V'_σ(r)`. Exactly `r` when `σ = 0`.
    #[inline]
    pub fn v1(&self, sigma: f64, r: f64) -> f64 {
        if sigma == 0.0 {
            r
        } else {
            r + sigma * self.u1(r)
        }
    }

    #[inline]
    pub fn v2(&self, sigma: f64, r: f64) -> f64 {
        1.0 + sigma * self.u2(r)
    }

    /// Fills `out[i] = V'_σ(r[i])`.
    pub fn v1_into(&self, sigma: f64, r: &[f64], out: &mut [f64]) {
        debug_assert_eq!(r.len(), out.len());
        if sigma == 0.0 || self.is_zero() {
            out.copy_from_slice(r);
            return;
        }
        match self {
            Potential::OneMinusCosine => {
                for (o, &x) in out.iter_mut().zip(r) {
                    *o = x + sigma * x.sin();
                }
            }
            _ => {
                for (o, &x) in out.iter_mut().zip(r) {
                    *o = x + sigma * self.u1(x);
                }
            }
        }
    }
}

/// Inverse temperature, anharmonicity and noise strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub sigma: f64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(beta: f64, sigma: f64, gamma: f64) -> Result<Self> {
        let p = ModelParams { beta, sigma, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParams(format!("beta must be > 0, got {}", self.beta)));
        }
        if !(0.0..1.0).contains(&self.sigma) {
            return Err(Error::InvalidParams(format!("sigma must lie in [0, 1), got {}", self.sigma)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParams(format!("gamma must be > 0, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Evaluates `V_σ` (order 0) or its first two derivatives.
pub fn potential_eval(pot: &Potential, params: &ModelParams, r: f64, order: u8) -> Result<f64> {
    match order {
        0 => Ok(pot.v(params.sigma, r)),
        1 => Ok(pot.v1(params.sigma, r)),
        2 => Ok(pot.v2(params.sigma, r)),
        _ => Err(Error::Precondition(format!("derivative order must be 0, 1 or 2, got {order}"))),
    }
}
