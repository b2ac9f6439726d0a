use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, integrate_legendre};
use crate::thermo::Thermo;

/// One-dimensional laws whose centered mgf, tails and `E e^{s|X|}` can be evaluated.
#[derive(Debug, Clone)]
pub enum Distribution {
    Gaussian { var: f64 },
    /// Uniform on `[-half_width, half_width]`.
    Uniform { half_width: f64 },
    /// Two-sided exponential with the given scale; its mgf diverges at `|s| ≥ 1/scale`.
    Laplace { scale: f64 },
    /// Stretch under `π_{τ,σ}`.
    Stretch { thermo: Thermo, tau: f64 },
}

const LEGENDRE_POINTS: usize = 64;

impl Distribution {
    fn stretch_density(thermo: &Thermo, tau: f64) -> Result<(impl Fn(f64) -> f64 + '_, f64, f64)> {
        let m = thermo.moments(tau)?;
        let (log_z, beta, sigma) = (m.log_z, thermo.beta, thermo.sigma);
        let dens = move |r: f64| (-beta * (thermo.pot.v(sigma, r) - tau * r) - log_z).exp();
        Ok((dens, m.mean, m.var.sqrt()))
    }

    pub fn variance(&self) -> Result<f64> {
        Ok(match self {
            Distribution::Gaussian { var } => *var,
            Distribution::Uniform { half_width } => half_width * half_width / 3.0,
            Distribution::Laplace { scale } => 2.0 * scale * scale,
            Distribution::Stretch { thermo, tau } => thermo.moments(*tau)?.var,
        })
    }

    /// `log E e^{s(X - EX)}`, `+∞` where it diverges.
    pub fn log_mgf(&self, s: f64) -> Result<f64> {
        Ok(match self {
            Distribution::Gaussian { var } => 0.5 * var * s * s,
            Distribution::Uniform { half_width: a } => integrate_legendre(|x| (s * x).exp(), -a, *a, LEGENDRE_POINTS).ln() - (2.0 * a).ln(),
            Distribution::Laplace { scale } => {
                let bs = scale * s;
                if bs.abs() >= 1.0 {
                    f64::INFINITY
                } else {
                    -(1.0 - bs * bs).ln()
                }
            }
            Distribution::Stretch { thermo, tau } => {
                let m = thermo.moments(*tau)?;
                let shifted = tau + s / thermo.beta;
                match thermo.log_partition(shifted) {
                    Ok(lz) => lz - m.log_z - s * m.mean,
                    Err(Error::Range { .. }) => return Err(Error::Precondition(format!("s = {s} tilts tau outside the tabulated range"))),
                    Err(e) => return Err(e),
                }
            }
        })
    }

    /// `P(|X - EX| ≥ λ)`.
    pub fn tail(&self, lambda: f64) -> Result<f64> {
        let lambda = lambda.max(0.0);
        Ok(match self {
            Distribution::Gaussian { var } => libm::erfc(lambda / (2.0 * var).sqrt()),
            Distribution::Uniform { half_width } => (1.0 - lambda / half_width).max(0.0),
            Distribution::Laplace { scale } => (-lambda / scale).exp(),
            Distribution::Stretch { thermo, tau } => {
                let (dens, mean, sd) = Self::stretch_density(thermo, *tau)?;
                let reach = lambda + 40.0 * sd;
                let upper = adaptive_simpson(&dens, mean + lambda, mean + reach, 1e-15);
                let lower = adaptive_simpson(&dens, mean - reach, mean - lambda, 1e-15);
                (upper + lower).min(1.0)
            }
        })
    }

    /// `E e^{s|X - EX|}`.
    pub fn abs_exp(&self, s: f64) -> Result<f64> {
        Ok(match self {
            Distribution::Gaussian { var } => {
                let sd = var.sqrt();
                2.0 * (0.5 * var * s * s).exp() * 0.5 * libm::erfc(-s * sd / std::f64::consts::SQRT_2)
            }
            Distribution::Uniform { half_width: a } => integrate_legendre(|x| (s * x).exp(), 0.0, *a, LEGENDRE_POINTS) / a,
            Distribution::Laplace { scale } => {
                if s * scale >= 1.0 {
                    f64::INFINITY
                } else {
                    1.0 / (1.0 - s * scale)
                }
            }
            Distribution::Stretch { thermo, tau } => {
                let (dens, mean, sd) = Self::stretch_density(thermo, *tau)?;
                let reach = 40.0 * sd;
                let g = |r: f64| dens(r) * (s * (r - mean).abs()).exp();
                adaptive_simpson(&g, mean - reach, mean, 1e-14) + adaptive_simpson(&g, mean, mean + reach, 1e-14)
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubgaussianReport {
    /// `max_s 2 log E e^{sX*}/s²` over the grid, `None` if the mgf diverges on it.
    pub order: Option<f64>,
    /// `P(|X*| ≥ λ) ≤ 2 exp(-λ²/(2σ̂²))` on the λ-grid.
    pub tail_ok: bool,
    pub worst_tail_ratio: f64,
    /// `E e^{s|X*|} ≤ (1+s)/(1-s) exp(σ̂² s/2)` for `s ∈ [0, 1)`.
    pub absolute_ok: bool,
    pub worst_absolute_ratio: f64,
}

pub const S_GRID_POINTS: usize = 201;

/// Estimated sub-Gaussian order of the centered variable on `|s| ≤ s_max` (201 points,
/// `s = 0` replaced by its limit, the variance), plus the tail and absolute-moment checks.
pub fn subgaussian_order(dist: &Distribution, s_max: f64, lambda_max: f64) -> Result<SubgaussianReport> {
    if !(s_max > 0.0 && lambda_max > 0.0) {
        return Err(Error::Precondition("s_max and lambda_max must be positive".into()));
    }
    let mut order = dist.variance()?;
    for j in 0..S_GRID_POINTS {
        let s = -s_max + 2.0 * s_max * j as f64 / (S_GRID_POINTS - 1) as f64;
        if s.abs() < 1e-12 {
            continue;
        }
        let l = dist.log_mgf(s)?;
        if !l.is_finite() {
            return Ok(SubgaussianReport { order: None, tail_ok: false, worst_tail_ratio: f64::INFINITY, absolute_ok: false, worst_absolute_ratio: f64::INFINITY });
        }
        order = order.max(2.0 * l / (s * s));
    }
    let mut worst_tail_ratio = 0.0f64;
    for j in 0..=120 {
        let lambda = lambda_max * j as f64 / 120.0;
        let bound = 2.0 * (-lambda * lambda / (2.0 * order)).exp();
        worst_tail_ratio = worst_tail_ratio.max(dist.tail(lambda)? / bound);
    }
    let mut worst_absolute_ratio = 0.0f64;
    for j in 0..100 {
        let s = 0.99 * j as f64 / 99.0;
        let bound = (1.0 + s) / (1.0 - s) * (0.5 * order * s).exp();
        worst_absolute_ratio = worst_absolute_ratio.max(dist.abs_exp(s)? / bound);
    }
    Ok(SubgaussianReport {
        order: Some(order),
        tail_ok: worst_tail_ratio <= 1.0 + 1e-9,
        worst_tail_ratio,
        absolute_ok: worst_absolute_ratio <= 1.0 + 1e-9,
        worst_absolute_ratio,
    })
}
