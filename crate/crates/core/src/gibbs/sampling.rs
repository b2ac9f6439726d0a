//! Exact one-site sampling by Gaussian-envelope rejection, and product/local Gibbs chains.
//!
//! Since `U(0) = U'(0) = 0` and `|U''| ≤ 1` force `|U(r)| ≤ r²/2`, the target density
//! `exp{-β(r²/2 + σU(r) - τr)}` is dominated by `exp{-β((1-σ)r²/2 - τr)}`, a Gaussian with
//! mean `τ/(1-σ)` and precision `β(1-σ)`. The acceptance ratio is `exp{-βσ(U(r) + r²/2)} ≤ 1`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dynamics::ChainState;
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::rng::Stream;
use crate::thermo::{Thermo, TAU_MAX};

pub const MAX_REJECTIONS: u64 = 1_000_000;

/// Acceptance probability of the rejection sampler at `r`.
#[inline]
pub fn acceptance_probability(pot: &Potential, sigma: f64, beta: f64, r: f64) -> f64 {
    (-beta * sigma * (pot.u(r) + 0.5 * r * r)).exp()
}

/// One draw from `π_{τ,σ}`.
pub fn sample_site<R: Rng + ?Sized>(pot: &Potential, tau: f64, sigma: f64, beta: f64, rng: &mut R) -> Result<f64> {
    if !(0.0..1.0).contains(&sigma) {
        return Err(Error::InvalidParams(format!("sigma must lie in [0, 1), got {sigma}")));
    }
    let mean = tau / (1.0 - sigma);
    let sd = 1.0 / (beta * (1.0 - sigma)).sqrt();
    if sigma == 0.0 || pot.is_zero() {
        let z: f64 = rng.sample(StandardNormal);
        return Ok(mean + sd * z);
    }
    for _ in 0..MAX_REJECTIONS {
        let z: f64 = rng.sample(StandardNormal);
        let r = mean + sd * z;
        let u: f64 = rng.random();
        if u < acceptance_probability(pot, sigma, beta, r) {
            return Ok(r);
        }
    }
    Err(Error::SamplerStuck(MAX_REJECTIONS))
}

/// Site-dependent product measure `ν_{p̄,τ,σ}`: `p_i ~ N(p̄_i, 1/β)`, `r_i ~ π_{τ_i,σ}`.
#[derive(Debug, Clone)]
pub struct GibbsSpec {
    pub beta: f64,
    pub sigma: f64,
    pub pot: Potential,
    pub pbar: Vec<f64>,
    pub tau: Vec<f64>,
}

impl GibbsSpec {
    pub fn new(pot: Potential, beta: f64, sigma: f64, pbar: Vec<f64>, tau: Vec<f64>) -> Result<Self> {
        if pbar.len() != tau.len() || pbar.is_empty() {
            return Err(Error::Precondition(format!("profile lengths differ: {} vs {}", pbar.len(), tau.len())));
        }
        if let Some(t) = tau.iter().find(|t| !(t.abs() <= TAU_MAX)) {
            return Err(Error::Range { value: *t, lo: -TAU_MAX, hi: TAU_MAX });
        }
        Thermo::new(pot.clone(), beta, sigma)?;
        Ok(GibbsSpec { beta, sigma, pot, pbar, tau })
    }

    /// Equilibrium with constant parameters.
    pub fn constant(pot: Potential, beta: f64, sigma: f64, n: usize, pbar: f64, tau: f64) -> Result<Self> {
        Self::new(pot, beta, sigma, vec![pbar; n], vec![tau; n])
    }

    /// Local Gibbs state with mean momentum `p(i/n)` and mean stretch `r(i/n)`; the tension
    /// profile is obtained by inverting the mean stretch.
    pub fn local(thermo: &Thermo, n: usize, p: impl Fn(f64) -> f64, r: impl Fn(f64) -> f64) -> Result<Self> {
        let pbar = (0..n).map(|i| p(i as f64 / n as f64)).collect();
        let tau = (0..n).map(|i| thermo.tension(r(i as f64 / n as f64))).collect::<Result<Vec<_>>>()?;
        Self::new(thermo.pot.clone(), thermo.beta, thermo.sigma, pbar, tau)
    }

    /// Local Gibbs state from site-wise mean momenta and mean stretches.
    pub fn local_from_sites(thermo: &Thermo, pbar: &[f64], rbar: &[f64]) -> Result<Self> {
        let tau = rbar.iter().map(|&r| thermo.tension(r)).collect::<Result<Vec<_>>>()?;
        Self::new(thermo.pot.clone(), thermo.beta, thermo.sigma, pbar.to_vec(), tau)
    }

    pub fn n(&self) -> usize {
        self.tau.len()
    }
}

/// Independent per-site draws; the stream is moved into the returned state and keeps
/// driving its dynamics.
pub fn sample_chain(spec: &GibbsSpec, mut rng: Stream) -> Result<ChainState> {
    let n = spec.n();
    let sd_p = 1.0 / spec.beta.sqrt();
    let mut p = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(n);
    for i in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        p.push(spec.pbar[i] + sd_p * z);
        r.push(sample_site(&spec.pot, spec.tau[i], spec.sigma, spec.beta, &mut rng)?);
    }
    ChainState::new(p, r, 0.0, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;
    use crate::stats::{ks_critical_1pct, ks_statistic, mean_se, normal_cdf};

    #[test]
    fn gaussian_case_passes_ks() {
        let mut rng = derive_stream(1, 0, "ks-gauss");
        let xs: Vec<f64> = (0..100_000).map(|_| sample_site(&Potential::OneMinusCosine, 0.7, 0.0, 2.0, &mut rng).unwrap()).collect();
        let sd = 1.0 / 2f64.sqrt();
        let d = ks_statistic(&xs, |x| normal_cdf((x - 0.7) / sd));
        assert!(d < ks_critical_1pct(xs.len()), "D = {d}");
    }

    #[test]
    fn acceptance_probability_range() {
        let pot = Potential::OneMinusCosine;
        for &(tau, sigma) in &[(0.0, 0.1), (1.0, 0.3), (-2.0, 0.5)] {
            let mode = tau / (1.0 - sigma);
            let a = acceptance_probability(&pot, sigma, 1.0, mode);
            assert!(a > 0.0 && a <= 1.0);
        }
        assert_eq!(acceptance_probability(&pot, 0.0, 1.0, 3.7), 1.0);
    }

    #[test]
    fn sample_mean_matches_quadrature() {
        let pot = Potential::OneMinusCosine;
        let th = Thermo::new(pot.clone(), 1.0, 0.3).unwrap();
        let mut rng = derive_stream(2, 0, "mean");
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_site(&pot, 0.8, 0.3, 1.0, &mut rng).unwrap()).collect();
        let est = mean_se(&xs);
        let exact = th.mean_stretch(0.8).unwrap();
        assert!((est.value - exact).abs() < 4.0 * est.se, "{} vs {} (se {})", est.value, exact, est.se);
    }

    #[test]
    fn local_profile_and_constant_chain() {
        let pot = Potential::OneMinusCosine;
        let th = Thermo::new(pot.clone(), 1.0, 0.2).unwrap();
        let spec = GibbsSpec::local(&th, 16, |x| x, |x| (2.0 * std::f64::consts::PI * x).sin()).unwrap();
        assert_eq!(spec.n(), 16);
        assert!((th.mean_stretch(spec.tau[4]).unwrap() - 1.0).abs() < 1e-10);
        assert!(GibbsSpec::new(pot.clone(), 1.0, 0.1, vec![0.0; 3], vec![0.0; 4]).is_err());
        assert!(GibbsSpec::new(pot, 1.0, 0.1, vec![0.0], vec![25.0]).is_err());
    }
}
