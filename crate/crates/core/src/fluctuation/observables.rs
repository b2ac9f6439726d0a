use crate::dynamics::{drift_fields, ChainState, Observer, SimParams};
use crate::error::{Error, Result};
use crate::stats::{jackknife, Estimate};
use crate::thermo::TensionTable;

use super::field::SiteProfile;

/// Fewest replicas accepted by the ensemble estimators.
pub const MIN_REPLICAS: usize = 10;

/// Fewest observation points per unit time for the martingale reconstruction.
pub const MIN_OBSERVATIONS_PER_UNIT_TIME: f64 = 100.0;

/// `n^{-1} Σ_i (h_p(i/n)(p_i - 𝔭_i) + h_r(i/n)(r_i - 𝔯_i))`.
pub fn hydro_functional(state: &ChainState, hydro: &SiteProfile, hp: &[f64], hr: &[f64]) -> Result<f64> {
    let (dp, dr) = hydro.deviation(state)?;
    let n = dp.len() as f64;
    Ok((dp.iter().zip(hp).map(|(a, b)| a * b).sum::<f64>() + dr.iter().zip(hr).map(|(a, b)| a * b).sum::<f64>()) / n)
}

/// `E|X|^p` over replica values `X` of [`hydro_functional`], with a jackknife error.
pub fn hydro_error(samples: &[f64], p_exponent: f64) -> Result<Estimate> {
    if samples.len() < MIN_REPLICAS {
        return Err(Error::InsufficientReplicas { got: samples.len(), need: MIN_REPLICAS });
    }
    if !(1.0..2.0).contains(&p_exponent) {
        return Err(Error::Precondition(format!("moment exponent must lie in [1, 2), got {p_exponent}")));
    }
    Ok(jackknife(samples, |xs| xs.iter().map(|x| x.abs().powf(p_exponent)).sum::<f64>() / xs.len() as f64))
}

/// `E|N(0, var)|^p = var^{p/2} 2^{p/2} Γ((p+1)/2) / √π`.
pub fn gaussian_abs_moment(var: f64, p: f64) -> f64 {
    var.powf(0.5 * p) * 2f64.powf(0.5 * p) * libm::tgamma(0.5 * (p + 1.0)) / std::f64::consts::PI.sqrt()
}

/// The local functional `Φ_i = V'(r_i) - 𝔱(𝔯_i) - 𝔱'(𝔯_i)(r_i - 𝔯_i)` summed against `g`
/// with weight `n^{-1/2}`.
pub fn bg_integrand(state: &ChainState, hydro: &SiteProfile, g: &[f64], params: &SimParams, table: &TensionTable) -> Result<f64> {
    hydro.check(state)?;
    let sigma = params.model.sigma;
    let n = state.n() as f64;
    let mut acc = 0.0;
    for i in 0..state.n() {
        let (r, rr) = (state.r[i], hydro.r[i]);
        let vp = params.pot.v1(sigma, r);
        let t = table.tension(rr);
        let t1 = table.d1(rr);
        acc += g[i] * (vp - t - t1 * (r - rr));
    }
    Ok(acc / n.sqrt())
}

/// Trapezoid rule on a possibly non-uniform schedule.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum()
}

/// Time integral of the [`bg_integrand`] along one trajectory.
pub fn bg_statistic(times: &[f64], integrand: &[f64]) -> Result<f64> {
    if times.len() != integrand.len() || times.len() < 2 {
        return Err(Error::Precondition("need at least two matching time and integrand samples".into()));
    }
    Ok(trapezoid(times, integrand))
}

/// `γ t Σ_i (h_r(x_{i+1}) - h_r(x_i))²`, the predicted `E|M_t(h)|²` (the noise acts on
/// the stretch only).
pub fn martingale_qv_formula(hr: &[f64], gamma: f64, t: f64) -> f64 {
    let n = hr.len();
    gamma * t * (0..n).map(|i| (hr[(i + 1) % n] - hr[i]).powi(2)).sum::<f64>()
}

/// Observer that reconstructs `M_t(h) = Y_t(h) - Y_0(h) - ∫ L Y_s(h) ds` along a
/// trajectory from `n^{-1/2} Σ h·η` and the explicit drift.
pub struct MartingaleTracker {
    hp: Vec<f64>,
    hr: Vec<f64>,
    params: SimParams,
    times: Vec<f64>,
    pairing: Vec<f64>,
    drift: Vec<f64>,
}

impl MartingaleTracker {
    pub fn new(hp: Vec<f64>, hr: Vec<f64>, params: SimParams) -> Result<Self> {
        if hp.len() != params.n || hr.len() != params.n {
            return Err(Error::Precondition(format!("test function needs {} sites", params.n)));
        }
        Ok(MartingaleTracker { hp, hr, params, times: Vec::new(), pairing: Vec::new(), drift: Vec::new() })
    }

    fn weigh(&self, a: &[f64], b: &[f64]) -> f64 {
        let s = a.iter().zip(&self.hp).map(|(x, h)| x * h).sum::<f64>() + b.iter().zip(&self.hr).map(|(x, h)| x * h).sum::<f64>();
        s / (self.params.n as f64).sqrt()
    }

    /// `M_t` at the last observed time.
    pub fn value(&self) -> Result<f64> {
        let (Some(&t0), Some(&t1)) = (self.times.first(), self.times.last()) else {
            return Err(Error::Precondition("no observations recorded".into()));
        };
        let density = (self.times.len() - 1) as f64 / (t1 - t0);
        if !(density >= MIN_OBSERVATIONS_PER_UNIT_TIME) {
            return Err(Error::Resolution(format!("{density:.1} observations per unit time, need {MIN_OBSERVATIONS_PER_UNIT_TIME}")));
        }
        Ok(self.pairing.last().unwrap() - self.pairing[0] - trapezoid(&self.times, &self.drift))
    }
}

impl Observer for MartingaleTracker {
    fn observe(&mut self, state: &ChainState) -> Result<()> {
        let (dp, dr) = drift_fields(state, &self.params);
        self.times.push(state.t);
        self.pairing.push(self.weigh(&state.p, &state.r));
        self.drift.push(self.weigh(&dp, &dr));
        Ok(())
    }
}

/// `(E|M_t|² with error, formula value)` from per-replica martingale values.
pub fn martingale_qv(values: &[f64], formula: f64) -> Result<(Estimate, f64)> {
    if values.len() < MIN_REPLICAS {
        return Err(Error::InsufficientReplicas { got: values.len(), need: MIN_REPLICAS });
    }
    let sq: Vec<f64> = values.iter().map(|m| m * m).collect();
    Ok((crate::stats::mean_se(&sq), formula))
}
