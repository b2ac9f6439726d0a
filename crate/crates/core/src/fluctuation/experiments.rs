//! Ensemble drivers shared by the command-line harness and the acceptance suite.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dynamics::{run, ChainState, SimParams, DEFAULT_CFL};
use crate::error::{Error, Result};
use crate::gibbs::{sample_chain, GibbsSpec};
use crate::potential::{ModelParams, Potential};
use crate::psystem::{solve_linear, solve_quasilinear_schedule, Profile, QuasilinearOptions, RiemannMap, TrigProfile};
use crate::regime::{validate_regime, ScalingRegime};
use crate::stats::{linear_fit, mean_se, Estimate};
use crate::thermo::{TensionTable, Thermo};

use super::ensemble::ReplicaEnsemble;
use super::field::{project_field, SiteProfile};
use super::observables::{bg_integrand, bg_statistic, hydro_error, hydro_functional, martingale_qv, martingale_qv_formula, MartingaleTracker};

/// Grid of the macroscopic solver used for centering.
pub const HYDRO_GRID: usize = 256;

fn sites(tp: &TrigProfile, n: usize) -> (Vec<f64>, Vec<f64>) {
    let prof = tp.to_profile(n);
    (prof.p, prof.r)
}

/// Hydrodynamic profile at `n` sites for each time in `times` (the σ-dependent solution).
pub fn hydro_path(thermo: &Thermo, initial: &Profile, times: &[f64], n: usize) -> Result<Vec<SiteProfile>> {
    let map = RiemannMap::for_profile(thermo, initial)?;
    let sol = solve_quasilinear_schedule(initial, times, &map, QuasilinearOptions::default())?;
    Ok(sol.snapshots[1..].iter().map(|s| SiteProfile::from_profile(s, n)).collect())
}

fn regime_checked(regime: &ScalingRegime) -> Result<()> {
    regime.validate()?;
    let verdict = validate_regime(regime);
    if !verdict.allows_hydro() {
        return Err(Error::InvalidParams(format!("scaling regime rejected: {verdict:?}")));
    }
    Ok(())
}

/// Local Gibbs initial law for the profile, and the dynamics parameters, at size `n`.
fn local_setup(pot: &Potential, beta: f64, regime: &ScalingRegime, initial: &Profile, n: usize) -> Result<(Thermo, GibbsSpec, SimParams)> {
    let sigma = regime.sigma_n(n);
    let gamma = regime.gamma_n(n);
    let thermo = Thermo::new(pot.clone(), beta, sigma)?;
    let start = SiteProfile::from_profile(initial, n);
    let spec = GibbsSpec::local_from_sites(&thermo, &start.p, &start.r)?;
    let params = SimParams::new(pot.clone(), ModelParams { beta, sigma, gamma }, n)?;
    Ok((thermo, spec, params))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HydroErrorExperiment {
    pub beta: f64,
    pub regime: ScalingRegime,
    pub sizes: Vec<usize>,
    pub replicas: usize,
    pub t_end: f64,
    pub p_exponent: f64,
    pub initial: TrigProfile,
    /// Test function `(h_p, h_r)`.
    pub test: TrigProfile,
    pub base_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SizePoint {
    pub n: usize,
    pub sigma: f64,
    pub gamma: f64,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HydroErrorReport {
    pub points: Vec<SizePoint>,
    /// `-slope` of `log E|·|^p` against `log n`.
    pub exponent: f64,
}

impl HydroErrorExperiment {
    pub fn run(&self, pot: &Potential) -> Result<HydroErrorReport> {
        regime_checked(&self.regime)?;
        let initial = self.initial.to_profile(HYDRO_GRID);
        let mut points = Vec::new();
        for &n in &self.sizes {
            let (thermo, spec, params) = local_setup(pot, self.beta, &self.regime, &initial, n)?;
            let target = hydro_path(&thermo, &initial, &[self.t_end], n)?.pop().unwrap();
            let (hp, hr) = sites(&self.test, n);
            let ens = ReplicaEnsemble::new(self.replicas, self.base_seed, format!("hydro-error-n{n}"));
            let xs = ens.map(|_, stream| {
                let mut state = sample_chain(&spec, stream)?;
                run(&mut state, &params, self.t_end, self.t_end, &mut [])?;
                hydro_functional(&state, &target, &hp, &hr)
            })?;
            let estimate = hydro_error(&xs, self.p_exponent)?;
            points.push(SizePoint { n, sigma: params.model.sigma, gamma: params.model.gamma, estimate });
        }
        let x: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
        let y: Vec<f64> = points.iter().map(|p| p.estimate.value.ln()).collect();
        let exponent = if points.len() >= 2 { -linear_fit(&x, &y).0 } else { f64::NAN };
        Ok(HydroErrorReport { points, exponent })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BgExperiment {
    pub beta: f64,
    pub regime: ScalingRegime,
    pub sizes: Vec<usize>,
    pub replicas: usize,
    pub t_end: f64,
    pub interval: f64,
    pub initial: TrigProfile,
    /// Weight `g(x)`, read from the stretch component.
    pub weight: TrigProfile,
    pub base_seed: u64,
    /// CFL number of the integrator. The noise half-step biases the stationary law at
    /// first order in the step, which this statistic amplifies by `n^{1/4}`.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
}

fn default_cfl() -> f64 {
    DEFAULT_CFL
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BgReport {
    /// Ensemble mean of `|statistic|` per size.
    pub points: Vec<SizePoint>,
    /// Last size's mean divided by the first's.
    pub ratio: f64,
}

impl BgExperiment {
    pub fn run(&self, pot: &Potential) -> Result<BgReport> {
        regime_checked(&self.regime)?;
        if !(self.interval > 0.0 && self.t_end > 0.0) {
            return Err(Error::Precondition("interval and t_end must be positive".into()));
        }
        let initial = self.initial.to_profile(HYDRO_GRID);
        let count = (self.t_end / self.interval * (1.0 - 1e-12)).ceil() as usize;
        let times: Vec<f64> = (0..=count).map(|j| if j == count { self.t_end } else { j as f64 * self.interval }).collect();
        let mut points = Vec::new();
        for &n in &self.sizes {
            let (thermo, spec, params) = local_setup(pot, self.beta, &self.regime, &initial, n)?;
            let params = params.with_cfl(self.cfl)?;
            let path = hydro_path(&thermo, &initial, &times, n)?;
            let (lo, hi) = path.iter().flat_map(|s| s.r.iter()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
            let table = TensionTable::new(&thermo, lo - 0.1, hi + 0.1, 801)?;
            let (_, g) = sites(&self.weight, n);
            let ens = ReplicaEnsemble::new(self.replicas, self.base_seed, format!("bg-n{n}"));
            let xs = ens.map(|_, stream| {
                let mut state = sample_chain(&spec, stream)?;
                let mut values = Vec::with_capacity(times.len());
                let mut obs = |s: &ChainState| -> Result<()> {
                    let hydro = &path[values.len()];
                    values.push(bg_integrand(s, hydro, &g, &params, &table)?);
                    Ok(())
                };
                run(&mut state, &params, self.t_end, self.interval, &mut [&mut obs])?;
                Ok(bg_statistic(&times, &values)?.abs())
            })?;
            points.push(SizePoint { n, sigma: params.model.sigma, gamma: params.model.gamma, estimate: mean_se(&xs) });
        }
        let ratio = match (points.first(), points.last()) {
            (Some(a), Some(b)) => b.estimate.value / a.estimate.value,
            _ => f64::NAN,
        };
        Ok(BgReport { points, ratio })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportExperiment {
    pub n: usize,
    pub replicas: usize,
    pub beta: f64,
    pub gamma: f64,
    pub pbar: f64,
    pub tau: f64,
    pub times: Vec<f64>,
    pub mode: i64,
    pub base_seed: u64,
}

/// One ensemble average set against its transported prediction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportCheck {
    pub t: f64,
    pub quantity: String,
    pub estimate: Estimate,
    pub expected: f64,
}

impl TransportCheck {
    pub fn z(&self) -> f64 {
        (self.estimate.value - self.expected) / self.estimate.se
    }
}

/// Mode-`m` transfer matrix of the linear wave flow over time `t`, built by evolving
/// the basis profiles `e_j cos(2πmx)` with [`solve_linear`].
pub fn mode_transfer(m: i64, t: f64) -> [[Complex<f64>; 2]; 2] {
    let grid = 8 * (m.unsigned_abs() as usize + 1);
    let coeff = |v: &[f64]| -> Complex<f64> {
        let g = v.len() as f64;
        v.iter()
            .enumerate()
            .map(|(j, x)| Complex::from_polar(*x, -2.0 * std::f64::consts::PI * m as f64 * j as f64 / g))
            .sum::<Complex<f64>>()
            * (2.0 / g)
    };
    let w = |j: usize| 2.0 * std::f64::consts::PI * m as f64 * j as f64 / grid as f64;
    let zero = vec![0.0; grid];
    let wave: Vec<f64> = (0..grid).map(|j| w(j).cos()).collect();
    let from_p = solve_linear(&Profile { p: wave.clone(), r: zero.clone(), t: 0.0 }, t);
    let from_r = solve_linear(&Profile { p: zero, r: wave, t: 0.0 }, t);
    [[coeff(&from_p.p), coeff(&from_r.p)], [coeff(&from_p.r), coeff(&from_r.r)]]
}

impl TransportExperiment {
    pub fn run(&self) -> Result<Vec<TransportCheck>> {
        let n = self.n;
        let thermo = Thermo::new(Potential::Zero, self.beta, 0.0)?;
        let var_r = thermo.moments(self.tau)?.var;
        let var = [1.0 / self.beta, var_r];
        let spec = GibbsSpec::constant(Potential::Zero, self.beta, 0.0, n, self.pbar, self.tau)?;
        let params = SimParams::new(Potential::Zero, ModelParams { beta: self.beta, sigma: 0.0, gamma: self.gamma }, n)?;
        let rbar = thermo.mean_stretch(self.tau)?;
        let flat = |t: f64| SiteProfile { p: vec![self.pbar; n], r: vec![rbar; n], t };
        let mut times = self.times.clone();
        times.sort_by(f64::total_cmp);
        if times.first().is_none_or(|&t| t <= 0.0) {
            return Err(Error::Precondition("transport times must be positive".into()));
        }
        let ens = ReplicaEnsemble::new(self.replicas, self.base_seed, "transport");
        // Per replica and time: |Ŷp|², |Ŷr|², Re Ŷp(t)conj Ŷp(0), Im Ŷp(t)conj Ŷr(0).
        let rows = ens.map(|_, stream| {
            let mut state = sample_chain(&spec, stream)?;
            let y0 = project_field(&state, &flat(0.0), self.mode)?;
            let mut row = Vec::with_capacity(4 * times.len());
            let mut now = 0.0;
            for &t in &times {
                run(&mut state, &params, t, t - now, &mut [])?;
                now = t;
                let y = project_field(&state, &flat(t), self.mode)?;
                row.extend([y.0.norm_sqr(), y.1.norm_sqr(), (y.0 * y0.0.conj()).re, (y.0 * y0.1.conj()).im]);
            }
            Ok(row)
        })?;
        let mut checks = Vec::new();
        for (k, &t) in times.iter().enumerate() {
            let tr = mode_transfer(self.mode, t);
            let cov = |a: usize| (0..2).map(|j| tr[a][j].norm_sqr() * var[j]).sum::<f64>();
            let expected = [cov(0), cov(1), tr[0][0].re * var[0], tr[0][1].im * var[1]];
            let names = ["var_p", "var_r", "lag_pp_re", "lag_pr_im"];
            for q in 0..4 {
                let col: Vec<f64> = rows.iter().map(|r| r[4 * k + q]).collect();
                checks.push(TransportCheck { t, quantity: names[q].into(), estimate: mean_se(&col), expected: expected[q] });
            }
        }
        Ok(checks)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MartingaleExperiment {
    pub n: usize,
    pub replicas: usize,
    pub beta: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub t_end: f64,
    pub interval: f64,
    /// Test function `(h_p, h_r)`.
    pub test: TrigProfile,
    pub base_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub second_moment: Estimate,
    pub formula: f64,
}

impl MartingaleExperiment {
    pub fn run(&self, pot: &Potential) -> Result<MartingaleReport> {
        let n = self.n;
        let spec = GibbsSpec::constant(pot.clone(), self.beta, self.sigma, n, 0.0, 0.0)?;
        let params = SimParams::new(pot.clone(), ModelParams { beta: self.beta, sigma: self.sigma, gamma: self.gamma }, n)?;
        let (hp, hr) = sites(&self.test, n);
        let ens = ReplicaEnsemble::new(self.replicas, self.base_seed, "martingale");
        let values = ens.map(|_, stream| {
            let mut state = sample_chain(&spec, stream)?;
            let mut tracker = MartingaleTracker::new(hp.clone(), hr.clone(), params.clone())?;
            run(&mut state, &params, self.t_end, self.interval, &mut [&mut tracker])?;
            tracker.value()
        })?;
        let (second_moment, formula) = martingale_qv(&values, martingale_qv_formula(&hr, self.gamma, self.t_end))?;
        Ok(MartingaleReport { second_moment, formula })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psystem::TrigTerm;

    #[test]
    fn transfer_matrix_is_the_wave_rotation() {
        let t = 0.3;
        let w = 2.0 * std::f64::consts::PI * t;
        let tr = mode_transfer(1, t);
        assert!((tr[0][0] - Complex::new(w.cos(), 0.0)).norm() < 1e-12);
        assert!((tr[1][1] - Complex::new(w.cos(), 0.0)).norm() < 1e-12);
        assert!((tr[0][1] - Complex::new(0.0, w.sin())).norm() < 1e-12);
        assert!((tr[1][0] - Complex::new(0.0, w.sin())).norm() < 1e-12);
    }

    #[test]
    fn small_transport_run_is_consistent() {
        let exp = TransportExperiment { n: 32, replicas: 40, beta: 1.0, gamma: 1.0, pbar: 0.0, tau: 0.0, times: vec![0.1], mode: 1, base_seed: 2 };
        let checks = exp.run().unwrap();
        assert_eq!(checks.len(), 4);
        assert!(checks.iter().all(|c| c.z().is_finite() && c.z().abs() < 5.0), "{checks:?}");
    }

    #[test]
    fn small_martingale_run() {
        let exp = MartingaleExperiment {
            n: 16,
            replicas: 40,
            beta: 1.0,
            sigma: 0.0,
            gamma: 1.0,
            t_end: 0.1,
            interval: 1e-3,
            test: TrigProfile { terms: vec![TrigTerm { k: 1, r_cos: 1.0, ..Default::default() }], ..Default::default() },
            base_seed: 4,
        };
        let rep = exp.run(&Potential::Zero).unwrap();
        let z = (rep.second_moment.value - rep.formula) / rep.second_moment.se;
        assert!(z.abs() < 5.0, "{rep:?}");
    }

    #[test]
    fn rejected_regime_is_an_error() {
        let exp = HydroErrorExperiment {
            beta: 1.0,
            regime: ScalingRegime { a: 0.1, b: 0.9, sigma_prefactor: 1.0, gamma_prefactor: 1.0 },
            sizes: vec![16],
            replicas: 10,
            t_end: 0.1,
            p_exponent: 1.0,
            initial: TrigProfile::default(),
            test: TrigProfile::default(),
            base_seed: 0,
        };
        assert!(matches!(exp.run(&Potential::OneMinusCosine), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn tiny_hydro_and_bg_runs() {
        let initial = TrigProfile { terms: vec![TrigTerm { k: 1, p_sin: 0.2, r_cos: 0.2, ..Default::default() }], ..Default::default() };
        let regime = ScalingRegime { a: 0.25, b: 0.25, sigma_prefactor: 1.0, gamma_prefactor: 1.0 };
        let h = HydroErrorExperiment {
            beta: 1.0,
            regime,
            sizes: vec![16, 32],
            replicas: 12,
            t_end: 0.05,
            p_exponent: 1.0,
            initial: initial.clone(),
            test: TrigProfile { p0: 1.0, r0: 1.0, ..Default::default() },
            base_seed: 1,
        };
        let rep = h.run(&Potential::OneMinusCosine).unwrap();
        assert_eq!(rep.points.len(), 2);
        assert!(rep.exponent.is_finite());
        let bg = BgExperiment { beta: 1.0, regime, sizes: vec![16, 32], replicas: 10, t_end: 0.02, interval: 1e-3, initial, weight: TrigProfile { r0: 1.0, ..Default::default() }, base_seed: 1, cfl: DEFAULT_CFL };
        let rep = bg.run(&Potential::OneMinusCosine).unwrap();
        assert!(rep.points.iter().all(|p| p.estimate.value > 0.0) && rep.ratio.is_finite());
    }
}

