//! Strang-split integrator: half noise step, velocity-Verlet, half noise step.
//!
//! The noise substep is written in flux form on bonds,
//! `J_i = h(nβγ/2)(V'(r_{i+1}) - V'(r_i)) - √(nγ) ΔB^i`, `r_i += J_i - J_{i-1}`,
//! so `Σr` changes only by rounding. The Verlet kicks have the same telescoping structure.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

use super::params::{IndexConvention, Scheme, SimParams};
use super::state::ChainState;

/// `(dp, dr)` of the SDE drift at the current state.
pub fn drift_fields(state: &ChainState, params: &SimParams) -> (Vec<f64>, Vec<f64>) {
    let n = state.n();
    let nf = n as f64;
    let mut f = vec![0.0; n];
    params.pot.v1_into(params.model.sigma, &state.r, &mut f);
    let c = 0.5 * nf * params.model.beta * params.model.gamma;
    let mut dp = vec![0.0; n];
    let mut dr = vec![0.0; n];
    for i in 0..n {
        let ip = (i + 1) % n;
        let im = (i + n - 1) % n;
        dp[i] = nf * (f[ip] - f[i]);
        let transport = match params.convention {
            IndexConvention::Generator => state.p[i] - state.p[im],
            IndexConvention::Shifted => state.p[ip] - state.p[i],
        };
        dr[i] = nf * transport + c * (f[ip] + f[im] - 2.0 * f[i]);
    }
    (dp, dr)
}

/// Reusable scratch buffers; `f` caches `V'(r)` between substeps.
#[derive(Debug, Clone)]
pub struct Integrator {
    params: SimParams,
    f: Vec<f64>,
    flux: Vec<f64>,
    dw1: Vec<f64>,
    dw2: Vec<f64>,
}

impl Integrator {
    pub fn new(params: SimParams) -> Result<Self> {
        params.validate()?;
        let n = params.n;
        Ok(Integrator { params, f: vec![0.0; n], flux: vec![0.0; n], dw1: vec![0.0; n], dw2: vec![0.0; n] })
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    /// Shrinks the step (used to land exactly on observation times).
    pub(crate) fn set_dt(&mut self, dt: f64) {
        debug_assert!(dt <= self.params.max_dt() * (1.0 + 1e-12));
        self.params.dt = dt;
    }

    fn check_len(&self, state: &ChainState) -> Result<()> {
        if state.n() != self.params.n {
            return Err(Error::Precondition(format!("state has {} sites, params expect {}", state.n(), self.params.n)));
        }
        Ok(())
    }

    fn refresh_force(&mut self, r: &[f64]) {
        self.params.pot.v1_into(self.params.model.sigma, r, &mut self.f);
    }

    fn kick(&self, p: &mut [f64], h: f64) {
        let n = p.len();
        let c = h * n as f64;
        for i in 0..n - 1 {
            p[i] += c * (self.f[i + 1] - self.f[i]);
        }
        p[n - 1] += c * (self.f[0] - self.f[n - 1]);
    }

    fn drift(&self, p: &[f64], r: &mut [f64], h: f64) {
        let n = p.len();
        let c = h * n as f64;
        match self.params.convention {
            IndexConvention::Generator => {
                r[0] += c * (p[0] - p[n - 1]);
                for i in 1..n {
                    r[i] += c * (p[i] - p[i - 1]);
                }
            }
            IndexConvention::Shifted => {
                for i in 0..n - 1 {
                    r[i] += c * (p[i + 1] - p[i]);
                }
                r[n - 1] += c * (p[0] - p[n - 1]);
            }
        }
    }

    /// Velocity-Verlet over `h` (negative `h` runs it backwards). Assumes the force cache
    /// matches `state.r` and leaves it matching the new stretches.
    fn verlet(&mut self, state: &mut ChainState, h: f64) {
        self.kick(&mut state.p, 0.5 * h);
        self.drift(&state.p, &mut state.r, h);
        self.refresh_force(&state.r);
        self.kick(&mut state.p, 0.5 * h);
    }

    /// Bond-flux noise substep over `h` with bond increments `dw` (variance `h`).
    fn noise(&mut self, r: &mut [f64], h: f64, which: usize) {
        let n = r.len();
        let nf = n as f64;
        let beta = self.params.model.beta;
        let gamma = self.params.model.gamma;
        let c = h * 0.5 * nf * beta * gamma;
        let s = (nf * gamma).sqrt();
        let dw = if which == 0 { &self.dw1 } else { &self.dw2 };
        for i in 0..n {
            let ip = if i + 1 == n { 0 } else { i + 1 };
            self.flux[i] = c * (self.f[ip] - self.f[i]) - s * dw[i];
        }
        r[0] += self.flux[0] - self.flux[n - 1];
        for i in 1..n {
            r[i] += self.flux[i] - self.flux[i - 1];
        }
        self.refresh_force(r);
    }

    fn draw(&mut self, rng: &mut impl Rng, h: f64) {
        let sd = h.sqrt();
        for x in self.dw1.iter_mut() {
            *x = sd * rng.sample::<f64, _>(StandardNormal);
        }
        for x in self.dw2.iter_mut() {
            *x = sd * rng.sample::<f64, _>(StandardNormal);
        }
    }

    fn one_step(&mut self, state: &mut ChainState) {
        let dt = self.params.dt;
        let noisy = self.params.model.gamma > 0.0;
        match self.params.scheme {
            Scheme::Strang => {
                if noisy {
                    self.draw(&mut state.rng, 0.5 * dt);
                    self.noise(&mut state.r, 0.5 * dt, 0);
                }
                self.verlet(state, dt);
                if noisy {
                    self.noise(&mut state.r, 0.5 * dt, 1);
                }
            }
            Scheme::EulerMaruyama => {
                if noisy {
                    self.draw(&mut state.rng, 0.5 * dt);
                }
                self.euler(state, dt);
            }
        }
        state.t += dt;
    }

    /// Explicit Euler–Maruyama with the summed increment `dw1 + dw2`.
    fn euler(&mut self, state: &mut ChainState, dt: f64) {
        let n = state.n();
        let nf = n as f64;
        let p_old = state.p.clone();
        self.kick(&mut state.p, dt);
        self.drift(&p_old, &mut state.r, dt);
        if self.params.model.gamma > 0.0 {
            for i in 0..n {
                self.dw1[i] += self.dw2[i];
            }
            let c = dt * 0.5 * nf * self.params.model.beta * self.params.model.gamma;
            let s = (nf * self.params.model.gamma).sqrt();
            for i in 0..n {
                let ip = if i + 1 == n { 0 } else { i + 1 };
                self.flux[i] = c * (self.f[ip] - self.f[i]) - s * self.dw1[i];
            }
            state.r[0] += self.flux[0] - self.flux[n - 1];
            for i in 1..n {
                state.r[i] += self.flux[i] - self.flux[i - 1];
            }
        }
        self.refresh_force(&state.r);
    }

    fn check_finite(state: &ChainState) -> Result<()> {
        match state.first_non_finite() {
            Some(site) => Err(Error::BlowUp { site, t: state.t }),
            None => Ok(()),
        }
    }

    /// `steps` consecutive steps with one force evaluation to prime the cache.
    pub fn advance(&mut self, state: &mut ChainState, steps: u64) -> Result<()> {
        self.check_len(state)?;
        self.refresh_force(&state.r);
        for _ in 0..steps {
            self.one_step(state);
            Self::check_finite(state)?;
        }
        Ok(())
    }

    pub fn step(&mut self, state: &mut ChainState) -> Result<()> {
        self.advance(state, 1)
    }

    /// One step driven by caller-supplied bond increments over the first and second half
    /// of the step (each of variance `dt/2`), for pathwise refinement studies.
    pub fn step_with_noise(&mut self, state: &mut ChainState, dw_first: &[f64], dw_second: &[f64]) -> Result<()> {
        self.check_len(state)?;
        if dw_first.len() != state.n() || dw_second.len() != state.n() {
            return Err(Error::Precondition("noise increments must have one entry per bond".into()));
        }
        self.dw1.copy_from_slice(dw_first);
        self.dw2.copy_from_slice(dw_second);
        self.refresh_force(&state.r);
        let dt = self.params.dt;
        let noisy = self.params.model.gamma > 0.0;
        match self.params.scheme {
            Scheme::Strang => {
                if noisy {
                    self.noise(&mut state.r, 0.5 * dt, 0);
                }
                self.verlet(state, dt);
                if noisy {
                    self.noise(&mut state.r, 0.5 * dt, 1);
                }
            }
            Scheme::EulerMaruyama => self.euler(state, dt),
        }
        state.t += dt;
        Self::check_finite(state)
    }

    /// The Hamiltonian substep alone over `h`; `h < 0` inverts it up to rounding.
    pub fn hamiltonian_substep(&mut self, state: &mut ChainState, h: f64) -> Result<()> {
        self.check_len(state)?;
        self.refresh_force(&state.r);
        self.verlet(state, h);
        Self::check_finite(state)
    }
}

/// One step of the configured scheme.
pub fn step(state: &mut ChainState, params: &SimParams) -> Result<()> {
    Integrator::new(params.clone())?.step(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{ModelParams, Potential};
    use crate::rng::derive_stream;
    use proptest::prelude::*;

    fn params(n: usize, sigma: f64, gamma: f64) -> SimParams {
        SimParams::new(Potential::OneMinusCosine, ModelParams { beta: 1.0, sigma, gamma }, n).unwrap()
    }

    fn state(p: Vec<f64>, r: Vec<f64>) -> ChainState {
        ChainState::new(p, r, 0.0, derive_stream(0, 0, "test")).unwrap()
    }

    #[test]
    fn constant_state_has_zero_drift() {
        let s = state(vec![0.7; 6], vec![-1.3; 6]);
        let (dp, dr) = drift_fields(&s, &params(6, 0.4, 2.0));
        assert!(dp.iter().chain(&dr).all(|x| *x == 0.0));
    }

    #[test]
    fn harmonic_drift_matches_wave_matrix() {
        let n = 4;
        let mut m = nalgebra::DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            let ip = (i + 1) % n;
            let im = (i + n - 1) % n;
            m[(i, n + ip)] += n as f64;
            m[(i, n + i)] -= n as f64;
            m[(n + i, i)] += n as f64;
            m[(n + i, im)] -= n as f64;
        }
        let x: Vec<f64> = (0..n).map(|i| (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos()).collect();
        let y: Vec<f64> = (0..n).map(|i| (2.0 * std::f64::consts::PI * i as f64 / n as f64).sin()).collect();
        let v = nalgebra::DVector::from_iterator(2 * n, x.iter().chain(&y).copied());
        let expected = &m * v;
        let (dp, dr) = drift_fields(&state(x, y), &params(n, 0.0, 0.0));
        for i in 0..n {
            assert!((dp[i] - expected[i]).abs() < 1e-12);
            assert!((dr[i] - expected[n + i]).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_harmonic_matches_matrix_exponential() {
        let n = 8;
        let t = 0.1;
        let dt = 1e-5;
        let p0: Vec<f64> = (0..n).map(|i| (0.3 * i as f64).sin() + 0.2).collect();
        let r0: Vec<f64> = (0..n).map(|i| (0.7 * i as f64).cos()).collect();
        let mut m = nalgebra::DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            let ip = (i + 1) % n;
            let im = (i + n - 1) % n;
            m[(i, n + ip)] += n as f64;
            m[(i, n + i)] -= n as f64;
            m[(n + i, i)] += n as f64;
            m[(n + i, im)] -= n as f64;
        }
        let exact = (m * t).exp() * nalgebra::DVector::from_iterator(2 * n, p0.iter().chain(&r0).copied());
        let prm = params(n, 0.0, 0.0).with_dt(dt).unwrap();
        let mut s = state(p0, r0);
        Integrator::new(prm).unwrap().advance(&mut s, (t / dt).round() as u64).unwrap();
        let err = (0..n).map(|i| (s.p[i] - exact[i]).abs().max((s.r[i] - exact[n + i]).abs())).fold(0.0, f64::max);
        assert!(err < 1e-6, "max error {err}");
    }

    #[test]
    fn verlet_is_reversible() {
        let n = 16;
        let p0: Vec<f64> = (0..n).map(|i| (1.1 * i as f64).sin()).collect();
        let r0: Vec<f64> = (0..n).map(|i| (0.4 * i as f64).cos() * 2.0).collect();
        let mut s = state(p0.clone(), r0.clone());
        let mut it = Integrator::new(params(n, 0.5, 1.0)).unwrap();
        let h = it.params().dt;
        it.hamiltonian_substep(&mut s, h).unwrap();
        it.hamiltonian_substep(&mut s, -h).unwrap();
        for i in 0..n {
            assert!((s.p[i] - p0[i]).abs() < 1e-12 && (s.r[i] - r0[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn non_finite_state_is_reported() {
        let mut s = state(vec![0.0; 8], vec![0.0; 8]);
        s.p[3] = f64::NAN;
        match step(&mut s, &params(8, 0.1, 0.0)) {
            Err(Error::BlowUp { site, .. }) => assert!(site <= 4),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn shifted_convention_breaks_energy_conservation() {
        let n = 16;
        let p0: Vec<f64> = (0..n).map(|i| (0.9 * i as f64).sin()).collect();
        let r0: Vec<f64> = (0..n).map(|i| (0.5 * i as f64).cos()).collect();
        let energy_change = |conv| {
            let prm = params(n, 0.3, 0.0).with_convention(conv).with_dt(1e-5).unwrap();
            let mut s = state(p0.clone(), r0.clone());
            let h0 = s.energy(&prm.pot, 0.3);
            Integrator::new(prm.clone()).unwrap().advance(&mut s, 10_000).unwrap();
            (s.energy(&prm.pot, 0.3) - h0).abs()
        };
        assert!(energy_change(IndexConvention::Generator) < 1e-6);
        assert!(energy_change(IndexConvention::Shifted) > 1e-3);
    }

    proptest! {
        #[test]
        fn drifts_telescope(p in prop::collection::vec(-3.0f64..3.0, 5..20), seed in 0u64..1000) {
            let n = p.len();
            let r: Vec<f64> = (0..n).map(|i| ((i as u64 + seed) as f64 * 0.37).sin() * 2.0).collect();
            let s = state(p, r);
            let (dp, dr) = drift_fields(&s, &params(n, 0.4, 1.5));
            let scale: f64 = dp.iter().chain(&dr).map(|x| x.abs()).sum::<f64>() + 1.0;
            prop_assert!(dp.iter().sum::<f64>().abs() < 1e-13 * scale);
            prop_assert!(dr.iter().sum::<f64>().abs() < 1e-13 * scale);
        }

        #[test]
        fn steps_conserve_sums(seed in 0u64..1000, sigma in 0.0f64..0.9) {
            let n = 32;
            let mut s = state(vec![0.0; n], vec![0.0; n]);
            s.rng = derive_stream(seed, 0, "cons");
            for i in 0..n {
                s.p[i] = (i as f64 * 0.3 + seed as f64).sin();
                s.r[i] = (i as f64 * 0.2).cos();
            }
            let mut it = Integrator::new(params(n, sigma, 1.0)).unwrap();
            for _ in 0..200 {
                let (sp, sr) = (s.sum_p(), s.sum_r());
                it.step(&mut s).unwrap();
                prop_assert!((s.sum_p() - sp).abs() <= 1e-14 * n as f64);
                prop_assert!((s.sum_r() - sr).abs() <= 1e-14 * n as f64);
            }
        }
    }
}
