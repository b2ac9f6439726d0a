//! One-site thermodynamics: partition function, Gibbs potential, mean stretch, tension,
//! free energy and rate function.
//!
//! Expectations under `π_{τ,σ}(dr) ∝ exp{-β(V_σ(r) - τr)}` are computed with Gauss–Hermite
//! quadrature recentred at the Gaussian mode: `r = τ + √(2/β)·x`, which leaves
//! `exp{-x²}·exp{-βσU(r)}` as the integrand. Everything is carried in log space so that
//! large `βτ²` does not overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{Potential, PotentialKind};
use crate::quadrature::{gauss_hermite, HERMITE_LADDER};
use crate::stats::linear_fit;

/// Default tabulation range for `τ`.
pub const TAU_MAX: f64 = 20.0;
/// Default number of tabulation nodes.
pub const TABLE_NODES: usize = 4001;

const LADDER_TOL: f64 = 1e-11;

/// Log-partition function and the first four cumulants of the stretch under `π_{τ,σ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteMoments {
    pub log_z: f64,
    pub mean: f64,
    pub var: f64,
    pub k3: f64,
    pub k4: f64,
}

/// Direct (non-tabulated) evaluator for one `(β, σ, U)`.
#[derive(Debug, Clone)]
pub struct Thermo {
    pub beta: f64,
    pub sigma: f64,
    pub pot: Potential,
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl Thermo {
    pub fn new(pot: Potential, beta: f64, sigma: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParams(format!("beta must be > 0, got {beta}")));
        }
        if !(0.0..1.0).contains(&sigma) {
            return Err(Error::InvalidParams(format!("sigma must lie in [0, 1), got {sigma}")));
        }
        Ok(Thermo { beta, sigma, pot })
    }

    /// True when `π_{τ,σ}` is exactly Gaussian.
    pub fn is_harmonic(&self) -> bool {
        self.sigma == 0.0 || self.pot.kind() == PotentialKind::Zero
    }

    fn check_tau(&self, tau: f64) -> Result<()> {
        if !(tau.abs() <= TAU_MAX) {
            return Err(Error::Range { value: tau, lo: -TAU_MAX, hi: TAU_MAX });
        }
        Ok(())
    }

    /// Quadrature nodes in `r` and normalized weights for expectations under `π_{τ,σ}`,
    /// together with `log Z` at this order.
    pub fn site_rule(&self, tau: f64, order: usize) -> (Vec<f64>, Vec<f64>, f64) {
        let rule = gauss_hermite(order);
        let scale = (2.0 / self.beta).sqrt();
        let bs = self.beta * self.sigma;
        let mut r = Vec::with_capacity(order);
        let mut logw = Vec::with_capacity(order);
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let ri = tau + scale * x;
            r.push(ri);
            logw.push(if w > 0.0 { w.ln() - bs * self.pot.u(ri) } else { f64::NEG_INFINITY });
        }
        let lse = log_sum_exp(&logw);
        let q = logw.iter().map(|l| (l - lse).exp()).collect();
        let log_z = scale.ln() + 0.5 * self.beta * tau * tau + lse;
        (r, q, log_z)
    }

    fn moments_at(&self, tau: f64, order: usize) -> SiteMoments {
        let (r, q, log_z) = self.site_rule(tau, order);
        let mean: f64 = r.iter().zip(&q).map(|(r, q)| r * q).sum();
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for (ri, qi) in r.iter().zip(&q) {
            let d = ri - mean;
            let d2 = d * d;
            m2 += qi * d2;
            m3 += qi * d2 * d;
            m4 += qi * d2 * d2;
        }
        SiteMoments { log_z, mean, var: m2, k3: m3, k4: m4 - 3.0 * m2 * m2 }
    }

    /// Cumulants of `π_{τ,σ}` with the Gauss–Hermite order doubled until `Z` and the mean settle.
    pub fn moments(&self, tau: f64) -> Result<SiteMoments> {
        self.check_tau(tau)?;
        if self.is_harmonic() {
            return Ok(SiteMoments {
                log_z: 0.5 * (2.0 * std::f64::consts::PI / self.beta).ln() + 0.5 * self.beta * tau * tau,
                mean: tau,
                var: 1.0 / self.beta,
                k3: 0.0,
                k4: 0.0,
            });
        }
        let mut prev = self.moments_at(tau, HERMITE_LADDER[0]);
        for &order in &HERMITE_LADDER[1..] {
            let cur = self.moments_at(tau, order);
            if (cur.log_z - prev.log_z).abs() <= LADDER_TOL && (cur.mean - prev.mean).abs() <= LADDER_TOL * (1.0 + cur.mean.abs()) {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::Quadrature(format!(
            "Gauss-Hermite ladder up to order {} did not settle at tau = {tau}",
            HERMITE_LADDER[HERMITE_LADDER.len() - 1]
        )))
    }

    /// `E_{π_{τ,σ}}[g]` with the same adaptive ladder (convergence judged on `g`).
    pub fn expect(&self, tau: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
        self.check_tau(tau)?;
        let eval = |order: usize| {
            let (r, q, _) = self.site_rule(tau, order);
            r.iter().zip(&q).map(|(r, q)| q * g(*r)).sum::<f64>()
        };
        let mut prev = eval(HERMITE_LADDER[0]);
        for &order in &HERMITE_LADDER[1..] {
            let cur = eval(order);
            if (cur - prev).abs() <= LADDER_TOL * (1.0 + cur.abs()) {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::Quadrature(format!("expectation did not settle at tau = {tau}")))
    }

    pub fn log_partition(&self, tau: f64) -> Result<f64> {
        Ok(self.moments(tau)?.log_z)
    }

    pub fn partition_function(&self, tau: f64) -> Result<f64> {
        Ok(self.log_partition(tau)?.exp())
    }

    /// `G_σ(τ) = β⁻¹ log Z_σ(τ)`.
    pub fn gibbs(&self, tau: f64) -> Result<f64> {
        Ok(self.log_partition(tau)? / self.beta)
    }

    /// `r̄_σ(τ) = G'_σ(τ)`, the quadrature mean of `π_{τ,σ}`.
    pub fn mean_stretch(&self, tau: f64) -> Result<f64> {
        Ok(self.moments(tau)?.mean)
    }

    /// `(G', G'', G''', G'''')` at `τ`.
    pub fn gibbs_derivatives(&self, tau: f64) -> Result<[f64; 4]> {
        let m = self.moments(tau)?;
        let b = self.beta;
        Ok([m.mean, b * m.var, b * b * m.k3, b * b * b * m.k4])
    }

    /// Admissible stretch range `[r̄(-τ_max), r̄(τ_max)]`.
    pub fn stretch_range(&self) -> Result<(f64, f64)> {
        Ok((self.mean_stretch(-TAU_MAX)?, self.mean_stretch(TAU_MAX)?))
    }

    /// Inverts `r̄_σ` by safeguarded Newton (bisection fallback), initial guess `τ₀ = r`.
    pub fn tension(&self, r: f64) -> Result<f64> {
        self.tension_from(r, r)
    }

    fn tension_from(&self, r: f64, guess: f64) -> Result<f64> {
        if self.is_harmonic() {
            self.check_tau(r)?;
            return Ok(r);
        }
        let (mut lo, mut hi) = (-TAU_MAX, TAU_MAX);
        let (rlo, rhi) = self.stretch_range()?;
        if !(r >= rlo && r <= rhi) {
            return Err(Error::Range { value: r, lo: rlo, hi: rhi });
        }
        let mut tau = guess.clamp(lo, hi);
        for _ in 0..50 {
            let m = self.moments(tau)?;
            let f = m.mean - r;
            if f == 0.0 {
                return Ok(tau);
            }
            if f < 0.0 {
                lo = tau;
            } else {
                hi = tau;
            }
            let mut next = tau - f / (self.beta * m.var);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - tau).abs();
            tau = next;
            if step <= 1e-14 * (1.0 + tau.abs()) || hi - lo <= 1e-14 {
                return Ok(tau);
            }
        }
        Ok(tau)
    }

    /// `(𝔱, 𝔱', 𝔱'')` at `r` via `𝔱' = 1/G''(𝔱)` and `𝔱'' = -G'''(𝔱)/G''(𝔱)³`.
    pub fn tension_derivatives(&self, r: f64) -> Result<(f64, f64, f64)> {
        let t = self.tension(r)?;
        if self.is_harmonic() {
            return Ok((t, 1.0, 0.0));
        }
        let [_, g2, g3, _] = self.gibbs_derivatives(t)?;
        Ok((t, 1.0 / g2, -g3 / (g2 * g2 * g2)))
    }

    /// `F_σ(r) = 𝔱_σ(r)·r - G_σ(𝔱_σ(r))`.
    pub fn free_energy(&self, r: f64) -> Result<f64> {
        let t = self.tension(r)?;
        Ok(t * r - self.gibbs(t)?)
    }

    /// `I_σ(τ, r) = G_σ(τ) + F_σ(r) - rτ`.
    pub fn rate_function(&self, tau: f64, r: f64) -> Result<f64> {
        let t = self.tension(r)?;
        let g_tau = self.gibbs(tau)?;
        let g_t = self.gibbs(t)?;
        Ok(g_tau - g_t - r * (tau - t))
    }
}

/// Free-function form of the partition function.
pub fn partition_function(beta: f64, sigma: f64, pot: &Potential, tau: f64) -> Result<f64> {
    Thermo::new(pot.clone(), beta, sigma)?.partition_function(tau)
}

/// Tabulated `G`, `r̄` (and `G''`) on a uniform `τ` grid with cubic Hermite interpolation,
/// plus the direct evaluator for exact queries.
#[derive(Debug, Clone)]
pub struct ThermoCurve {
    pub thermo: Thermo,
    pub tau_grid: Vec<f64>,
    pub log_z_vals: Vec<f64>,
    pub g_vals: Vec<f64>,
    pub rbar_vals: Vec<f64>,
    pub g2_vals: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThermoCurveFile {
    pub schema_version: u32,
    pub beta: f64,
    pub sigma: f64,
    pub potential: PotentialKind,
    pub tau_grid: Vec<f64>,
    pub log_z: Vec<f64>,
    pub g: Vec<f64>,
    pub rbar: Vec<f64>,
    pub g2: Vec<f64>,
}

pub const THERMO_SCHEMA_VERSION: u32 = 1;

fn hermite_cubic(h: f64, s: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

impl ThermoCurve {
    pub fn new(pot: Potential, beta: f64, sigma: f64) -> Result<Self> {
        Self::with_grid(pot, beta, sigma, TAU_MAX, TABLE_NODES)
    }

    pub fn with_grid(pot: Potential, beta: f64, sigma: f64, tau_max: f64, nodes: usize) -> Result<Self> {
        if nodes < 2 || !(tau_max > 0.0 && tau_max <= TAU_MAX) {
            return Err(Error::Precondition("table needs >= 2 nodes and 0 < tau_max <= 20".into()));
        }
        let thermo = Thermo::new(pot, beta, sigma)?;
        let h = 2.0 * tau_max / (nodes - 1) as f64;
        let tau_grid: Vec<f64> = (0..nodes).map(|k| -tau_max + k as f64 * h).collect();
        let mut log_z_vals = Vec::with_capacity(nodes);
        let mut rbar_vals = Vec::with_capacity(nodes);
        let mut g2_vals = Vec::with_capacity(nodes);
        for &t in &tau_grid {
            let m = thermo.moments(t)?;
            log_z_vals.push(m.log_z);
            rbar_vals.push(m.mean);
            g2_vals.push(beta * m.var);
        }
        let g_vals = log_z_vals.iter().map(|l| l / beta).collect();
        Ok(ThermoCurve { thermo, tau_grid, log_z_vals, g_vals, rbar_vals, g2_vals })
    }

    pub fn beta(&self) -> f64 {
        self.thermo.beta
    }

    pub fn sigma(&self) -> f64 {
        self.thermo.sigma
    }

    pub fn potential(&self) -> &Potential {
        &self.thermo.pot
    }

    fn locate(&self, tau: f64) -> Result<(usize, f64, f64)> {
        let lo = self.tau_grid[0];
        let hi = *self.tau_grid.last().unwrap();
        if !(tau >= lo && tau <= hi) {
            return Err(Error::Range { value: tau, lo, hi });
        }
        let h = self.tau_grid[1] - self.tau_grid[0];
        let k = (((tau - lo) / h).floor() as usize).min(self.tau_grid.len() - 2);
        Ok((k, h, (tau - self.tau_grid[k]) / h))
    }

    /// Interpolated `G_σ(τ)` (cubic Hermite with `G' = r̄`).
    pub fn g_interp(&self, tau: f64) -> Result<f64> {
        let (k, h, s) = self.locate(tau)?;
        Ok(hermite_cubic(h, s, self.g_vals[k], self.g_vals[k + 1], self.rbar_vals[k], self.rbar_vals[k + 1]))
    }

    /// Interpolated `r̄_σ(τ)` (cubic Hermite with `r̄' = G''`).
    pub fn rbar_interp(&self, tau: f64) -> Result<f64> {
        let (k, h, s) = self.locate(tau)?;
        Ok(hermite_cubic(h, s, self.rbar_vals[k], self.rbar_vals[k + 1], self.g2_vals[k], self.g2_vals[k + 1]))
    }

    pub fn partition_function(&self, tau: f64) -> Result<f64> {
        self.thermo.partition_function(tau)
    }

    pub fn gibbs(&self, tau: f64) -> Result<f64> {
        self.thermo.gibbs(tau)
    }

    pub fn mean_stretch(&self, tau: f64) -> Result<f64> {
        self.thermo.mean_stretch(tau)
    }

    pub fn tension(&self, r: f64) -> Result<f64> {
        if self.thermo.is_harmonic() {
            return self.thermo.tension(r);
        }
        // Warm start from the table.
        let (lo, hi) = (self.rbar_vals[0], *self.rbar_vals.last().unwrap());
        if !(r >= lo && r <= hi) {
            return Err(Error::Range { value: r, lo, hi });
        }
        let k = self.rbar_vals.partition_point(|&x| x < r).clamp(1, self.rbar_vals.len() - 1);
        let (r0, r1) = (self.rbar_vals[k - 1], self.rbar_vals[k]);
        let guess = self.tau_grid[k - 1] + (r - r0) / (r1 - r0) * (self.tau_grid[k] - self.tau_grid[k - 1]);
        self.thermo.tension_from(r, guess)
    }

    pub fn tension_derivatives(&self, r: f64) -> Result<(f64, f64, f64)> {
        self.thermo.tension_derivatives(r)
    }

    pub fn free_energy(&self, r: f64) -> Result<f64> {
        self.thermo.free_energy(r)
    }

    pub fn rate_function(&self, tau: f64, r: f64) -> Result<f64> {
        self.thermo.rate_function(tau, r)
    }

    pub fn to_file(&self) -> ThermoCurveFile {
        ThermoCurveFile {
            schema_version: THERMO_SCHEMA_VERSION,
            beta: self.beta(),
            sigma: self.sigma(),
            potential: self.thermo.pot.kind(),
            tau_grid: self.tau_grid.clone(),
            log_z: self.log_z_vals.clone(),
            g: self.g_vals.clone(),
            rbar: self.rbar_vals.clone(),
            g2: self.g2_vals.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("thermo curve serializes")
    }

    /// Rebuilds a curve from its file form. The potential must be supplied since user
    /// potentials are closures; its kind has to match the recorded one.
    pub fn from_file(file: ThermoCurveFile, pot: Potential) -> Result<Self> {
        if file.schema_version != THERMO_SCHEMA_VERSION {
            return Err(Error::InvalidParams(format!("unsupported thermo schema version {}", file.schema_version)));
        }
        if file.potential != pot.kind() {
            return Err(Error::InvalidPotential(format!("file was built for {:?}, got {:?}", file.potential, pot.kind())));
        }
        let n = file.tau_grid.len();
        if n < 2 || [file.log_z.len(), file.g.len(), file.rbar.len(), file.g2.len()].iter().any(|&l| l != n) {
            return Err(Error::InvalidParams("thermo table columns have inconsistent lengths".into()));
        }
        Ok(ThermoCurve {
            thermo: Thermo::new(pot, file.beta, file.sigma)?,
            tau_grid: file.tau_grid,
            log_z_vals: file.log_z,
            g_vals: file.g,
            rbar_vals: file.rbar,
            g2_vals: file.g2,
        })
    }
}

/// Fast tension lookup on a uniform stretch grid: stores `𝔱, 𝔱', 𝔱'', 𝔱'''` and
/// interpolates each with cubic Hermite using the next derivative.
#[derive(Debug, Clone)]
pub struct TensionTable {
    pub r_min: f64,
    pub h: f64,
    pub t: Vec<f64>,
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub t3: Vec<f64>,
    harmonic: bool,
}

impl TensionTable {
    pub fn new(thermo: &Thermo, r_min: f64, r_max: f64, nodes: usize) -> Result<Self> {
        if nodes < 2 || !(r_max > r_min) {
            return Err(Error::Precondition("tension table needs r_max > r_min and >= 2 nodes".into()));
        }
        let h = (r_max - r_min) / (nodes - 1) as f64;
        let harmonic = thermo.is_harmonic();
        let mut tab = TensionTable {
            r_min,
            h,
            t: Vec::with_capacity(nodes),
            t1: Vec::with_capacity(nodes),
            t2: Vec::with_capacity(nodes),
            t3: Vec::with_capacity(nodes),
            harmonic,
        };
        let mut guess = r_min;
        for k in 0..nodes {
            let r = r_min + k as f64 * h;
            if harmonic {
                thermo.tension(r)?;
                tab.t.push(r);
                tab.t1.push(1.0);
                tab.t2.push(0.0);
                tab.t3.push(0.0);
                continue;
            }
            let tau = thermo.tension_from(r, guess)?;
            guess = tau;
            let [_, g2, g3, g4] = thermo.gibbs_derivatives(tau)?;
            tab.t.push(tau);
            tab.t1.push(1.0 / g2);
            tab.t2.push(-g3 / g2.powi(3));
            tab.t3.push(-g4 / g2.powi(4) + 3.0 * g3 * g3 / g2.powi(5));
        }
        Ok(tab)
    }

    pub fn r_max(&self) -> f64 {
        self.r_min + self.h * (self.t.len() - 1) as f64
    }

    pub fn is_harmonic(&self) -> bool {
        self.harmonic
    }

    #[inline]
    fn locate(&self, r: f64) -> (usize, f64) {
        let x = ((r - self.r_min) / self.h).clamp(0.0, (self.t.len() - 1) as f64);
        let k = (x.floor() as usize).min(self.t.len() - 2);
        (k, x - k as f64)
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_min && r <= self.r_max()
    }

    /// `𝔱(r)`; exact for the harmonic case. Arguments outside the grid are clamped.
    #[inline]
    pub fn tension(&self, r: f64) -> f64 {
        if self.harmonic {
            return r;
        }
        let (k, s) = self.locate(r);
        hermite_cubic(self.h, s, self.t[k], self.t[k + 1], self.t1[k], self.t1[k + 1])
    }

    #[inline]
    pub fn d1(&self, r: f64) -> f64 {
        if self.harmonic {
            return 1.0;
        }
        let (k, s) = self.locate(r);
        hermite_cubic(self.h, s, self.t1[k], self.t1[k + 1], self.t2[k], self.t2[k + 1])
    }

    #[inline]
    pub fn d2(&self, r: f64) -> f64 {
        if self.harmonic {
            return 0.0;
        }
        let (k, s) = self.locate(r);
        hermite_cubic(self.h, s, self.t2[k], self.t2[k + 1], self.t3[k], self.t3[k + 1])
    }
}

/// First-order coefficients of `𝔱_σ(r) - r`, `𝔱'_σ(r) - 1` and `𝔱''_σ(r)` in `σ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub r: f64,
    pub sigmas: Vec<f64>,
    /// Fitted first-order slopes `(C0, C1, C2)`.
    pub slopes: [f64; 3],
    /// `|y_k - C σ_k| / σ_k` for each quantity and each `σ_k`.
    pub residual_ratios: [Vec<f64>; 3],
    pub max_residuals: [f64; 3],
    /// Log–log slope of `|𝔱_σ(r) - r|` against `σ` (NaN if the deviation vanishes).
    pub loglog_slope: f64,
    /// Residual ratios are non-increasing along the decreasing `σ` list.
    pub little_o: bool,
}

/// Fits `y ≈ Cσ + Dσ²` and returns `C` (the first-order coefficient).
fn first_order_coefficient(s: &[f64], y: &[f64]) -> f64 {
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&si, &yi) in s.iter().zip(y) {
        let (p1, p2) = (si, si * si);
        a11 += p1 * p1;
        a12 += p1 * p2;
        a22 += p2 * p2;
        b1 += p1 * yi;
        b2 += p2 * yi;
    }
    let det = a11 * a22 - a12 * a12;
    (b1 * a22 - b2 * a12) / det
}

pub fn tension_asymptotics(pot: &Potential, beta: f64, r: f64, sigmas: &[f64]) -> Result<AsymptoticFit> {
    if sigmas.len() < 4 || sigmas.windows(2).any(|w| !(w[1] < w[0])) || sigmas.iter().any(|&s| s <= 0.0) {
        return Err(Error::Precondition("sigma list needs >= 4 positive, strictly decreasing values".into()));
    }
    let mut ys: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for &s in sigmas {
        let (t, t1, t2) = Thermo::new(pot.clone(), beta, s)?.tension_derivatives(r)?;
        ys[0].push(t - r);
        ys[1].push(t1 - 1.0);
        ys[2].push(t2);
    }
    let mut slopes = [0.0; 3];
    let mut ratios: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut max_res = [0.0f64; 3];
    let mut little_o = true;
    for q in 0..3 {
        let c = first_order_coefficient(sigmas, &ys[q]);
        slopes[q] = c;
        for (k, &s) in sigmas.iter().enumerate() {
            let res = (ys[q][k] - c * s).abs();
            max_res[q] = max_res[q].max(res);
            ratios[q].push(res / s);
        }
        let scale = ys[q].iter().map(|y| y.abs()).fold(0.0, f64::max);
        little_o &= ratios[q].windows(2).all(|w| w[1] <= w[0] + 1e-9 * (1.0 + scale));
    }
    let loglog_slope = if ys[0].iter().all(|y| y.abs() > 0.0) {
        let lx: Vec<f64> = sigmas.iter().map(|s| s.ln()).collect();
        let ly: Vec<f64> = ys[0].iter().map(|y| y.abs().ln()).collect();
        linear_fit(&lx, &ly).0
    } else {
        f64::NAN
    };
    Ok(AsymptoticFit { r, sigmas: sigmas.to_vec(), slopes, residual_ratios: ratios, max_residuals: max_res, loglog_slope, little_o })
}
