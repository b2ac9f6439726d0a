use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dynamics::ChainState;
use crate::error::{Error, Result};
use crate::psystem::Profile;

/// Clock mismatch tolerated between a state and its centering profile.
pub const TIME_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_CUTOFF: usize = 16;

/// Hydrodynamic profile evaluated at the `n` sites.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteProfile {
    pub p: Vec<f64>,
    pub r: Vec<f64>,
    pub t: f64,
}

impl SiteProfile {
    /// Spectral interpolation of `hydro` to the sites `i/n`.
    pub fn from_profile(hydro: &Profile, n: usize) -> Self {
        let s = hydro.resample(n);
        SiteProfile { p: s.p, r: s.r, t: s.t }
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn check(&self, state: &ChainState) -> Result<()> {
        if self.n() != state.n() {
            return Err(Error::Precondition(format!("profile has {} sites, state has {}", self.n(), state.n())));
        }
        if (self.t - state.t).abs() > TIME_TOLERANCE {
            return Err(Error::Staleness { state: state.t, profile: self.t });
        }
        Ok(())
    }

    /// `(p_i - 𝔭_i, r_i - 𝔯_i)`.
    pub fn deviation(&self, state: &ChainState) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(state)?;
        Ok((
            state.p.iter().zip(&self.p).map(|(a, b)| a - b).collect(),
            state.r.iter().zip(&self.r).map(|(a, b)| a - b).collect(),
        ))
    }
}

/// Fourier coefficients `(Y(φ_m e_p), Y(φ_m e_r))` for `|m| ≤ M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    pub cutoff: usize,
    /// Index `m + M` holds mode `m`.
    pub coeffs: Vec<(Complex<f64>, Complex<f64>)>,
}

impl SpectralField {
    pub fn coeff(&self, m: i64) -> (Complex<f64>, Complex<f64>) {
        self.coeffs[(m + self.cutoff as i64) as usize]
    }

    /// `Σ_{|m| ≤ M} (|p̂(m)|² + |r̂(m)|²)/(1 + m²)^k`, the squared `k`-norm.
    pub fn sobolev_norm_sq(&self, k: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, (a, b))| {
                let m = j as f64 - self.cutoff as f64;
                (a.norm_sqr() + b.norm_sqr()) / (1.0 + m * m).powf(k)
            })
            .sum()
    }

    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        (1..=self.cutoff as i64).all(|m| {
            let (a, b) = self.coeff(m);
            let (c, d) = self.coeff(-m);
            (a - c.conj()).norm() <= tol && (b - d.conj()).norm() <= tol
        })
    }
}

fn dft(values: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// All `n` coefficients `n^{-1/2} Σ_i e^{-2πimi/n} d_i` of a deviation vector, index `m mod n`.
pub fn field_transform(dev: &[f64]) -> Vec<Complex<f64>> {
    let s = 1.0 / (dev.len() as f64).sqrt();
    dft(dev).into_iter().map(|c| c * s).collect()
}

/// `Y_t(φ_m)` for both components.
pub fn project_field(state: &ChainState, hydro: &SiteProfile, m: i64) -> Result<(Complex<f64>, Complex<f64>)> {
    let (dp, dr) = hydro.deviation(state)?;
    let n = dp.len() as f64;
    let s = 1.0 / n.sqrt();
    let mut acc = (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0));
    for (i, (a, b)) in dp.iter().zip(&dr).enumerate() {
        let w = Complex::from_polar(s, -2.0 * std::f64::consts::PI * m as f64 * i as f64 / n);
        acc.0 += w * a;
        acc.1 += w * b;
    }
    Ok(acc)
}

/// Modes `|m| ≤ cutoff` of the fluctuation field (requires `2·cutoff < n`).
pub fn spectral_field(state: &ChainState, hydro: &SiteProfile, cutoff: usize) -> Result<SpectralField> {
    let (dp, dr) = hydro.deviation(state)?;
    let n = dp.len();
    if 2 * cutoff >= n {
        return Err(Error::Precondition(format!("cutoff {cutoff} needs more than {n} sites")));
    }
    let (fp, fr) = (field_transform(&dp), field_transform(&dr));
    let coeffs = (-(cutoff as i64)..=cutoff as i64)
        .map(|m| {
            let k = m.rem_euclid(n as i64) as usize;
            (fp[k], fr[k])
        })
        .collect();
    Ok(SpectralField { cutoff, coeffs })
}

/// `Y_t(h) = n^{-1/2} Σ_i (h_p(i/n)(p_i - 𝔭_i) + h_r(i/n)(r_i - 𝔯_i))` for a real test pair.
pub fn pair_field(state: &ChainState, hydro: &SiteProfile, hp: &[f64], hr: &[f64]) -> Result<f64> {
    let (dp, dr) = hydro.deviation(state)?;
    let n = dp.len() as f64;
    Ok((dp.iter().zip(hp).map(|(a, b)| a * b).sum::<f64>() + dr.iter().zip(hr).map(|(a, b)| a * b).sum::<f64>()) / n.sqrt())
}
