use std::f64::consts::PI;
use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Macroscopic `(p, r)` sampled at `x_j = j/m` on the unit torus.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub p: Vec<f64>,
    pub r: Vec<f64>,
    pub t: f64,
}

pub(crate) fn fft(values: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

pub(crate) fn ifft_real(mut buf: Vec<Complex<f64>>) -> Vec<f64> {
    let n = buf.len() as f64;
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    buf.iter().map(|c| c.re / n).collect()
}

/// Signed frequency of DFT index `k` for length `m`.
#[inline]
pub(crate) fn freq(k: usize, m: usize) -> i64 {
    if k <= m / 2 {
        k as i64
    } else {
        k as i64 - m as i64
    }
}

/// Values of the trigonometric interpolant of `values` at `x_i = i/n`. The Nyquist mode
/// of an even-length input is read as a cosine.
pub fn resample_values(values: &[f64], n: usize) -> Vec<f64> {
    let m = values.len();
    if m == n {
        return values.to_vec();
    }
    let c = fft(values);
    let mut out = vec![Complex::new(0.0, 0.0); n];
    let scale = n as f64 / m as f64;
    for (k, ck) in c.iter().enumerate() {
        let f = freq(k, m);
        if m % 2 == 0 && k == m / 2 {
            let half = 0.5 * ck * scale;
            out[f.rem_euclid(n as i64) as usize] += half;
            out[(-f).rem_euclid(n as i64) as usize] += half;
        } else {
            out[f.rem_euclid(n as i64) as usize] += ck * scale;
        }
    }
    ifft_real(out)
}

/// Spectral derivative; the Nyquist mode contributes nothing at the nodes.
pub fn spectral_derivative(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut c = fft(values);
    for (k, ck) in c.iter_mut().enumerate() {
        if m % 2 == 0 && k == m / 2 {
            *ck = Complex::new(0.0, 0.0);
        } else {
            *ck *= Complex::new(0.0, 2.0 * PI * freq(k, m) as f64);
        }
    }
    ifft_real(c)
}

impl Profile {
    pub fn new(p: Vec<f64>, r: Vec<f64>, t: f64) -> Result<Self> {
        if p.len() != r.len() || p.is_empty() {
            return Err(Error::Precondition(format!("profile arrays need equal nonzero length, got {} and {}", p.len(), r.len())));
        }
        if p.iter().chain(&r).any(|v| !v.is_finite()) {
            return Err(Error::Precondition("profile has non-finite entries".into()));
        }
        Ok(Profile { p, r, t })
    }

    pub fn from_fns(m: usize, p: impl Fn(f64) -> f64, r: impl Fn(f64) -> f64) -> Result<Self> {
        let x = |j: usize| j as f64 / m as f64;
        Self::new((0..m).map(|j| p(x(j))).collect(), (0..m).map(|j| r(x(j))).collect(), 0.0)
    }

    pub fn constant(m: usize, p: f64, r: f64) -> Self {
        Profile { p: vec![p; m], r: vec![r; m], t: 0.0 }
    }

    pub fn m(&self) -> usize {
        self.p.len()
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 / self.m() as f64
    }

    /// The band-limited interpolant sampled at `i/n`.
    pub fn resample(&self, n: usize) -> Profile {
        Profile { p: resample_values(&self.p, n), r: resample_values(&self.r, n), t: self.t }
    }

    /// `(∂_x p, ∂_x r)` of the interpolant at the nodes.
    pub fn derivative(&self) -> (Vec<f64>, Vec<f64>) {
        (spectral_derivative(&self.p), spectral_derivative(&self.r))
    }

    /// `∫(p² + r²) dx` by the (spectrally exact) grid mean.
    pub fn energy(&self) -> f64 {
        self.p.iter().chain(&self.r).map(|v| v * v).sum::<f64>() / self.m() as f64
    }

    /// Largest pointwise difference in either component.
    pub fn max_diff(&self, other: &Profile) -> f64 {
        self.p
            .iter()
            .zip(&other.p)
            .chain(self.r.iter().zip(&other.r))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,p,r")?;
        for j in 0..self.m() {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", self.x(j), self.p[j], self.r[j])?;
        }
        Ok(())
    }
}

/// One Fourier term `a cos(2πkx) + b sin(2πkx)` in each component.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TrigTerm {
    pub k: u32,
    pub p_cos: f64,
    pub p_sin: f64,
    pub r_cos: f64,
    pub r_sin: f64,
}

/// Band-limited trigonometric profile: constants plus a list of terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TrigProfile {
    pub p0: f64,
    pub r0: f64,
    pub terms: Vec<TrigTerm>,
}

impl TrigProfile {
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let (mut p, mut r) = (self.p0, self.r0);
        for t in &self.terms {
            let (s, c) = (2.0 * PI * t.k as f64 * x).sin_cos();
            p += t.p_cos * c + t.p_sin * s;
            r += t.r_cos * c + t.r_sin * s;
        }
        (p, r)
    }

    pub fn to_profile(&self, m: usize) -> Profile {
        let (p, r) = (0..m).map(|j| self.eval(j as f64 / m as f64)).unzip();
        Profile { p, r, t: 0.0 }
    }

    pub fn max_frequency(&self) -> u32 {
        self.terms.iter().map(|t| t.k).max().unwrap_or(0)
    }
}
