//! Densities of block sums and block means of independent stretches.
//!
//! Each site density is sampled on a uniform lattice centred at its mean; the per-site
//! characteristic functions are the DFTs of those samples (a trapezoid quadrature that is
//! spectrally accurate for these smooth, rapidly decaying densities). Their product is
//! transformed back to the density of the sum on a periodic window of at least
//! ±12 standard deviations. Off-lattice values come from the band-limited trigonometric
//! interpolant of the same coefficients.

use std::collections::HashMap;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::thermo::{SiteMoments, Thermo};

/// Resolution of the sampling lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityGrid {
    /// Lattice points per standard deviation of the narrowest site.
    pub points_per_sd: f64,
    /// Half-width of the window in standard deviations of the sum.
    pub half_width_sds: f64,
}

impl Default for DensityGrid {
    fn default() -> Self {
        DensityGrid { points_per_sd: 3.0, half_width_sds: 12.0 }
    }
}

/// Density of `S = Σ_j r_j` on the lattice `x0 + m·h`, `m = 0..N`.
#[derive(Debug, Clone)]
pub struct SumDensity {
    pub n: usize,
    /// Sums of the site cumulants `κ1..κ4`.
    pub cumulants: [f64; 4],
    pub x0: f64,
    pub h: f64,
    pub values: Vec<f64>,
    coeffs: Vec<Complex<f64>>,
}

fn cpow(mut z: Complex<f64>, mut k: usize) -> Complex<f64> {
    let mut acc = Complex::new(1.0, 0.0);
    while k > 0 {
        if k & 1 == 1 {
            acc *= z;
        }
        z *= z;
        k >>= 1;
    }
    acc
}

impl SumDensity {
    pub fn build(thermo: &Thermo, taus: &[f64], grid: DensityGrid) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::Precondition("density of an empty block".into()));
        }
        let mut groups: HashMap<u64, (f64, usize)> = HashMap::new();
        for &t in taus {
            groups.entry(t.to_bits()).or_insert((t, 0)).1 += 1;
        }
        let mut groups: Vec<(f64, usize)> = groups.into_values().collect();
        groups.sort_by(|a, b| a.0.total_cmp(&b.0));
        let moments: Vec<SiteMoments> = groups.iter().map(|(t, _)| thermo.moments(*t)).collect::<Result<_>>()?;

        let mut cumulants = [0.0; 4];
        let mut sd_min = f64::INFINITY;
        for (m, (_, k)) in moments.iter().zip(&groups) {
            let k = *k as f64;
            cumulants[0] += k * m.mean;
            cumulants[1] += k * m.var;
            cumulants[2] += k * m.k3;
            cumulants[3] += k * m.k4;
            sd_min = sd_min.min(m.var.sqrt());
        }
        let h = sd_min / grid.points_per_sd;
        let span = 2.0 * grid.half_width_sds * cumulants[1].sqrt();
        let size = ((span / h).ceil() as usize).next_power_of_two().max(64);
        let half = (size / 2) as isize;

        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        let beta = thermo.beta;
        let mut prod = vec![Complex::new(1.0, 0.0); size];
        let mut buf = vec![Complex::new(0.0, 0.0); size];
        for ((tau, k), m) in groups.iter().zip(&moments) {
            let c = m.mean;
            for j in -half..half {
                let x = c + j as f64 * h;
                let logp = -beta * (thermo.pot.v(thermo.sigma, x) - tau * x) - m.log_z;
                buf[j.rem_euclid(size as isize) as usize] = Complex::new(h * logp.exp(), 0.0);
            }
            fwd.process(&mut buf);
            for (p, a) in prod.iter_mut().zip(&buf) {
                *p *= cpow(*a, *k);
            }
        }
        inv.process(&mut prod);
        let scale = 1.0 / (size as f64 * h);
        let mut values = vec![0.0; size];
        for j in -half..half {
            let v = prod[j.rem_euclid(size as isize) as usize].re * scale;
            values[(j + half) as usize] = v.max(0.0);
        }
        let x0 = cumulants[0] - half as f64 * h;

        let mut coeffs: Vec<Complex<f64>> = values.iter().map(|v| Complex::new(*v, 0.0)).collect();
        fwd.process(&mut coeffs);
        let inv_n = 1.0 / size as f64;
        coeffs.iter_mut().for_each(|c| *c *= inv_n);
        coeffs.truncate(size / 2 + 1);

        let sd = SumDensity { n: taus.len(), cumulants, x0, h, values, coeffs };
        let mass = sd.mass();
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::Resolution(format!("block density integrates to {mass}")));
        }
        Ok(sd)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn abscissa(&self, m: usize) -> f64 {
        self.x0 + m as f64 * self.h
    }

    pub fn window(&self) -> (f64, f64) {
        (self.x0, self.abscissa(self.values.len() - 1))
    }

    /// Riemann (periodic trapezoid) integral of the lattice values.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.h
    }

    /// Band-limited interpolant at `x`; `None` outside the window.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let (lo, hi) = self.window();
        if !(x >= lo && x <= hi) {
            return None;
        }
        let size = self.values.len();
        let theta = 2.0 * std::f64::consts::PI * (x - self.x0) / (size as f64 * self.h);
        let step = Complex::from_polar(1.0, theta);
        let mut w = step;
        let mut s = self.coeffs[0].re;
        for c in &self.coeffs[1..size / 2] {
            s += 2.0 * (c * w).re;
            w *= step;
        }
        s += self.coeffs[size / 2].re * (0.5 * size as f64 * theta).cos();
        Some(s)
    }
}

/// Density of the block mean `r_(n) = n⁻¹ Σ r_j`.
#[derive(Debug, Clone)]
pub struct MeanDensity {
    pub n: usize,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    sum: SumDensity,
}

impl MeanDensity {
    pub fn from_sum(sum: SumDensity) -> Self {
        let n = sum.n as f64;
        let grid = (0..sum.len()).map(|m| sum.abscissa(m) / n).collect();
        let values = sum.values.iter().map(|v| v * n).collect();
        MeanDensity { n: sum.n, grid, values, sum }
    }

    pub fn spacing(&self) -> f64 {
        self.sum.h / self.n as f64
    }

    /// Trapezoid integral over the grid.
    pub fn integral(&self) -> f64 {
        let h = self.spacing();
        let inner: f64 = self.values.iter().sum();
        h * (inner - 0.5 * (self.values[0] + self.values[self.values.len() - 1]))
    }

    /// Mean of the block mean, `n⁻¹ Σ r̄_j`.
    pub fn mean(&self) -> f64 {
        self.sum.cumulants[0] / self.n as f64
    }

    pub fn sum_density(&self) -> &SumDensity {
        &self.sum
    }

    /// Density at `u`; `None` outside the computational window.
    pub fn eval(&self, u: f64) -> Option<f64> {
        self.sum.eval(u * self.n as f64).map(|v| v * self.n as f64)
    }

    /// `u,f(u)` rows with a header line.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "u,f")?;
        for (u, f) in self.grid.iter().zip(&self.values) {
            writeln!(w, "{u:.16e},{f:.16e}")?;
        }
        Ok(())
    }
}

/// Density of the mean of independent stretches with tensions `taus`.
pub fn density_of_mean(thermo: &Thermo, taus: &[f64], grid: DensityGrid) -> Result<MeanDensity> {
    Ok(MeanDensity::from_sum(SumDensity::build(thermo, taus, grid)?))
}
