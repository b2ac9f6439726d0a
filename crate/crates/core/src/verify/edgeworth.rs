use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::{DensityGrid, SumDensity};
use crate::thermo::Thermo;

/// Probabilists' Hermite polynomial `H_j` for `j ∈ {3, 4, 6}`.
pub fn hermite(j: u32, x: f64) -> Result<f64> {
    let x2 = x * x;
    match j {
        3 => Ok(x * (x2 - 3.0)),
        4 => Ok(x2 * (x2 - 6.0) + 3.0),
        6 => Ok(((x2 - 15.0) * x2 + 45.0) * x2 - 15.0),
        _ => Err(Error::UnsupportedHermite(j)),
    }
}

fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standardized block-sum density against its Gaussian and Edgeworth approximations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeworthReport {
    pub n: usize,
    /// `u_1, u_2` and the signed real roots `u_3 = (κ̄_3)^{1/3}`, `u_4 = sgn(κ̄_4)|κ̄_4|^{1/4}`
    /// of the averaged site cumulants.
    pub u: [f64; 4],
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    /// Sup-norm errors of the order-0, order-1 and order-2 expansions on the grid.
    pub errors: [f64; 3],
    pub mass: f64,
    pub min_density: f64,
}

/// Half-width and resolution of the comparison grid in standardized units.
pub const EDGEWORTH_HALF_WIDTH: f64 = 8.0;
pub const EDGEWORTH_POINTS: usize = 1601;

/// Density `g_n` of `(Σ r_j - n u_1)/(u_2 √n)` under the product measure with tensions
/// `taus`, compared with `φ(1 + Q_1/√n + Q_2/n)` truncated at each order.
pub fn edgeworth_check(thermo: &Thermo, taus: &[f64]) -> Result<EdgeworthReport> {
    let n = taus.len();
    if n < 2 {
        return Err(Error::Precondition(format!("need at least 2 sites, got {n}")));
    }
    let sum = SumDensity::build(thermo, taus, DensityGrid::default())?;
    let nf = n as f64;
    let [k1, k2, k3, k4] = sum.cumulants.map(|k| k / nf);
    let u2 = k2.sqrt();
    let u = [k1, u2, k3.cbrt(), k4.signum() * k4.abs().powf(0.25)];
    let skew = k3 / u2.powi(3);
    let kurt = k4 / (u2 * u2).powi(2);
    let scale = u2 * nf.sqrt();

    let step = 2.0 * EDGEWORTH_HALF_WIDTH / (EDGEWORTH_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..EDGEWORTH_POINTS).map(|j| -EDGEWORTH_HALF_WIDTH + j as f64 * step).collect();
    let mut density = Vec::with_capacity(grid.len());
    let mut errors = [0.0f64; 3];
    for &x in &grid {
        let g = sum.eval(nf * k1 + x * scale).ok_or_else(|| Error::Resolution(format!("x = {x} outside the density window")))? * scale;
        let q1 = skew / 6.0 * hermite(3, x)?;
        let q2 = kurt / 24.0 * hermite(4, x)? + skew * skew / 72.0 * hermite(6, x)?;
        let p = phi(x);
        let approx = [p, p * (1.0 + q1 / nf.sqrt()), p * (1.0 + q1 / nf.sqrt() + q2 / nf)];
        for (e, a) in errors.iter_mut().zip(approx) {
            *e = e.max((g - a).abs());
        }
        density.push(g);
    }
    let mass = step * (density.iter().sum::<f64>() - 0.5 * (density[0] + density[density.len() - 1]));
    let min_density = density.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(EdgeworthReport { n, u, grid, density, errors, mass, min_density })
}
