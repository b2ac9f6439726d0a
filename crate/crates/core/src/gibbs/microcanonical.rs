//! Conditional expectations of local functions given the block mean of the stretches.
//!
//! With `S_k` the sum of the first `k` stretches and `f_rest` the density of the mean of
//! the other `n - k`,
//! `⟨F|u⟩ = n/(n-k) · f(u)⁻¹ · E[F · f_rest((nu - S_k)/(n-k))]`,
//! the outer expectation taken under the product of the first `k` one-site measures.

use crate::error::{Error, Result};
use crate::quadrature::HERMITE_LADDER;
use crate::thermo::Thermo;

use super::density::{density_of_mean, DensityGrid, MeanDensity};

const MICRO_TOL: f64 = 1e-10;

/// Precomputed densities for repeated evaluation at different `u` or `F`.
#[derive(Debug, Clone)]
pub struct Microcanonical {
    thermo: Thermo,
    taus: Vec<f64>,
    k: usize,
    all: MeanDensity,
    rest: MeanDensity,
}

impl Microcanonical {
    pub fn new(thermo: &Thermo, taus: &[f64], k: usize) -> Result<Self> {
        if !(1..=2).contains(&k) {
            return Err(Error::Precondition(format!("local functions of k = 1 or 2 sites only, got {k}")));
        }
        if taus.len() < k + 1 {
            return Err(Error::Precondition(format!("need n >= k + 1, got n = {}", taus.len())));
        }
        let grid = DensityGrid::default();
        Ok(Microcanonical {
            thermo: thermo.clone(),
            taus: taus.to_vec(),
            k,
            all: density_of_mean(thermo, taus, grid)?,
            rest: density_of_mean(thermo, &taus[k..], grid)?,
        })
    }

    pub fn density(&self) -> &MeanDensity {
        &self.all
    }

    fn at_order(&self, f: &impl Fn(&[f64]) -> f64, u: f64, order: usize) -> Result<f64> {
        let n = self.taus.len() as f64;
        let m = n - self.k as f64;
        let rest = |s: f64| self.rest.eval((n * u - s) / m).unwrap_or(0.0);
        let (r1, q1, _) = self.thermo.site_rule(self.taus[0], order);
        let mut acc = 0.0;
        if self.k == 1 {
            for (x, q) in r1.iter().zip(&q1) {
                acc += q * rest(*x) * f(&[*x]);
            }
        } else {
            let (r2, q2, _) = self.thermo.site_rule(self.taus[1], order);
            for (x, qx) in r1.iter().zip(&q1) {
                if *qx < 1e-300 {
                    continue;
                }
                for (y, qy) in r2.iter().zip(&q2) {
                    acc += qx * qy * rest(x + y) * f(&[*x, *y]);
                }
            }
        }
        Ok(acc)
    }

    /// `⟨F|u⟩`; the Gauss–Hermite order is doubled until successive values agree to 1e-10.
    pub fn expect(&self, f: impl Fn(&[f64]) -> f64, u: f64) -> Result<f64> {
        let fu = match self.all.eval(u) {
            Some(v) if v >= 1e-300 => v,
            _ => return Err(Error::Conditioning(format!("u = {u} lies outside the support window of the block-mean density"))),
        };
        let n = self.taus.len() as f64;
        let norm = n / ((n - self.k as f64) * fu);
        // k = 2 products grow quadratically; the ladder stops at 256 there.
        let top = if self.k == 1 { HERMITE_LADDER.len() } else { 3 };
        let mut prev = self.at_order(&f, u, HERMITE_LADDER[0])? * norm;
        for &order in &HERMITE_LADDER[1..top] {
            let cur = self.at_order(&f, u, order)? * norm;
            if (cur - prev).abs() <= MICRO_TOL * (1.0 + cur.abs()) {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::Quadrature(format!("micro-canonical expectation did not settle at u = {u}")))
    }
}

/// One-shot `⟨F|u⟩` for a function of the first `k` stretches.
pub fn microcanonical_expect(thermo: &Thermo, taus: &[f64], k: usize, f: impl Fn(&[f64]) -> f64, u: f64) -> Result<f64> {
    Microcanonical::new(thermo, taus, k)?.expect(f, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;
    use crate::quadrature::adaptive_simpson;

    #[test]
    fn exchangeable_gaussian_returns_u() {
        let th = Thermo::new(Potential::OneMinusCosine, 1.0, 0.0).unwrap();
        let mc = Microcanonical::new(&th, &[0.3; 6], 1).unwrap();
        for &u in &[-0.5, 0.3, 1.1] {
            assert!((mc.expect(|r| r[0], u).unwrap() - u).abs() < 1e-8);
        }
    }

    #[test]
    fn exchangeable_anharmonic_returns_u() {
        let th = Thermo::new(Potential::OneMinusCosine, 1.0, 0.3).unwrap();
        let mc = Microcanonical::new(&th, &[0.5; 5], 1).unwrap();
        for &u in &[0.0, 0.7] {
            assert!((mc.expect(|r| r[0], u).unwrap() - u).abs() < 1e-8);
        }
    }

    #[test]
    fn gaussian_conditioning_with_distinct_means() {
        let th = Thermo::new(Potential::OneMinusCosine, 2.0, 0.0).unwrap();
        let taus = [0.8, -0.2, 0.1, 0.5];
        let mean = taus.iter().sum::<f64>() / 4.0;
        let mc = Microcanonical::new(&th, &taus, 1).unwrap();
        for &u in &[0.0, 0.4, 1.0] {
            assert!((mc.expect(|r| r[0], u).unwrap() - (taus[0] + u - mean)).abs() < 1e-8);
        }
    }

    #[test]
    fn two_site_brute_force_oracle() {
        // n = 2, k = 1: conditioning on r1 + r2 = 2u gives density ∝ π(r) π(2u - r).
        let (beta, sigma, tau, u) = (1.0, 0.1, 0.4, 0.7);
        let th = Thermo::new(Potential::OneMinusCosine, beta, sigma).unwrap();
        let w = |r: f64| {
            let v = |x: f64| (-beta * (Potential::OneMinusCosine.v(sigma, x) - tau * x)).exp();
            v(r) * v(2.0 * u - r)
        };
        let num = adaptive_simpson(&|r| r.sin() * w(r), u - 15.0, u + 15.0, 1e-13);
        let den = adaptive_simpson(&w, u - 15.0, u + 15.0, 1e-13);
        let got = microcanonical_expect(&th, &[tau, tau], 1, |r| r[0].sin(), u).unwrap();
        assert!(((got - num / den) / (num / den)).abs() < 1e-6, "{got} vs {}", num / den);
    }

    #[test]
    fn constant_has_unit_expectation() {
        let th = Thermo::new(Potential::OneMinusCosine, 1.0, 0.2).unwrap();
        let mc1 = Microcanonical::new(&th, &[0.1, 0.3, -0.2, 0.0, 0.4], 1).unwrap();
        let mc2 = Microcanonical::new(&th, &[0.1, 0.3, -0.2, 0.0, 0.4], 2).unwrap();
        for &u in &[-0.5, 0.1, 0.6] {
            assert!((mc1.expect(|_| 1.0, u).unwrap() - 1.0).abs() < 1e-8);
            assert!((mc2.expect(|_| 1.0, u).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn far_tail_is_a_conditioning_error() {
        let th = Thermo::new(Potential::OneMinusCosine, 1.0, 0.0).unwrap();
        let mc = Microcanonical::new(&th, &[0.0; 4], 1).unwrap();
        assert!(matches!(mc.expect(|r| r[0], 50.0), Err(Error::Conditioning(_))));
        assert!(Microcanonical::new(&th, &[0.0; 3], 3).is_err());
        assert!(Microcanonical::new(&th, &[0.0], 1).is_err());
    }
}
