use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::rng::Stream;

/// Momenta and stretches on the discrete torus, the macroscopic clock and the replica's
/// private RNG stream.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub p: Vec<f64>,
    pub r: Vec<f64>,
    pub t: f64,
    pub rng: Stream,
}

impl ChainState {
    pub fn new(p: Vec<f64>, r: Vec<f64>, t: f64, rng: Stream) -> Result<Self> {
        if p.len() != r.len() || p.len() < 2 {
            return Err(Error::Precondition(format!("p and r need equal length >= 2, got {} and {}", p.len(), r.len())));
        }
        let state = ChainState { p, r, t, rng };
        if let Some(site) = state.first_non_finite() {
            return Err(Error::BlowUp { site, t });
        }
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn sum_p(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn sum_r(&self) -> f64 {
        self.r.iter().sum()
    }

    /// `H = Σ p_i²/2 + V_σ(r_i)`.
    pub fn energy(&self, pot: &Potential, sigma: f64) -> f64 {
        self.p.iter().zip(&self.r).map(|(p, r)| 0.5 * p * p + pot.v(sigma, *r)).sum()
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.p.iter().zip(&self.r).position(|(p, r)| !(p.is_finite() && r.is_finite()))
    }
}
