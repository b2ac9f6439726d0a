use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::Microcanonical;
use crate::quadrature::HERMITE_LADDER;
use crate::thermo::Thermo;

/// Local functions of the first one or two stretches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalFunction {
    /// `r_1`
    Stretch,
    /// `r_1²`
    StretchSquared,
    /// `U'(r_1)`
    PerturbationForce,
    /// `r_1 r_2`
    PairProduct,
}

impl LocalFunction {
    pub fn arity(self) -> usize {
        match self {
            LocalFunction::PairProduct => 2,
            _ => 1,
        }
    }

    fn eval(self, thermo: &Thermo, r: &[f64]) -> f64 {
        match self {
            LocalFunction::Stretch => r[0],
            LocalFunction::StretchSquared => r[0] * r[0],
            LocalFunction::PerturbationForce => thermo.pot.u1(r[0]),
            LocalFunction::PairProduct => r[0] * r[1],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EeGap {
    pub n: usize,
    pub k: usize,
    /// Conditioning value, the mean of the block mean.
    pub u: f64,
    pub canonical: f64,
    pub microcanonical: f64,
    pub variance: f64,
    /// `|⟨F|u⟩ - E[F]|`.
    pub gap: f64,
    /// `(k/n)·√Var(F)`.
    pub bound: f64,
}

/// Canonical mean and variance of `F` under the product of the first `k` site measures.
fn canonical_moments(thermo: &Thermo, taus: &[f64], f: LocalFunction) -> Result<(f64, f64)> {
    let moments = |order: usize| -> (f64, f64) {
        let (r1, q1, _) = thermo.site_rule(taus[0], order);
        let (mut m1, mut m2) = (0.0, 0.0);
        if f.arity() == 1 {
            for (x, q) in r1.iter().zip(&q1) {
                let v = f.eval(thermo, &[*x]);
                m1 += q * v;
                m2 += q * v * v;
            }
        } else {
            let (r2, q2, _) = thermo.site_rule(taus[1], order);
            for (x, qx) in r1.iter().zip(&q1) {
                for (y, qy) in r2.iter().zip(&q2) {
                    let v = f.eval(thermo, &[*x, *y]);
                    m1 += qx * qy * v;
                    m2 += qx * qy * v * v;
                }
            }
        }
        (m1, m2 - m1 * m1)
    };
    let top = if f.arity() == 1 { HERMITE_LADDER.len() } else { 3 };
    let mut prev = moments(HERMITE_LADDER[0]);
    for &order in &HERMITE_LADDER[1..top] {
        let cur = moments(order);
        if (cur.0 - prev.0).abs() <= 1e-11 * (1.0 + cur.0.abs()) && (cur.1 - prev.1).abs() <= 1e-10 * (1.0 + cur.1.abs()) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature("canonical moments did not settle".into()))
}

/// Micro-canonical versus canonical expectation of `F` at the canonical block mean.
pub fn ee_gap(thermo: &Thermo, taus: &[f64], f: LocalFunction) -> Result<EeGap> {
    let n = taus.len();
    let k = f.arity();
    if n > 128 {
        return Err(Error::Precondition(format!("block sizes up to 128 are supported, got {n}")));
    }
    let micro = Microcanonical::new(thermo, taus, k)?;
    let u = micro.density().mean();
    let microcanonical = micro.expect(|r| f.eval(thermo, r), u)?;
    let (canonical, variance) = canonical_moments(thermo, taus, f)?;
    Ok(EeGap {
        n,
        k,
        u,
        canonical,
        microcanonical,
        variance,
        gap: (microcanonical - canonical).abs(),
        bound: k as f64 / n as f64 * variance.max(0.0).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;

    fn gauss(beta: f64) -> Thermo {
        Thermo::new(Potential::OneMinusCosine, beta, 0.0).unwrap()
    }

    #[test]
    fn gaussian_mean_has_no_gap() {
        let g = ee_gap(&gauss(1.0), &[0.4; 12], LocalFunction::Stretch).unwrap();
        assert!(g.gap < 1e-9, "{g:?}");
    }

    #[test]
    fn gaussian_square_gap_is_the_conditional_variance_shift() {
        for (beta, n) in [(1.0, 10), (2.5, 24)] {
            let g = ee_gap(&gauss(beta), &vec![-0.3; n], LocalFunction::StretchSquared).unwrap();
            let want = 1.0 / (beta * n as f64);
            assert!((g.gap - want).abs() < 1e-9, "{g:?} vs {want}");
        }
    }

    #[test]
    fn pair_product_gaussian_gap() {
        // Cov(r1, r2 | mean) = -1/(βn) for iid Gaussians.
        let g = ee_gap(&gauss(1.0), &[0.0; 16], LocalFunction::PairProduct).unwrap();
        assert!((g.gap - 1.0 / 16.0).abs() < 1e-8, "{g:?}");
    }

    #[test]
    fn gap_shrinks_with_block_size() {
        let th = Thermo::new(Potential::OneMinusCosine, 1.0, 0.2).unwrap();
        let a = ee_gap(&th, &[0.5; 16], LocalFunction::PerturbationForce).unwrap();
        let b = ee_gap(&th, &[0.5; 32], LocalFunction::PerturbationForce).unwrap();
        assert!(b.gap < a.gap && a.gap > 0.0, "{a:?} {b:?}");
        assert!(a.bound > 0.0);
    }
}
