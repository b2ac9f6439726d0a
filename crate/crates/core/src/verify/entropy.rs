use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

use super::Check;

/// `H(ν; μ) = Σ ν log(ν/μ)` for probability vectors; `+∞` when `ν` charges a `μ`-null point.
pub fn relative_entropy(nu: &[f64], mu: &[f64]) -> Result<f64> {
    if nu.len() != mu.len() || nu.is_empty() {
        return Err(Error::Precondition("distributions need equal nonzero length".into()));
    }
    if nu.iter().chain(mu).any(|p| !(*p >= 0.0)) {
        return Err(Error::Precondition("probabilities must be non-negative".into()));
    }
    let mut h = 0.0;
    for (a, b) in nu.iter().zip(mu) {
        if *a == 0.0 {
            continue;
        }
        if *b == 0.0 {
            return Ok(f64::INFINITY);
        }
        h += a * (a / b).ln();
    }
    Ok(h.max(0.0))
}

/// `H(N(m_f, v_f); N(m_μ, v_μ))` in closed form.
pub fn gaussian_relative_entropy(mean_f: f64, var_f: f64, mean_mu: f64, var_mu: f64) -> f64 {
    let d = mean_f - mean_mu;
    0.5 * (var_f / var_mu + d * d / var_mu - 1.0 - (var_f / var_mu).ln())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyReport {
    pub entropy: f64,
    pub finite: bool,
    pub checks: Vec<Check>,
}

/// Entropy of `ν` relative to `μ` and the event / exponential-moment inequalities on
/// the supplied events (indicator vectors) and observables over the `α`-grid.
pub fn entropy_tools(nu: &[f64], mu: &[f64], events: &[Vec<bool>], observables: &[Vec<f64>], alphas: &[f64]) -> Result<EntropyReport> {
    let h = relative_entropy(nu, mu)?;
    let finite = h.is_finite();
    let mut checks = Vec::new();
    if finite {
        for (k, ev) in events.iter().enumerate() {
            let (mass_nu, mass_mu) = ev.iter().zip(nu.iter().zip(mu)).filter(|(e, _)| **e).fold((0.0, 0.0), |acc, (_, (a, b))| (acc.0 + a, acc.1 + b));
            // μ(A) = 1 makes the right-hand side infinite; the inequality is void there.
            let bound = if mass_mu >= 1.0 { f64::INFINITY } else { (h + 2f64.ln()) / -mass_mu.ln() };
            checks.push(Check::new(format!("event_{k}"), mass_nu, bound, mass_nu <= bound + 1e-12));
        }
        for (k, x) in observables.iter().enumerate() {
            let lhs: f64 = nu.iter().zip(x).map(|(a, v)| a * v).sum();
            for &alpha in alphas {
                let lme = mu.iter().zip(x).map(|(b, v)| b * (alpha * v).exp()).sum::<f64>().ln();
                let bound = (h + lme) / alpha;
                checks.push(Check::new(format!("observable_{k}_alpha_{alpha}"), lhs, bound, lhs <= bound + 1e-12));
            }
        }
    }
    Ok(EntropyReport { entropy: h, finite, checks })
}

/// `E|X|^p` from a tail envelope `P(|X| > λ)` by `∫ pλ^{p-1} P(|X| > λ) dλ`, together with
/// `K_{p,q} C^{p/q}`, `K_{p,q} = q/(q - p)`.
pub fn moment_from_tail(p: f64, q: f64, c: f64, tail: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    if !(p >= 1.0 && q > p && c > 0.0) {
        return Err(Error::Precondition(format!("need 1 <= p < q and C > 0, got p = {p}, q = {q}, C = {c}")));
    }
    let a = c.powf(1.0 / q);
    let head = adaptive_simpson(&|l: f64| p * l.powf(p - 1.0) * tail(l), 0.0, a, 1e-13);
    // λ = a/t maps [a, ∞) onto (0, 1].
    let rest = adaptive_simpson(
        &|t: f64| {
            let l = a / t;
            p * l.powf(p - 1.0) * tail(l) * a / (t * t)
        },
        1e-12,
        1.0,
        1e-13,
    );
    Ok((head + rest, q / (q - p) * c.powf(p / q)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_laws_have_zero_entropy() {
        let mu = [0.2, 0.3, 0.5];
        let rep = entropy_tools(&mu, &mu, &[vec![true, false, false]], &[vec![1.0, -2.0, 0.5]], &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(rep.entropy, 0.0);
        assert!(rep.checks.iter().all(|c| c.pass));
    }

    #[test]
    fn gaussian_closed_form() {
        let (m, v) = (0.7, 1.9);
        assert!((gaussian_relative_entropy(m, v, 0.0, v) - m * m / (2.0 * v)).abs() < 1e-15);
        // Fine discretization of both Gaussians agrees with the closed form.
        let xs: Vec<f64> = (0..4001).map(|j| -15.0 + j as f64 * 0.0075).collect();
        let w = |mean: f64| {
            let raw: Vec<f64> = xs.iter().map(|x| (-(x - mean) * (x - mean) / (2.0 * v)).exp()).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|r| r / s).collect::<Vec<_>>()
        };
        let h = relative_entropy(&w(m), &w(0.0)).unwrap();
        assert!((h - m * m / (2.0 * v)).abs() < 1e-10, "{h}");
    }

    #[test]
    fn support_mismatch_is_infinite() {
        let rep = entropy_tools(&[0.5, 0.5], &[1.0, 0.0], &[], &[], &[]).unwrap();
        assert!(!rep.finite && rep.entropy.is_infinite());
    }

    #[test]
    fn inequalities_hold_for_tilted_laws() {
        let mu = [0.1, 0.2, 0.3, 0.4];
        let nu = [0.4, 0.3, 0.2, 0.1];
        let events = vec![vec![true, false, false, false], vec![true, true, false, false]];
        let obs = vec![vec![3.0, 1.0, -1.0, -3.0]];
        let rep = entropy_tools(&nu, &mu, &events, &obs, &[0.1, 0.5, 1.0, 4.0]).unwrap();
        assert!(rep.entropy > 0.0 && rep.checks.len() == 6);
        assert!(rep.checks.iter().all(|c| c.pass), "{:?}", rep.checks);
    }

    #[test]
    fn pareto_tail_attains_the_moment_bound() {
        let (m, bound) = moment_from_tail(1.0, 2.0, 1.0, |l| (1.0f64).min(l.powi(-2))).unwrap();
        assert!((m - 2.0).abs() < 1e-8 && (bound - 2.0).abs() < 1e-15, "{m}");
    }
}
