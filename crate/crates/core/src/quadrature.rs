//! Gauss rules (Golub–Welsch) and adaptive Simpson integration.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::linalg::tridiagonal_eigen;

/// Nodes and weights of a Gauss rule, nodes ascending.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Orders tried by the adaptive Gauss–Hermite ladder: start at 64 and double four times.
pub const HERMITE_LADDER: [usize; 5] = [64, 128, 256, 512, 1024];

fn build(diag: Vec<f64>, off: Vec<f64>, mu0: f64) -> GaussRule {
    let (nodes, firsts) = tridiagonal_eigen(&diag, &off, true).expect("Jacobi matrix eigenproblem");
    let firsts = firsts.unwrap();
    let n = nodes.len();
    let mut weights: Vec<f64> = firsts.iter().map(|z| mu0 * z * z).collect();
    let mut nodes = nodes;
    // Both weight functions are even: symmetrize to remove round-off asymmetry.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

fn cached(kind: u8, n: usize, make: impl FnOnce() -> GaussRule) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<(u8, usize), Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&(kind, n)) {
        return rule.clone();
    }
    let rule = Arc::new(make());
    cache.lock().unwrap().entry((kind, n)).or_insert(rule).clone()
}

/// Gauss–Hermite rule for the weight `exp(-x²)`.
pub fn gauss_hermite(n: usize) -> Arc<GaussRule> {
    assert!(n >= 1);
    cached(0, n, || {
        let off = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
        build(vec![0.0; n], off, std::f64::consts::PI.sqrt())
    })
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    assert!(n >= 1);
    cached(1, n, || {
        let off = (1..n)
            .map(|k| {
                let k = k as f64;
                k / (4.0 * k * k - 1.0).sqrt()
            })
            .collect();
        build(vec![0.0; n], off, 2.0)
    })
}

/// `∫_a^b f` with an `n`-point Gauss–Legendre rule.
pub fn integrate_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let rule = gauss_legendre(n);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>()
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hermite_moments() {
        for &n in &HERMITE_LADDER {
            let rule = gauss_hermite(n);
            let m = |p: i32| rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(p)).sum::<f64>();
            let sp = PI.sqrt();
            assert!((m(0) - sp).abs() < 1e-13, "order {n}: {}", m(0) - sp);
            assert!((m(2) - sp / 2.0).abs() < 1e-13);
            assert!((m(4) - 0.75 * sp).abs() < 1e-12);
            assert!(m(3).abs() < 1e-14);
        }
    }

    #[test]
    fn hermite_gaussian_shift() {
        // ∫ e^{-x²} e^{2x} dx = √π e.
        let rule = gauss_hermite(64);
        let v: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * (2.0 * x).exp()).sum();
        assert!((v / (PI.sqrt() * 1f64.exp()) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn legendre_polynomials_exact() {
        let v = integrate_legendre(|x| x.powi(9) + 3.0 * x * x, -1.0, 2.0, 5);
        let exact = (2f64.powi(10) - 1.0) / 10.0 + (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn simpson_smooth() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-11);
        assert_eq!(adaptive_simpson(&|x: f64| x, 1.0, 1.0, 1e-9), 0.0);
    }
}
