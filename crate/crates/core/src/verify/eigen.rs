use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigen;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigBound {
    pub lambda_min: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Diagonal and off-diagonal of the `(n-1)×(n-1)` Hessian in the y-coordinates:
/// `diag_j = b_j + b_{j+1}`, `off_j = -b_{j+1}`.
pub fn hessian_tridiagonal(b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = b.len().saturating_sub(1);
    let diag = (0..m).map(|j| b[j] + b[j + 1]).collect();
    let off = (0..m.saturating_sub(1)).map(|j| -b[j + 1]).collect();
    (diag, off)
}

/// Smallest eigenvalue of the Hessian against `6c/((n-1)(n+1))`.
pub fn eig_bound(b: &[f64], c: f64) -> Result<EigBound> {
    let n = b.len();
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    if !(c > 0.0) {
        return Err(Error::Precondition(format!("c must be positive, got {c}")));
    }
    if let Some(v) = b.iter().find(|&&v| !(v >= c)) {
        return Err(Error::Precondition(format!("entry {v} below c = {c}")));
    }
    let (diag, off) = hessian_tridiagonal(b);
    let lambda_min = tridiagonal_eigen(&diag, &off, false)?.0[0];
    let nf = n as f64;
    let bound = 6.0 * c / ((nf - 1.0) * (nf + 1.0));
    Ok(EigBound { lambda_min, bound, ok: lambda_min >= bound - 1e-12 })
}
