//! Symmetric tridiagonal eigenproblems by implicit QL.

use crate::error::{Error, Result};

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off[i]` couples `i` and `i + 1`). When `first_row` is set, also
/// returns the first component of each normalized eigenvector, in the same order.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64], first_row: bool) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::Precondition(format!(
            "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
            n,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; if first_row { n } else { 0 }];
    if first_row {
        z[0] = 1.0;
    }

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Precondition("tridiagonal QL iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if first_row {
                    let f = z[i + 1];
                    z[i + 1] = s * z[i] + c * f;
                    z[i] = c * z[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = idx.iter().map(|&i| d[i]).collect();
    let firsts = first_row.then(|| idx.iter().map(|&i| z[i]).collect());
    Ok((values, firsts))
}
