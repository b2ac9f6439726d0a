//! Linear adjoint system `∂_t h = [[0,1],[c,0]] ∂_x h` with `c(t,x) = 𝔱'(𝔯(t,x))`.
//!
//! The matrix is split into its positive- and negative-speed parts, each differentiated
//! with the matching upwind-biased stencil. Integrating backwards flips the sign of the
//! whole operator, so the roles of the two stencils are unchanged.

use crate::error::{Error, Result};

use super::profile::Profile;
use super::quasilinear::{diff_left, diff_right, QuasilinearSolution};
use super::riemann::RiemannMap;

/// `c = 𝔱'(𝔯)` on the grid at a sequence of times, linearly interpolated in between.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    pub times: Vec<f64>,
    pub c: Vec<Vec<f64>>,
}

impl CoefficientField {
    pub fn constant(m: usize, c: f64) -> Self {
        CoefficientField { times: vec![0.0], c: vec![vec![c; m]] }
    }

    /// Coefficient along a stored forward solution (use `record_every` for resolution).
    pub fn from_solution(sol: &QuasilinearSolution, map: &RiemannMap) -> Self {
        let times = sol.snapshots.iter().map(|s| s.t).collect();
        let c = sol.snapshots.iter().map(|s| s.r.iter().map(|&r| map.table().d1(r)).collect()).collect();
        CoefficientField { times, c }
    }

    pub fn m(&self) -> usize {
        self.c[0].len()
    }

    pub fn at(&self, t: f64, out: &mut [f64]) {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 || self.times.len() == 1 {
            out.copy_from_slice(&self.c[0]);
        } else if k == self.times.len() {
            out.copy_from_slice(&self.c[k - 1]);
        } else {
            let (a, b) = (self.times[k - 1], self.times[k]);
            let w = (t - a) / (b - a);
            for (o, (x, y)) in out.iter_mut().zip(self.c[k - 1].iter().zip(&self.c[k])) {
                *o = (1.0 - w) * x + w * y;
            }
        }
    }

    fn c_max(&self) -> f64 {
        self.c.iter().flatten().fold(0.0, |a, &b| f64::max(a, b))
    }
}

struct AdjointRhs<'a> {
    field: &'a CoefficientField,
    eps: f64,
    h: f64,
    c: Vec<f64>,
    dr: [Vec<f64>; 2],
    dl: [Vec<f64>; 2],
}

impl AdjointRhs<'_> {
    fn eval(&mut self, t: f64, hp: &[f64], hr: &[f64], kp: &mut [f64], kr: &mut [f64]) {
        self.field.at(t, &mut self.c);
        diff_right(hp, self.h, &mut self.dr[0]);
        diff_right(hr, self.h, &mut self.dr[1]);
        diff_left(hp, self.h, &mut self.dl[0]);
        diff_left(hr, self.h, &mut self.dl[1]);
        let e = self.eps;
        for i in 0..hp.len() {
            let c = self.c[i];
            let s = c.sqrt();
            let (a0, a1) = (self.dr[0][i], self.dr[1][i]);
            let (b0, b1) = (self.dl[0][i], self.dl[1][i]);
            kp[i] = 0.5 * (s * a0 + e * a1) + 0.5 * (-s * b0 + e * b1);
            kr[i] = 0.5 * (e * c * a0 + s * a1) + 0.5 * (e * c * b0 - s * b1);
        }
    }
}

/// Evolves `start` (components `(h_p, h_r)` at time `start.t`) to time `target`, in either
/// direction. Returns the solution at `start.t`, at each coefficient time strictly between,
/// and at `target`, in order of integration.
pub fn solve_adjoint(start: &Profile, field: &CoefficientField, target: f64, cfl: f64) -> Result<Vec<Profile>> {
    let m = start.m();
    if field.m() != m {
        return Err(Error::Precondition(format!("coefficient grid {} differs from data grid {m}", field.m())));
    }
    if field.c.iter().flatten().any(|c| !(*c > 0.0)) {
        return Err(Error::Precondition("adjoint coefficient must be positive".into()));
    }
    let span = target - start.t;
    let eps = if span >= 0.0 { 1.0 } else { -1.0 };
    let h = 1.0 / m as f64;
    let dt_max = cfl * h / field.c_max().sqrt();
    let mut stops: Vec<f64> = field.times.iter().copied().filter(|&s| (s - start.t) * eps > 0.0 && (target - s) * eps > 0.0).collect();
    if eps < 0.0 {
        stops.reverse();
    }
    stops.push(target);

    let mut rhs = AdjointRhs { field, eps, h, c: vec![0.0; m], dr: [vec![0.0; m], vec![0.0; m]], dl: [vec![0.0; m], vec![0.0; m]] };
    let mut hp = start.p.clone();
    let mut hr = start.r.clone();
    let mut t = start.t;
    let mut out = vec![start.clone()];
    let mut kp: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; m]);
    let mut kr: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; m]);
    let mut tp = vec![0.0; m];
    let mut tr = vec![0.0; m];
    for stop in stops {
        let len = (stop - t).abs();
        let steps = (len / dt_max).ceil().max(1.0) as usize;
        let dtau = len / steps as f64;
        for _ in 0..steps {
            // Stage times in physical time; the operator already carries the direction.
            rhs.eval(t, &hp, &hr, &mut kp[0], &mut kr[0]);
            for stage in 1..4 {
                let c = if stage == 3 { dtau } else { 0.5 * dtau };
                for i in 0..m {
                    tp[i] = hp[i] + c * kp[stage - 1][i];
                    tr[i] = hr[i] + c * kr[stage - 1][i];
                }
                rhs.eval(t + eps * c, &tp, &tr, &mut kp[stage], &mut kr[stage]);
            }
            for i in 0..m {
                hp[i] += dtau / 6.0 * (kp[0][i] + 2.0 * kp[1][i] + 2.0 * kp[2][i] + kp[3][i]);
                hr[i] += dtau / 6.0 * (kr[0][i] + 2.0 * kr[1][i] + 2.0 * kr[2][i] + kr[3][i]);
            }
            t += eps * dtau;
        }
        t = stop;
        if hp.iter().chain(&hr).any(|v| !v.is_finite()) {
            return Err(Error::PdeBlowUp { t, gradient: f64::INFINITY });
        }
        out.push(Profile { p: hp.clone(), r: hr.clone(), t });
    }
    Ok(out)
}

/// Backward solve from terminal data `terminal` (at `terminal.t`) down to `t0`; the last
/// entry is `h(t0)`.
pub fn solve_backward(terminal: &Profile, field: &CoefficientField, t0: f64) -> Result<Vec<Profile>> {
    if !(t0 <= terminal.t) {
        return Err(Error::Precondition(format!("t0 = {t0} lies after the terminal time {}", terminal.t)));
    }
    solve_adjoint(terminal, field, t0, 0.4)
}

/// `∫(a_p b_p + a_r b_r) dx` by the grid mean.
pub fn pairing(a: &Profile, b: &Profile) -> f64 {
    let m = a.m() as f64;
    a.p.iter().zip(&b.p).chain(a.r.iter().zip(&b.r)).map(|(x, y)| x * y).sum::<f64>() / m
}
