//! Method of lines for `∂_t u = λ ∂_x u`, `∂_t v = -λ ∂_x v`, `λ = λ((u - v)/2)`.
//!
//! `u` travels left and `v` right, so `u` is differentiated with the five-point stencil
//! biased to the right and `v` with its mirror image; time stepping is classical RK4.

use crate::error::{Error, Result};
use crate::thermo::Thermo;

use super::profile::Profile;
use super::riemann::RiemannMap;

/// Fifth-order upwind-biased first derivative using `i-2..=i+3`.
pub fn diff_right(f: &[f64], h: f64, out: &mut [f64]) {
    const C: [f64; 6] = [3.0, -30.0, -20.0, 60.0, -15.0, 2.0];
    stencil(f, h, -2, &C, out);
}

/// Fifth-order upwind-biased first derivative using `i-3..=i+2`.
pub fn diff_left(f: &[f64], h: f64, out: &mut [f64]) {
    const C: [f64; 6] = [-2.0, 15.0, -60.0, 20.0, 30.0, -3.0];
    stencil(f, h, -3, &C, out);
}

fn stencil(f: &[f64], h: f64, first: isize, c: &[f64; 6], out: &mut [f64]) {
    let m = f.len() as isize;
    let scale = 1.0 / (60.0 * h);
    for i in 0..m {
        let mut acc = 0.0;
        for (k, ck) in c.iter().enumerate() {
            acc += ck * f[(i + first + k as isize).rem_euclid(m) as usize];
        }
        out[i as usize] = acc * scale;
    }
}

fn max_gradient(f: &[f64], h: f64) -> f64 {
    let m = f.len();
    (0..m).map(|i| (f[(i + 1) % m] - f[(i + m - 1) % m]).abs() / (2.0 * h)).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasilinearOptions {
    pub cfl: f64,
    /// Blow-up is declared once a gradient exceeds this multiple of its initial maximum.
    pub blowup_factor: f64,
    /// Spacing of stored snapshots (`None` keeps only the endpoints).
    pub record_every: Option<f64>,
}

impl Default for QuasilinearOptions {
    fn default() -> Self {
        QuasilinearOptions { cfl: 0.4, blowup_factor: 1e3, record_every: None }
    }
}

#[derive(Debug, Clone)]
pub struct QuasilinearSolution {
    pub profile: Profile,
    /// Step times with the maxima of `|∂_x u|` and `|∂_x v|`.
    pub times: Vec<f64>,
    pub grad_u: Vec<f64>,
    pub grad_v: Vec<f64>,
    pub snapshots: Vec<Profile>,
}

impl QuasilinearSolution {
    pub fn write_gradients_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,max_du,max_dv")?;
        for ((t, a), b) in self.times.iter().zip(&self.grad_u).zip(&self.grad_v) {
            writeln!(w, "{t:.16e},{a:.16e},{b:.16e}")?;
        }
        Ok(())
    }
}

struct Rhs<'a> {
    map: &'a RiemannMap,
    h: f64,
    du: Vec<f64>,
    dv: Vec<f64>,
}

impl Rhs<'_> {
    fn eval(&mut self, u: &[f64], v: &[f64], ku: &mut [f64], kv: &mut [f64]) {
        diff_right(u, self.h, &mut self.du);
        diff_left(v, self.h, &mut self.dv);
        for i in 0..u.len() {
            let lam = self.map.speed(0.5 * (u[i] - v[i]));
            ku[i] = lam * self.du[i];
            kv[i] = -lam * self.dv[i];
        }
    }
}

/// Advances `initial` by `t` with a prepared map.
pub fn solve_quasilinear_with(initial: &Profile, t: f64, map: &RiemannMap, opts: QuasilinearOptions) -> Result<QuasilinearSolution> {
    if !(t >= 0.0) {
        return Err(Error::Precondition(format!("evolution time must be >= 0, got {t}")));
    }
    let t0 = initial.t;
    let mut times = Vec::new();
    if let Some(d) = opts.record_every {
        if !(d > 0.0) {
            return Err(Error::Precondition(format!("record spacing must be positive, got {d}")));
        }
        let mut k = 1;
        while (k as f64) * d < t * (1.0 - 1e-12) {
            times.push(t0 + k as f64 * d);
            k += 1;
        }
    }
    times.push(t0 + t);
    solve_quasilinear_schedule(initial, &times, map, opts)
}

/// Advances `initial` through the increasing `times`, landing on each exactly; the
/// snapshots are the initial profile followed by one profile per time.
pub fn solve_quasilinear_schedule(initial: &Profile, times: &[f64], map: &RiemannMap, opts: QuasilinearOptions) -> Result<QuasilinearSolution> {
    let m = initial.m();
    if m < 6 {
        return Err(Error::Precondition(format!("need at least 6 grid points, got {m}")));
    }
    let t0 = initial.t;
    if times.is_empty() || times[0] < t0 || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("schedule must be non-empty, increasing and start at or after the initial time".into()));
    }
    let h = 1.0 / m as f64;
    let mut st = map.to_riemann(initial)?;
    let lam_max = st.u.iter().zip(&st.v).map(|(u, v)| map.speed(0.5 * (u - v))).fold(0.0, f64::max);
    let dt_max = opts.cfl * h / lam_max.max(1e-12);

    let g0u = max_gradient(&st.u, h);
    let g0v = max_gradient(&st.v, h);
    let mut sol = QuasilinearSolution {
        profile: initial.clone(),
        times: vec![t0],
        grad_u: vec![g0u],
        grad_v: vec![g0v],
        snapshots: vec![initial.clone()],
    };
    let mut rhs = Rhs { map, h, du: vec![0.0; m], dv: vec![0.0; m] };
    let mut k: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; m]);
    let mut l: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; m]);
    let mut tu = vec![0.0; m];
    let mut tv = vec![0.0; m];
    let mut now = t0;
    for &target in times {
        let len = target - now;
        let steps = if len > 0.0 { (len / dt_max).ceil().max(1.0) as usize } else { 0 };
        let dt = if steps > 0 { len / steps as f64 } else { 0.0 };
        let start = now;
        for s in 1..=steps {
            rhs.eval(&st.u, &st.v, &mut k[0], &mut l[0]);
            for stage in 1..4 {
                let c = if stage == 3 { dt } else { 0.5 * dt };
                for i in 0..m {
                    tu[i] = st.u[i] + c * k[stage - 1][i];
                    tv[i] = st.v[i] + c * l[stage - 1][i];
                }
                rhs.eval(&tu, &tv, &mut k[stage], &mut l[stage]);
            }
            for i in 0..m {
                st.u[i] += dt / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
                st.v[i] += dt / 6.0 * (l[0][i] + 2.0 * l[1][i] + 2.0 * l[2][i] + l[3][i]);
            }
            now = if s == steps { target } else { start + s as f64 * dt };
            let gu = max_gradient(&st.u, h);
            let gv = max_gradient(&st.v, h);
            sol.times.push(now);
            sol.grad_u.push(gu);
            sol.grad_v.push(gv);
            let worst = if g0u > 0.0 && gu > opts.blowup_factor * g0u {
                Some(gu)
            } else if g0v > 0.0 && gv > opts.blowup_factor * g0v {
                Some(gv)
            } else if !(gu.is_finite() && gv.is_finite()) {
                Some(f64::INFINITY)
            } else {
                None
            };
            if let Some(gradient) = worst {
                return Err(Error::PdeBlowUp { t: now, gradient });
            }
        }
        now = target;
        st.t = target;
        sol.snapshots.push(map.to_profile(&st));
    }
    sol.profile = sol.snapshots.last().unwrap().clone();
    Ok(sol)
}

/// Quasi-linear p-system `∂_t p = ∂_x 𝔱(r)`, `∂_t r = ∂_x p` over time `t`.
pub fn solve_quasilinear(initial: &Profile, t: f64, thermo: &Thermo) -> Result<QuasilinearSolution> {
    let map = RiemannMap::for_profile(thermo, initial)?;
    solve_quasilinear_with(initial, t, &map, QuasilinearOptions::default())
}

/// First time the gradient criterion fires within `horizon`, or `+∞`.
pub fn detect_blowup(initial: &Profile, horizon: f64, map: &RiemannMap, opts: QuasilinearOptions) -> Result<f64> {
    match solve_quasilinear_with(initial, horizon, map, opts) {
        Ok(_) => Ok(f64::INFINITY),
        Err(Error::PdeBlowUp { t, .. }) => Ok(t),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;
    use crate::psystem::linear::solve_linear;
    use crate::stats::linear_fit;
    use std::f64::consts::PI;

    fn init(m: usize) -> Profile {
        Profile::from_fns(m, |x| 0.3 * (2.0 * PI * x).sin(), |x| 0.4 * (2.0 * PI * x).cos() + 0.1 * (4.0 * PI * x).sin()).unwrap()
    }

    #[test]
    fn stencils_are_fifth_order() {
        let errs: Vec<f64> = [32usize, 64]
            .iter()
            .map(|&m| {
                let h = 1.0 / m as f64;
                let f: Vec<f64> = (0..m).map(|i| (2.0 * PI * i as f64 * h).sin()).collect();
                let mut a = vec![0.0; m];
                let mut b = vec![0.0; m];
                diff_right(&f, h, &mut a);
                diff_left(&f, h, &mut b);
                (0..m).map(|i| (a[i] - 2.0 * PI * (2.0 * PI * i as f64 * h).cos()).abs().max((b[i] - 2.0 * PI * (2.0 * PI * i as f64 * h).cos()).abs())).fold(0.0, f64::max)
            })
            .collect();
        assert!((errs[0] / errs[1]).log2() > 4.8);
    }

    #[test]
    fn harmonic_agrees_with_linear_solver() {
        let th = Thermo::new(Potential::OneMinusCosine, 1.0, 0.0).unwrap();
        let p0 = init(512);
        let q = solve_quasilinear(&p0, 0.5, &th).unwrap();
        assert!(q.profile.max_diff(&solve_linear(&p0, 0.5)) < 1e-6);
    }

    #[test]
    fn riemann_invariants_obey_maximum_principle() {
        let th = Thermo::new(Potential::OneMinusCosine, 1.0, 0.3).unwrap();
        let p0 = init(256);
        let map = RiemannMap::for_profile(&th, &p0).unwrap();
        let u0 = map.to_riemann(&p0).unwrap();
        let sol = solve_quasilinear_with(&p0, 0.5, &map, QuasilinearOptions::default()).unwrap();
        let u1 = map.to_riemann(&sol.profile).unwrap();
        let sup = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        assert!(sup(&u1.u) <= sup(&u0.u) + 1e-8);
        assert!(sup(&u1.v) <= sup(&u0.v) + 1e-8);
    }

    #[test]
    fn deviation_from_linear_is_first_order_in_sigma() {
        let p0 = init(256);
        let lin = solve_linear(&p0, 0.5);
        let sigmas = [0.1, 0.05, 0.025];
        let devs: Vec<f64> = sigmas
            .iter()
            .map(|&s| {
                let th = Thermo::new(Potential::OneMinusCosine, 1.0, s).unwrap();
                solve_quasilinear(&p0, 0.5, &th).unwrap().profile.max_diff(&lin)
            })
            .collect();
        let lx: Vec<f64> = sigmas.iter().map(|s| s.ln()).collect();
        let ly: Vec<f64> = devs.iter().map(|d| d.ln()).collect();
        let (slope, _) = linear_fit(&lx, &ly);
        assert!((slope - 1.0).abs() <= 0.15, "slope {slope}");
    }

    #[test]
    fn grid_refinement_reduces_error() {
        let th = Thermo::new(Potential::OneMinusCosine, 1.0, 0.3).unwrap();
        let f = |m: usize| init(m);
        let map = RiemannMap::for_profile(&th, &f(64)).unwrap();
        let run = |m: usize| solve_quasilinear_with(&f(m), 0.5, &map, QuasilinearOptions::default()).unwrap().profile;
        let reference = run(1024);
        let err = |m: usize| run(m).max_diff(&reference.resample(m));
        let (e1, e2) = (err(64), err(128));
        assert!(e1 / e2 >= 8.0, "reduction {}", e1 / e2);
    }

    #[test]
    fn constant_data_stays_constant() {
        let th = Thermo::new(Potential::OneMinusCosine, 1.0, 0.2).unwrap();
        let p0 = Profile::constant(32, 0.2, -0.3);
        let out = solve_quasilinear(&p0, 0.3, &th).unwrap();
        assert!(out.profile.max_diff(&p0) < 1e-12);
    }
}
