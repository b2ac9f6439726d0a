//! `∇Ũ·∇ψ − Δψ = Ψ̃` on a box in the cumulative coordinates `y_j = −(x_1 + … + x_j)`,
//! `j < ℓ`, of a block of `ℓ` stretches with fixed total `y_* = −Σ x_j`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thermo::Thermo;

use super::eigen::eig_bound;

/// One plane wave `amplitude · sin(k·y + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub amplitude: f64,
    pub k: Vec<f64>,
    pub phase: f64,
}

/// Right-hand side `Ψ` as a function of `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RhsSpec {
    Zero,
    Linear { slope: Vec<f64>, offset: f64 },
    Waves { waves: Vec<Wave> },
}

impl RhsSpec {
    /// `count` waves with amplitudes in `[-1, 1]`, wave vectors in `[-1, 1]^dim`.
    pub fn random_waves(dim: usize, count: usize, rng: &mut impl Rng) -> Self {
        let waves = (0..count)
            .map(|_| Wave {
                amplitude: rng.random_range(-1.0..1.0),
                k: (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
                phase: rng.random_range(0.0..std::f64::consts::TAU),
            })
            .collect();
        RhsSpec::Waves { waves }
    }

    fn dim_ok(&self, dim: usize) -> bool {
        match self {
            RhsSpec::Zero => true,
            RhsSpec::Linear { slope, .. } => slope.len() == dim,
            RhsSpec::Waves { waves } => waves.iter().all(|w| w.k.len() == dim),
        }
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        match self {
            RhsSpec::Zero => 0.0,
            RhsSpec::Linear { slope, offset } => offset + dot(slope, y),
            RhsSpec::Waves { waves } => waves.iter().map(|w| w.amplitude * (dot(&w.k, y) + w.phase).sin()).sum(),
        }
    }

    pub fn gradient(&self, y: &[f64]) -> Vec<f64> {
        match self {
            RhsSpec::Zero => vec![0.0; y.len()],
            RhsSpec::Linear { slope, .. } => slope.clone(),
            RhsSpec::Waves { waves } => {
                let mut g = vec![0.0; y.len()];
                for w in waves {
                    let c = w.amplitude * (dot(&w.k, y) + w.phase).cos();
                    for (gi, ki) in g.iter_mut().zip(&w.k) {
                        *gi += c * ki;
                    }
                }
                g
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone)]
pub struct PoissonProblem {
    pub ell: usize,
    pub thermo: Thermo,
    /// Linear tilt, one tension per site.
    pub taus: Vec<f64>,
    pub rhs: RhsSpec,
    /// Fixed total; `None` uses `−Σ r̄(τ_j)`.
    pub y_star: Option<f64>,
    /// Points per axis; `None` picks [`default_points`].
    pub points: Option<usize>,
    /// Initial box half-width in standard deviations about the minimizer.
    pub half_width_sd: f64,
    /// Subtract the discrete invariant-measure mean of `Ψ` before solving.
    pub project: bool,
}

impl PoissonProblem {
    pub fn new(thermo: Thermo, taus: Vec<f64>, rhs: RhsSpec) -> Self {
        PoissonProblem { ell: taus.len(), thermo, taus, rhs, y_star: None, points: None, half_width_sd: 8.0, project: true }
    }
}

/// Grid points per axis by block size; the three-axis case is limited by banded-LU memory.
pub fn default_points(ell: usize) -> usize {
    match ell {
        2 => 257,
        3 => 129,
        _ => 25,
    }
}

pub const BOUNDARY_DENSITY_MAX: f64 = 1e-12;
pub const RESIDUAL_MAX: f64 = 1e-8;
const COMPATIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoissonSolution {
    pub ell: usize,
    pub y_star: f64,
    pub minimizer: Vec<f64>,
    /// Node coordinates per axis.
    pub axes: Vec<Vec<f64>>,
    /// Solution, axis 0 fastest, zero `e^{−Ũ}`-weighted mean.
    pub psi: Vec<f64>,
    pub max_grad: f64,
    /// `λ⁻¹ sup|∇Ψ|` with `λ` the smallest Hessian eigenvalue over the grid.
    pub grad_bound: f64,
    pub lambda: f64,
    pub rhs_grad_sup: f64,
    /// Relative max-norm residual of the discrete equation.
    pub residual: f64,
    /// Constant removed from `Ψ` to make the system solvable.
    pub projection_shift: f64,
    pub boundary_density: f64,
    pub grad_bound_ok: bool,
}

struct Block<'a> {
    thermo: &'a Thermo,
    taus: &'a [f64],
    y_star: f64,
}

impl Block<'_> {
    fn stretches(&self, y: &[f64]) -> Vec<f64> {
        let l = self.taus.len();
        (0..l)
            .map(|j| {
                let prev = if j == 0 { 0.0 } else { y[j - 1] };
                let cur = if j + 1 == l { self.y_star } else { y[j] };
                prev - cur
            })
            .collect()
    }

    fn energy(&self, y: &[f64]) -> f64 {
        let (b, s) = (self.thermo.beta, self.thermo.sigma);
        self.stretches(y).iter().zip(self.taus).map(|(x, t)| b * (self.thermo.pot.v(s, *x) - t * x)).sum()
    }

    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let (b, s) = (self.thermo.beta, self.thermo.sigma);
        let f: Vec<f64> = self.stretches(y).iter().zip(self.taus).map(|(x, t)| self.thermo.pot.v1(s, *x) - t).collect();
        (0..y.len()).map(|j| b * (f[j + 1] - f[j])).collect()
    }

    fn curvatures(&self, y: &[f64]) -> Vec<f64> {
        let (b, s) = (self.thermo.beta, self.thermo.sigma);
        self.stretches(y).iter().map(|x| b * self.thermo.pot.v2(s, *x)).collect()
    }

    fn minimize(&self) -> Result<Vec<f64>> {
        let l = self.taus.len();
        // Start from the canonical mean stretches scaled onto the constraint.
        let means: Vec<f64> = self.taus.iter().map(|t| self.thermo.mean_stretch(*t)).collect::<Result<_>>()?;
        let shift = (-self.y_star - means.iter().sum::<f64>()) / l as f64;
        let mut y = vec![0.0; l - 1];
        let mut acc = 0.0;
        for j in 0..l - 1 {
            acc -= means[j] + shift;
            y[j] = acc;
        }
        for _ in 0..100 {
            let g = self.gradient(&y);
            if norm(&g) < 1e-13 {
                return Ok(y);
            }
            let (d, o) = super::eigen::hessian_tridiagonal(&self.curvatures(&y));
            let step = solve_tridiagonal(&d, &o, &g);
            let e0 = self.energy(&y);
            let mut t = 1.0;
            loop {
                let trial: Vec<f64> = y.iter().zip(&step).map(|(a, s)| a - t * s).collect();
                if self.energy(&trial) <= e0 + 1e-14 * e0.abs().max(1.0) || t < 1e-8 {
                    y = trial;
                    break;
                }
                t *= 0.5;
            }
        }
        if norm(&self.gradient(&y)) < 1e-9 {
            Ok(y)
        } else {
            Err(Error::Conditioning("energy minimization did not converge".into()))
        }
    }
}

/// Symmetric tridiagonal solve (Thomas algorithm).
fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = rhs.to_vec();
    let mut m = diag[0];
    x[0] /= m;
    for i in 1..n {
        c[i - 1] = off[i - 1] / m;
        m = diag[i] - off[i - 1] * c[i - 1];
        x[i] = (x[i] - off[i - 1] * x[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// Band matrix with half-bandwidth `w`, factored in place as `LU` without pivoting.
struct Banded {
    n: usize,
    w: usize,
    a: Vec<f64>,
}

impl Banded {
    fn new(n: usize, w: usize) -> Self {
        Banded { n, w, a: vec![0.0; n * (2 * w + 1)] }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * (2 * self.w + 1) + (j + self.w - i)
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.a[k] += v;
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        if i.abs_diff(j) > self.w { 0.0 } else { self.a[self.idx(i, j)] }
    }

    fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.w);
                let hi = (i + self.w).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    fn factor(&mut self) -> Result<()> {
        let (n, w) = (self.n, self.w);
        let stride = 2 * w + 1;
        for k in 0..n {
            let pivot = self.a[k * stride + w];
            if !(pivot.abs() > 1e-300) {
                return Err(Error::Conditioning(format!("zero pivot at row {k}")));
            }
            let hi = (k + w).min(n - 1);
            let (head, tail) = self.a.split_at_mut((k + 1) * stride);
            let urow = &head[k * stride + w + 1..k * stride + w + 1 + (hi - k)];
            for i in k + 1..=hi {
                let row = &mut tail[(i - k - 1) * stride..(i - k) * stride];
                let lk = k + w - i;
                let l = row[lk] / pivot;
                row[lk] = l;
                if l != 0.0 {
                    for (r, u) in row[lk + 1..lk + 1 + (hi - k)].iter_mut().zip(urow) {
                        *r -= l * u;
                    }
                }
            }
        }
        Ok(())
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, w) = (self.n, self.w);
        let mut x = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(w);
            let s: f64 = (lo..i).map(|j| self.a[self.idx(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let hi = (i + w).min(n - 1);
            let s: f64 = (i + 1..=hi).map(|j| self.a[self.idx(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.a[self.idx(i, i)];
        }
        x
    }

    /// Solves `(LU)ᵀ z = b`.
    fn solve_transposed(&self, b: &[f64]) -> Vec<f64> {
        let (n, w) = (self.n, self.w);
        let mut z = b.to_vec();
        for j in 0..n {
            z[j] /= self.a[self.idx(j, j)];
            let hi = (j + w).min(n - 1);
            for i in j + 1..=hi {
                z[i] -= self.a[self.idx(j, i)] * z[j];
            }
        }
        for j in (0..n).rev() {
            let lo = j.saturating_sub(w);
            for i in lo..j {
                z[i] -= self.a[self.idx(j, i)] * z[j];
            }
        }
        z
    }
}

struct Grid {
    dim: usize,
    m: usize,
    axes: Vec<Vec<f64>>,
    steps: Vec<f64>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    fn multi(&self, mut k: usize) -> Vec<usize> {
        (0..self.dim)
            .map(|_| {
                let i = k % self.m;
                k /= self.m;
                i
            })
            .collect()
    }

    fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(a, &i)| self.axes[a][i]).collect()
    }

    /// Central differences inside, one-sided on the faces.
    fn gradient(&self, f: &[f64], k: usize, idx: &[usize]) -> Vec<f64> {
        (0..self.dim)
            .map(|a| {
                let (s, h, i) = (self.strides[a], self.steps[a], idx[a]);
                if i == 0 {
                    (f[k + s] - f[k]) / h
                } else if i + 1 == self.m {
                    (f[k] - f[k - s]) / h
                } else {
                    (f[k + s] - f[k - s]) / (2.0 * h)
                }
            })
            .collect()
    }
}

/// Largest Euclidean norm of the finite-difference gradient over all nodes.
fn max_gradient(grid: &Grid, f: &[f64]) -> f64 {
    (0..grid.len).map(|k| norm(&grid.gradient(f, k, &grid.multi(k)))).fold(0.0, f64::max)
}

pub fn poisson_solve(problem: &PoissonProblem) -> Result<PoissonSolution> {
    let ell = problem.ell;
    if !(2..=4).contains(&ell) {
        return Err(Error::Precondition(format!("block size must be 2, 3 or 4, got {ell}")));
    }
    if problem.taus.len() != ell {
        return Err(Error::Precondition(format!("{} tensions for block size {ell}", problem.taus.len())));
    }
    let dim = ell - 1;
    if !problem.rhs.dim_ok(dim) {
        return Err(Error::Precondition(format!("right-hand side is not {dim}-dimensional")));
    }
    let m = problem.points.unwrap_or_else(|| default_points(ell));
    if m < 5 {
        return Err(Error::Precondition(format!("need at least 5 points per axis, got {m}")));
    }
    if !(problem.half_width_sd > 0.0) {
        return Err(Error::Precondition("box half-width must be positive".into()));
    }
    let y_star = match problem.y_star {
        Some(v) => v,
        None => -problem.taus.iter().map(|t| problem.thermo.mean_stretch(*t)).sum::<Result<f64>>()?,
    };
    let block = Block { thermo: &problem.thermo, taus: &problem.taus, y_star };
    let minimizer = block.minimize()?;
    let e_min = block.energy(&minimizer);

    let (hd, ho) = super::eigen::hessian_tridiagonal(&block.curvatures(&minimizer));
    let sds: Vec<f64> = (0..dim)
        .map(|j| {
            let mut e = vec![0.0; dim];
            e[j] = 1.0;
            solve_tridiagonal(&hd, &ho, &e)[j].sqrt()
        })
        .collect();

    // Widen the box until the boundary carries negligible mass.
    let mut width = problem.half_width_sd;
    let mut grid = None;
    let mut boundary_density = f64::INFINITY;
    for _ in 0..6 {
        let axes: Vec<Vec<f64>> = (0..dim)
            .map(|a| (0..m).map(|i| minimizer[a] + width * sds[a] * (2.0 * i as f64 / (m - 1) as f64 - 1.0)).collect())
            .collect();
        let steps = axes.iter().map(|ax| ax[1] - ax[0]).collect();
        let strides: Vec<usize> = (0..dim).map(|a| m.pow(a as u32)).collect();
        let g = Grid { dim, m, axes, steps, strides, len: m.pow(dim as u32) };
        boundary_density = (0..g.len)
            .filter_map(|k| {
                let idx = g.multi(k);
                idx.iter().any(|&i| i == 0 || i + 1 == m).then(|| (-(block.energy(&g.point(&idx)) - e_min)).exp())
            })
            .fold(0.0, f64::max);
        if boundary_density <= BOUNDARY_DENSITY_MAX {
            grid = Some(g);
            break;
        }
        width *= 1.25;
    }
    let grid = grid.ok_or_else(|| Error::Resolution(format!("boundary density {boundary_density:e} above {BOUNDARY_DENSITY_MAX:e}")))?;
    let n = grid.len;
    let w = grid.strides[dim - 1];

    let mut op = Banded::new(n, w);
    let mut rhs = vec![0.0; n];
    let mut weight = vec![0.0; n];
    let mut rhs_grad_sup = 0.0f64;
    let mut lambda = f64::INFINITY;
    let mut nodes_b = Vec::with_capacity(n);
    for k in 0..n {
        let idx = grid.multi(k);
        let y = grid.point(&idx);
        let b = block.gradient(&y);
        rhs[k] = problem.rhs.value(&y);
        rhs_grad_sup = rhs_grad_sup.max(norm(&problem.rhs.gradient(&y)));
        weight[k] = (-(block.energy(&y) - e_min)).exp();
        nodes_b.push(block.curvatures(&y));
        for a in 0..dim {
            let (s, h, i, ba) = (grid.strides[a], grid.steps[a], idx[a], b[a]);
            if i == 0 {
                op.add(k, k + s, ba / h);
                op.add(k, k, -ba / h);
            } else if i + 1 == m {
                op.add(k, k, ba / h);
                op.add(k, k - s, -ba / h);
            } else {
                let d = 1.0 / (h * h);
                op.add(k, k + s, -d);
                op.add(k, k - s, -d);
                op.add(k, k, 2.0 * d);
                if ba.abs() * h <= 2.0 {
                    op.add(k, k + s, ba / (2.0 * h));
                    op.add(k, k - s, -ba / (2.0 * h));
                } else if ba > 0.0 {
                    op.add(k, k, ba / h);
                    op.add(k, k - s, -ba / h);
                } else {
                    op.add(k, k + s, ba / h);
                    op.add(k, k, -ba / h);
                }
            }
        }
    }
    let c = nodes_b.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    if !(c > 0.0) {
        return Err(Error::Precondition(format!("potential is not uniformly convex on the grid (min curvature {c})")));
    }
    for b in &nodes_b {
        lambda = lambda.min(eig_bound(b, c)?.lambda_min);
    }

    // Pin the central node, then recover the left null vector from the same factors.
    let pin = (0..dim).map(|a| (m / 2) * grid.strides[a]).sum::<usize>();
    let full = Banded { n, w, a: op.a.clone() };
    let pin_row: Vec<f64> = (0..n).map(|j| full.get(pin, j)).collect();
    for j in pin.saturating_sub(w)..=(pin + w).min(n - 1) {
        let k = op.idx(pin, j);
        op.a[k] = if j == pin { 1.0 } else { 0.0 };
    }
    op.factor()?;
    let mut null: Vec<f64> = op.solve_transposed(&pin_row.iter().map(|v| -v).collect::<Vec<_>>());
    null[pin] = 1.0;
    let null_total: f64 = null.iter().sum();
    let shift = dot(&null, &rhs) / null_total;
    let scale = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !problem.project && shift.abs() > COMPATIBILITY_TOL * scale.max(1.0) {
        return Err(Error::Compatibility(format!("right-hand side has invariant-measure mean {shift:e}")));
    }
    let projected: Vec<f64> = rhs.iter().map(|v| v - shift).collect();

    let mut b = projected.clone();
    b[pin] = 0.0;
    let mut psi = op.solve(&b);
    let wsum: f64 = weight.iter().sum();
    let gauge = dot(&weight, &psi) / wsum;
    psi.iter_mut().for_each(|v| *v -= gauge);

    let applied = full.mul(&psi);
    let res = applied.iter().zip(&projected).map(|(a, r)| (a - r).abs()).fold(0.0, f64::max);
    let residual = res / projected.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let residual = if res == 0.0 { 0.0 } else { residual };
    if residual > RESIDUAL_MAX && res > 1e-14 {
        return Err(Error::Conditioning(format!("discrete residual {residual:e} above {RESIDUAL_MAX:e}")));
    }

    let max_grad = max_gradient(&grid, &psi);
    let grad_bound = rhs_grad_sup / lambda;
    Ok(PoissonSolution {
        ell,
        y_star,
        minimizer,
        axes: grid.axes,
        psi,
        max_grad,
        grad_bound,
        lambda,
        rhs_grad_sup,
        residual,
        projection_shift: shift,
        boundary_density,
        grad_bound_ok: max_grad <= grad_bound * (1.0 + 1e-9) + 1e-12,
    })
}
