//! Numerical checks of the analytic toolbox: block-sum density expansions, ensemble
//! equivalence, sub-Gaussian orders, entropy inequalities, Hessian eigenvalues and the
//! Poisson gradient bound.

use serde::{Deserialize, Serialize};

mod edgeworth;
mod eigen;
mod ensembles;
mod entropy;
mod poisson;
mod subgaussian;

pub use edgeworth::{edgeworth_check, hermite, EdgeworthReport, EDGEWORTH_HALF_WIDTH, EDGEWORTH_POINTS};
pub use eigen::{eig_bound, hessian_tridiagonal, EigBound};
pub use ensembles::{ee_gap, EeGap, LocalFunction};
pub use entropy::{entropy_tools, gaussian_relative_entropy, moment_from_tail, relative_entropy, EntropyReport};
pub use poisson::{default_points, poisson_solve, PoissonProblem, PoissonSolution, RhsSpec, Wave, BOUNDARY_DENSITY_MAX, RESIDUAL_MAX};
pub use subgaussian::{subgaussian_order, Distribution, SubgaussianReport, S_GRID_POINTS};

/// One named inequality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, bound: f64, pass: bool) -> Self {
        Check { name: name.into(), value, bound, pass }
    }
}
