//! Macroscopic equations: the linear and quasi-linear p-systems, the adjoint system and
//! the shock-time bound.

pub mod backward;
pub mod linear;
pub mod profile;
pub mod quasilinear;
pub mod riemann;
pub mod shock;

pub use backward::{pairing, solve_adjoint, solve_backward, CoefficientField};
pub use linear::solve_linear;
pub use profile::{resample_values, spectral_derivative, Profile, TrigProfile, TrigTerm};
pub use quasilinear::{detect_blowup, solve_quasilinear, solve_quasilinear_schedule, solve_quasilinear_with, QuasilinearOptions, QuasilinearSolution};
pub use riemann::{RiemannMap, RiemannState};
pub use shock::{shock_time_bound, shock_time_bound_thermo};
