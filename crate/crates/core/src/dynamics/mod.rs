//! Noisy Hamiltonian chain on the discrete torus: drift, Strang-split stepping, scheduled
//! runs and trajectory output.

mod integrator;
pub mod io;
mod params;
mod run;
mod state;

pub use integrator::{drift_fields, step, Integrator};
pub use params::{max_dt, IndexConvention, Scheme, SimParams, DEFAULT_CFL};
pub use run::{run, Observer, RunSummary, DEFAULT_OBSERVATION_INTERVAL};
pub use state::ChainState;
