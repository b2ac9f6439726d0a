//! Fluctuation field, its spectral projections, and the ensemble observables built on it.

mod ensemble;
mod experiments;
mod field;
mod observables;

pub use ensemble::{EnsembleSummary, ReplicaEnsemble};
pub use experiments::{
    hydro_path, mode_transfer, BgExperiment, BgReport, HydroErrorExperiment, HydroErrorReport, MartingaleExperiment, MartingaleReport, SizePoint,
    TransportCheck, TransportExperiment, HYDRO_GRID,
};
pub use field::{field_transform, pair_field, project_field, spectral_field, SiteProfile, SpectralField, DEFAULT_CUTOFF, TIME_TOLERANCE};
pub use observables::{
    bg_integrand, bg_statistic, gaussian_abs_moment, hydro_error, hydro_functional, martingale_qv, martingale_qv_formula, trapezoid, MartingaleTracker,
    MIN_OBSERVATIONS_PER_UNIT_TIME, MIN_REPLICAS,
};
