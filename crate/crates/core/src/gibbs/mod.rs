//! Exact sampling from product and local Gibbs measures, block-mean densities and
//! micro-canonical expectations.

pub mod density;
pub mod microcanonical;
pub mod sampling;

pub use density::{density_of_mean, DensityGrid, MeanDensity, SumDensity};
pub use microcanonical::{microcanonical_expect, Microcanonical};
pub use sampling::{acceptance_probability, sample_chain, sample_site, GibbsSpec, MAX_REJECTIONS};
