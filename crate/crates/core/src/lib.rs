pub mod dynamics;
pub mod error;
pub mod fluctuation;
pub mod gibbs;
pub mod linalg;
pub mod potential;
pub mod psystem;
pub mod quadrature;
pub mod regime;
pub mod rng;
pub mod stats;
pub mod thermo;
pub mod verify;
