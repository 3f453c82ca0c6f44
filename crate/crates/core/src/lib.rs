//! Numerical laboratory for the truncated periodic Benjamin-Ono flows: spectral
//! fields, Gaussian measures, modified energies and their time derivatives,
//! Wick calculus on lattice sums, and the experiment harness built on them.

pub mod dynamics;
pub mod energies;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod harness;
pub mod spectral;
pub mod stats;
pub mod wick;

pub use error::{Error, Result};
pub use gaussian::{EnsembleSpec, GaussianMeasure};
pub use num_complex::Complex64;
pub use spectral::{SmoothCutoff, SmoothProjector, SpectralField, TorusGrid};
