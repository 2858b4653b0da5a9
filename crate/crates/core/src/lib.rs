//! Numerical inverse scattering transform for the derivative nonlinear
//! Schrodinger equation in Gerdjikov-Ivanov gauge.
//!
//! The pipeline is: potential `q` on a [`SpatialGrid`] -> direct map
//! ([`direct::scattering_coefficients`]) -> reflection coefficient on the
//! Fourier-dual [`SpectralGrid`] -> exact phase evolution -> inverse map
//! ([`inverse::inverse_map`]) -> potential. An independent pseudospectral
//! stepper in [`oracle`] checks the pipeline.

pub mod direct;
pub mod error;
pub mod evolution;
pub mod exec;
pub mod fourier;
pub mod grid;
pub mod inverse;
pub mod io;
pub mod linalg;
pub mod oracle;

pub use error::{IstError, Result};
pub use exec::Execution;
pub use grid::{
    make_dual_spectral_grid, Potential, ScatteringData, SpatialGrid, SpectralGrid, WeightedNorms, C64,
};
