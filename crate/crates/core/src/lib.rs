//! Spectral laboratory for one-dimensional capillary water waves on a periodic domain.
//!
//! The crate is organized bottom-up:
//!
//! - [`spectral`]: grids, fields, Fourier multipliers, norms, dyadic bands.
//! - [`vortex_sheet`]: interface reconstruction, Birkhoff–Rott velocity and the sheet remainders.
//! - [`evolution`]: the second-order dispersive equation as a first-order system, energies, time stepping.
//! - [`linear`]: the variable-coefficient linearized operator and its solver.
//! - [`parametrix`]: dyadic Hamilton–Jacobi phases, the leading-order parametrix and kernel probes.
//! - [`strichartz`]: admissible pairs, Strichartz and local-smoothing suites, scaling and diagram data.

pub mod error;
pub mod evolution;
pub mod linear;
pub mod parametrix;
pub mod spectral;
pub mod strichartz;
pub mod util;
pub mod vortex_sheet;

pub use error::{Error, Result};
