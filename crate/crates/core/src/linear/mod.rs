//! The variable-coefficient linear operator
//! `P = ∂_t² − H∂³ + 2V∂∂_t + V²∂²`, exact free propagation, a Lawson–RK4
//! solver for the first-order form in `(u, v = ∂_tu + V∂u)` and energy audits.

mod coefficient;
mod energy;
mod free;
mod problem;
mod solve;

pub use coefficient::{CoefficientField, CoefficientRecord};
pub use energy::{linear_energy, linear_energy_audit, GainReport, LinearEnergyAudit};
pub use free::{free_frequency, free_propagator, rotate_modes};
pub use problem::{apply_p, semiclassical_window, Forcing, LinearProblem};
pub use solve::{linear_solve, linear_step, residual, LinearConfig, LinearTrajectory, ResidualReport, LINEAR_DT_CAP_FACTOR};
