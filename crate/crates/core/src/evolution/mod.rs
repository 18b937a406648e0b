//! Time evolution of the dispersive system for `(u, v = u_t + uu_α)` coupled
//! with the transport equation for θ, its energies and remainder.

mod energy;
mod init;
mod integrator;
mod rhs;
mod state;

pub use energy::{coupling_terms, commutator_energy_term, energy_k, energy_report, gronwall_fit, EnergyReport, GronwallFit};
pub use init::{initialize, InitReport, INIT_DAMPING, INIT_MAX_ITER, INIT_TOLERANCE};
pub use integrator::{
    dt_cap, evolve, step, EvolveConfig, Observer, Trajectory, DEFAULT_BLOWUP_THRESHOLD, DT_CAP_FACTOR,
};
pub use rhs::{linear_operator, omega_squared, remainder_r, rhs_uv, sheet_system, theta_rate, Rhs, R_FD_STEP};
pub use state::{ModelVariant, WaveSnapshot, WaveState};
