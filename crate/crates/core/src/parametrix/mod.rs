//! Leading-order parametrix of the linearized operator on one dyadic band.
//!
//! Phases `φ^{j,±} = αξ ± |ξ|^{3/2}(t + ϑ^{j,±})` come from the characteristics of the
//! rescaled eikonal equation; the data split `f^{j,±}` inverts the initial-value map;
//! `w^j = Σ_± Σ_ξ e^{iφ^±} f̂^±` is evaluated by direct summation over grid frequencies.
//! Kernel probes measure the dispersive decay of the glued oscillatory integral.

mod characteristics;
mod evaluate;
mod kernel;
mod phase;

pub use characteristics::{
    band_range, default_launch_points, horizon, solve_characteristics, solve_characteristics_with, CharacteristicFlow,
    CoefficientTable, HamiltonJacobiProblem, Sign, DEFAULT_T_SCALE, MIN_JACOBIAN, MIN_STEPS,
};
pub use evaluate::{
    band_leakage, build_data_components, evaluate_parametrix, leading_order_components, parametrix_fidelity, residual_E, DataComponents,
    FidelityReport, Parametrix, PhasePair, ResidualSeries, DEFAULT_NEUMANN_ORDER, NEUMANN_RATIO_LIMIT,
    SYSTEM_TOLERANCE,
};
pub use kernel::{
    ff_star_fit, ff_star_probe, kernel_probe, kernel_sup, kernel_values, prefactor_fit, stationary_prediction,
    xi_critical, DispersionKernelProbe, FfStarSample, KernelConfig, KernelSample,
};
pub use phase::{
    assemble_phase, build_phase, chi2, chi2_tilde, export_phase, import_phase, PhaseColumn, PhaseConfig,
    PhaseFunction, PhaseSidecar, PhaseSlice, CONSTANT_TOLERANCE,
};
