//! Interface formulation: curve reconstruction from the tangent angle, the
//! Birkhoff–Rott velocity, the smoothing operators `K[z]` and `[H, h]`, the
//! modified tangential velocity and the remainders r₁–r₃.

mod dynamics;
mod interface;
mod kernels;
mod state;

pub use dynamics::{
    gamma_t_rhs, gamma_t_solve, j_apply, moving_curve_term, one_plus_two_j_matrix, remainder_r2_r3,
    sheet_rates, solve_one_plus_two_j, theta_t, w_t_normal, CurveVelocity, SheetRates, DENSE_SOLVE_MAX_N,
};
pub use interface::{reconstruct_curve, Interface};
pub use kernels::{br_conj, check_separation, commutator_h, commutator_h_complex, k_apply, k_matrix, smoothing_op_k};
pub use state::{
    birkhoff_rott, compute_m, m_components, remainder_r1, u_from_gamma, Physics, SheetRecord, SheetState,
    SheetVelocity, PICARD_DAMPING, PICARD_MAX_ITER,
};
