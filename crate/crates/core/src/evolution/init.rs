use serde::{Deserialize, Serialize};

use super::rhs::sheet_system;
use super::state::{ModelVariant, WaveState};
use crate::error::{Error, Result};
use crate::spectral::{RealField, C64};
use crate::vortex_sheet::Physics;

pub const INIT_TOLERANCE: f64 = 1e-8;
pub const INIT_MAX_ITER: usize = 200;
pub const INIT_DAMPING: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitReport {
    pub iterations: usize,
    /// Sup norm of `u₁ − u_t(θ₀, u₀)`, mean removed when `g = 0`.
    pub residual: f64,
    /// Mean of `u₁ − u_t(θ₀, u₀)`; not controllable through θ when `g = 0`.
    pub mean_mismatch: f64,
}

/// `((S/2)∂² − g)^{-1}f`; the zero mode is dropped when `g = 0`.
fn invert_principal(f: &RealField, physics: Physics) -> RealField {
    let vals = f.grid().apply_symbol(f.values(), |xi| {
        let d = -0.5 * physics.s * xi * xi - physics.g;
        if d == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            C64::new(1.0 / d, 0.0)
        }
    });
    RealField::new(f.grid(), vals).expect("grid length")
}

fn mismatch(u1: &RealField, theta: &RealField, u0: &RealField, physics: Physics) -> Result<(RealField, f64, f64)> {
    let d = u1.sub(&sheet_system(theta, u0, physics)?.1)?;
    let mean = d.mean();
    let res = if physics.g == 0.0 { d.map(|x| x - mean).max_abs() } else { d.max_abs() };
    Ok((d, res, mean))
}

/// Builds `(u, v, θ)` at `t = 0` from `u(0) = u₀`, `u_t(0) = u₁`.
///
/// For the full variant θ₀ solves `u_t(θ₀, u₀) = u₁` by a damped fixed point
/// preconditioned with the principal part `(S/2)∂²θ − gθ`; the other variants
/// use that principal relation alone. `v₀ = u₁ + u₀∂u₀` (or `u₁` for the
/// linear-free variant, where `v = u_t`).
pub fn initialize(u0: &RealField, u1: &RealField, physics: Physics, variant: ModelVariant) -> Result<(WaveState, InitReport)> {
    physics.validate()?;
    if **u0.grid() != **u1.grid() {
        return Err(Error::GridMismatch);
    }
    let mut theta = invert_principal(u1, physics);
    let report = if variant == ModelVariant::Full {
        let scale = u1.max_abs().max(u0.max_abs()).max(1e-300);
        let (mut d, mut res, mut mean) = mismatch(u1, &theta, u0, physics)?;
        let mut it = 0;
        while res > INIT_TOLERANCE * scale {
            if it == INIT_MAX_ITER {
                return Err(Error::SolverDivergence { solver: "theta initialization", iterations: it, residual: res });
            }
            theta = theta.add(&invert_principal(&d, physics).scale(INIT_DAMPING))?;
            (d, res, mean) = mismatch(u1, &theta, u0, physics)?;
            it += 1;
        }
        InitReport { iterations: it, residual: res, mean_mismatch: mean }
    } else {
        InitReport { iterations: 0, residual: 0.0, mean_mismatch: 0.0 }
    };
    let v0 = match variant {
        ModelVariant::LinearFree => u1.clone(),
        _ => u1.add(&u0.mul(&u0.deriv(1))?)?,
    };
    Ok((WaveState::new(0.0, u0.clone(), v0, theta, physics)?, report))
}
