use super::state::{ModelVariant, WaveState};
use crate::error::Result;
use crate::spectral::{RealField, C64};
use crate::vortex_sheet::{sheet_rates, Physics, SheetState};

/// Squared linear frequency `ω² = (S/2)|ξ|³ + g|ξ|`.
pub fn omega_squared(xi: f64, physics: Physics) -> f64 {
    let a = xi.abs();
    0.5 * physics.s * a * a * a + physics.g * a
}

/// `(S/2)H∂³u − gH∂u`, i.e. the multiplier `−ω²`.
pub fn linear_operator(u: &RealField, physics: Physics) -> RealField {
    let vals = u.grid().apply_symbol(u.values(), |xi| C64::new(-omega_squared(xi, physics), 0.0));
    RealField::new(u.grid(), vals).expect("grid length")
}

/// `(θ_t, u_t)` of the interface system for given `(θ, u)`.
pub fn sheet_system(theta: &RealField, u: &RealField, physics: Physics) -> Result<(RealField, RealField)> {
    let st = SheetState::from_u(theta, u)?;
    let r = sheet_rates(&st, physics)?;
    Ok((r.theta_t, r.u_t))
}

/// Transport equation for θ: full `−uθ_α + H∂u + r₁ (+ torus mean)`, or
/// `−uθ_α + H∂u` (truncated), or `H∂u` (linear-free).
pub fn theta_rate(state: &WaveState, variant: ModelVariant) -> Result<RealField> {
    let hu = state.u.deriv(1).hilbert();
    match variant {
        ModelVariant::LinearFree => Ok(hu),
        ModelVariant::Truncated => hu.sub(&state.u.mul(&state.theta.deriv(1))?),
        ModelVariant::Full => {
            let st = SheetState::from_u(&state.theta, &state.u)?;
            crate::vortex_sheet::theta_t(&st)
        }
    }
}

/// Step of the centered difference used for the directional derivative in [`remainder_r`].
pub const R_FD_STEP: f64 = 1e-3;

/// `R(u, u_t, θ)` such that `u_tt − (S/2)H∂³u + gH∂u = −2uu_αt − u²u_αα + R`.
///
/// `u_tt` is the derivative of the interface system's `u_t(θ, u)` in the
/// direction `(θ_t, u_t)`, taken with a fourth-order centered stencil; `θ_t`
/// comes from the transport equation and `u_t = v − uu_α` from the state.
pub fn remainder_r(state: &WaveState) -> Result<RealField> {
    let th_t = theta_rate(state, ModelVariant::Full)?;
    remainder_r_with(state, &th_t)
}

fn remainder_r_with(state: &WaveState, th_t: &RealField) -> Result<RealField> {
    let physics = state.physics;
    let u_t = state.u_t()?;
    let h = R_FD_STEP;
    let eval = |s: f64| -> Result<RealField> {
        let th = state.theta.add(&th_t.scale(s))?;
        let u = state.u.add(&u_t.scale(s))?;
        Ok(sheet_system(&th, &u, physics)?.1)
    };
    let (p2, p1, m1, m2) = (eval(2.0 * h)?, eval(h)?, eval(-h)?, eval(-2.0 * h)?);
    let u_tt = m2.sub(&p2)?.add(&p1.sub(&m1)?.scale(8.0))?.scale(1.0 / (12.0 * h));
    let u = &state.u;
    let quasi = u.mul(&u_t.deriv(1))?.scale(2.0).add(&u.mul(u)?.mul(&u.deriv(2))?)?;
    u_tt.sub(&linear_operator(u, physics))?.add(&quasi)
}

/// Right side of the first-order system for `(u, v, θ)`.
#[derive(Debug, Clone)]
pub struct Rhs {
    pub du: RealField,
    pub dv: RealField,
    pub dtheta: RealField,
}

/// `u_t = v − uu_α`, `v_t = (S/2)H∂³u − gH∂u − uv_α + R̃` with `R̃ = R + vu_α`
/// (`R ≡ 0` for the truncated variant); the linear-free variant is `u_t = v`,
/// `v_t = (S/2)H∂³u − gH∂u`.
pub fn rhs_uv(state: &WaveState, variant: ModelVariant) -> Result<Rhs> {
    let lin = linear_operator(&state.u, state.physics);
    let dtheta = theta_rate(state, variant)?;
    if variant == ModelVariant::LinearFree {
        return Ok(Rhs { du: state.v.clone(), dv: lin, dtheta });
    }
    let (u, v) = (&state.u, &state.v);
    let ua = u.deriv(1);
    let du = v.sub(&u.mul(&ua)?)?;
    let mut dv = lin.sub(&u.mul(&v.deriv(1))?)?.add(&v.mul(&ua)?)?;
    if variant == ModelVariant::Full {
        dv = dv.add(&remainder_r_with(state, &dtheta)?)?;
    }
    Ok(Rhs { du, dv, dtheta })
}
