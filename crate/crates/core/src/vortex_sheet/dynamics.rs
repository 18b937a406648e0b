//! Time derivatives of a sheet state: θ_t, the γ_t solve, `W_t` and the
//! remainders r₂, r₃, and the resulting `u_t`.
//!
//! The curve is always the one reconstructed from θ with `|z_α| = 1`, so its
//! time derivative `z_t` is obtained by differentiating that reconstruction.
//! This is the kinematic velocity `W + (U∥ − W·t̂)t̂` plus the uniform
//! dilation `c₀(z − z(0))` that keeps the parametrization at unit speed on the torus.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::interface::Interface;
use super::kernels::{br_conj, flat_cot_table, hilbert_circulant, k_matrix, kp_derivatives};
use super::state::{remainder_r1, Physics, SheetState};
use crate::error::{Error, Result};
use crate::spectral::{RealField, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Largest grid for which `(1 + 2J)` is factorized densely.
pub const DENSE_SOLVE_MAX_N: usize = 512;
const SOLVE_TOL: f64 = 1e-9;

/// Time derivative of the reconstructed curve.
#[derive(Debug, Clone)]
pub struct CurveVelocity {
    pub z_t: Vec<C64>,
    pub z_t_alpha: Vec<C64>,
    pub z_t_alpha_alpha: Vec<C64>,
    pub period_t: C64,
}

impl CurveVelocity {
    pub fn from_theta_t(iface: &Interface, theta_t: &RealField) -> Self {
        let grid = iface.grid();
        let z_t_alpha: Vec<C64> =
            iface.z_alpha().iter().zip(theta_t.values()).map(|(z, &tt)| I * tt * z).collect();
        let mean = z_t_alpha.iter().sum::<C64>() / grid.n() as f64;
        let fluct: Vec<C64> = z_t_alpha.iter().map(|w| w - mean).collect();
        let periodic = grid.antiderivative_projected_complex(&fluct);
        let z_t = periodic.iter().zip(grid.nodes()).map(|(p, a)| p + mean * a).collect();
        let z_t_alpha_alpha = grid.deriv_complex(&z_t_alpha, 1);
        Self { z_t, z_t_alpha, z_t_alpha_alpha, period_t: mean * grid.length() }
    }
}

/// `θ_t = −uθ_α + H∂_α u + r₁ + ½⟨γθ_α⟩`.
pub fn theta_t(state: &SheetState) -> Result<RealField> {
    let theta_a = state.theta().deriv(1);
    let u = state.u();
    let r1 = remainder_r1(state)?;
    let drift = 0.5 * state.gamma().mul(&theta_a)?.mean();
    let adv = u.mul(&theta_a)?;
    Ok(u.deriv(1).hilbert().add(&r1)?.sub(&adv)?.map(|v| v + drift))
}

/// Correction `Q` in `Φ̄(W_t) = Φ̄_BR(γ_t) + Q` due to the moving curve.
///
/// The singular part is split off as `−(1/2i)H(γz_tα/z_α²)`; the remainder
/// is a smooth periodic integral whose diagonal value is
/// `(z_tα z_αα/z_α − z_tαα/2)/z_α²`.
pub fn moving_curve_term(iface: &Interface, gamma: &RealField, vel: &CurveVelocity) -> Vec<C64> {
    let grid = iface.grid();
    let n = grid.n();
    let (z, za, zaa, p) = (iface.z(), iface.z_alpha(), iface.z_alpha_alpha(), iface.period());
    let (zt, zta, ztaa, pt) = (&vel.z_t, &vel.z_t_alpha, &vel.z_t_alpha_alpha, vel.period_t);
    let g = gamma.values();
    let table = flat_cot_table(grid);
    let sing: Vec<C64> = (0..n).map(|k| g[k] * zta[k] / (za[k] * za[k])).collect();
    let hs = grid.hilbert_complex(&sing);
    let scale = grid.dx() / (2.0 * PI * I);
    (0..n)
        .map(|m| {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                let b = if j == m {
                    (zta[m] * zaa[m] / za[m] - 0.5 * ztaa[m]) / (za[m] * za[m])
                } else {
                    let w = z[m] - z[j];
                    let k = (w / p).re.round();
                    let (dw, dp) = kp_derivatives(w - k * p, p);
                    let wt = zt[m] - zt[j] - k * pt;
                    dw * wt + dp * pt + zta[j] / (za[j] * za[j]) * table[(m + n - j) % n]
                };
                acc += g[j] * b;
            }
            -hs[m] / (2.0 * I) + scale * acc
        })
        .collect()
}

/// `J f = Re(z_α Φ̄_BR(f))`, the tangential Birkhoff–Rott velocity of density `f`.
pub fn j_apply(iface: &Interface, f: &RealField) -> Result<RealField> {
    let b = br_conj(iface, f.values())?;
    let v = b.iter().zip(iface.z_alpha()).map(|(b, z)| (z * b).re).collect();
    RealField::new(iface.grid(), v)
}

/// Dense matrix of `1 + 2J`.
pub fn one_plus_two_j_matrix(iface: &Interface) -> Result<DMatrix<f64>> {
    let grid = iface.grid();
    let n = grid.n();
    let k = k_matrix(iface)?;
    let c = hilbert_circulant(grid);
    let za = iface.z_alpha();
    Ok(DMatrix::from_fn(n, n, |m, j| {
        let br = C64::new(c[(m + n - j) % n], 0.0) / (2.0 * I * za[j]) + k[(m, j)];
        let delta = if m == j { 1.0 } else { 0.0 };
        delta + 2.0 * (za[m] * br).re
    }))
}

/// Right side `Sθ_αα − 2gθ + ∂_α(Δγ) − ½γγ_α + 2Δ W_α·t̂ − 2R₅` of the γ_t equation,
/// with `Δ = U∥ − W·t̂` and `R₅ = Re(z_α Q)`.
pub fn gamma_t_rhs(state: &SheetState, vel: &CurveVelocity, physics: Physics) -> Result<RealField> {
    let iface = state.interface();
    let theta = state.theta();
    let gamma = state.gamma();
    let delta = &state.velocity().delta;
    let (_, wat) = state.w_alpha()?;
    let q = moving_curve_term(iface, gamma, vel);
    let r5: Vec<f64> = q.iter().zip(iface.z_alpha()).map(|(q, z)| (z * q).re).collect();
    let r5 = RealField::new(iface.grid(), r5)?;
    theta
        .deriv(2)
        .scale(physics.s)
        .sub(&theta.scale(2.0 * physics.g))?
        .add(&delta.mul(gamma)?.deriv(1))?
        .sub(&gamma.mul(&gamma.deriv(1))?.scale(0.5))?
        .add(&delta.mul(&wat)?.scale(2.0))?
        .sub(&r5.scale(2.0))
}

/// Solves `(1 + 2J[z])γ_t = rhs`: dense LU for `N ≤ 512`, Richardson iteration otherwise.
pub fn solve_one_plus_two_j(iface: &Interface, rhs: &RealField) -> Result<RealField> {
    let grid = iface.grid();
    let n = grid.n();
    let bnorm = rhs.max_abs();
    if bnorm == 0.0 {
        return Ok(RealField::zeros(grid));
    }
    if n <= DENSE_SOLVE_MAX_N {
        let a = one_plus_two_j_matrix(iface)?;
        let b = DVector::from_column_slice(rhs.values());
        let x = a.clone().lu().solve(&b).ok_or(Error::SolverDivergence {
            solver: "1+2J dense",
            iterations: 1,
            residual: f64::INFINITY,
        })?;
        let res = (&a * &x - &b).amax() / bnorm;
        if res > SOLVE_TOL {
            return Err(Error::SolverDivergence { solver: "1+2J dense", iterations: 1, residual: res });
        }
        return RealField::new(grid, x.as_slice().to_vec());
    }
    let mut x = rhs.clone();
    let mut res = f64::INFINITY;
    for it in 0..200 {
        let r = rhs.sub(&x)?.sub(&j_apply(iface, &x)?.scale(2.0))?;
        res = r.max_abs() / bnorm;
        if res <= 1e-2 * SOLVE_TOL {
            return Ok(x);
        }
        if !res.is_finite() || (it > 20 && res > 1.0) {
            break;
        }
        x = x.add(&r.scale(0.8))?;
    }
    if res <= SOLVE_TOL {
        return Ok(x);
    }
    Err(Error::SolverDivergence { solver: "1+2J iteration", iterations: 200, residual: res })
}

/// γ_t for a given θ_t.
pub fn gamma_t_solve(state: &SheetState, theta_t: &RealField, physics: Physics) -> Result<RealField> {
    physics.validate()?;
    let vel = CurveVelocity::from_theta_t(state.interface(), theta_t);
    let rhs = gamma_t_rhs(state, &vel, physics)?;
    solve_one_plus_two_j(state.interface(), &rhs)
}

/// `W_t·n̂` from `Φ̄(W_t) = Φ̄_BR(γ_t) + Q`.
pub fn w_t_normal(state: &SheetState, gamma_t: &RealField, vel: &CurveVelocity) -> Result<RealField> {
    let iface = state.interface();
    let b = br_conj(iface, gamma_t.values())?;
    let q = moving_curve_term(iface, state.gamma(), vel);
    let v = b.iter().zip(&q).zip(iface.z_alpha()).map(|((b, q), z)| (I * z * (b + q)).re).collect();
    RealField::new(iface.grid(), v)
}

/// All first-order time derivatives of a sheet state.
#[derive(Debug, Clone)]
pub struct SheetRates {
    pub theta_t: RealField,
    pub gamma_t: RealField,
    pub r1: RealField,
    pub r2: RealField,
    pub w_t_normal: RealField,
    pub u_t: RealField,
}

/// `r₂ = W_t·n̂ + uW_α·n̂ + ½γθ_t + ½γuθ_α`.
fn r2_from_parts(state: &SheetState, wtn: &RealField, theta_t: &RealField) -> Result<RealField> {
    let (wan, _) = state.w_alpha()?;
    let u = state.u();
    let g = state.gamma();
    let theta_a = state.theta().deriv(1);
    wtn.add(&u.mul(&wan)?)?
        .add(&g.mul(theta_t)?.scale(0.5))?
        .add(&g.mul(u)?.mul(&theta_a)?.scale(0.5))
}

/// θ_t, γ_t, r₁, r₂ and
/// `u_t = (S/2)θ_αα − gθ − uu_α − c₀Δ + ⟨U⊥θ_t⟩ + ∂_α^{-1}(−r₂θ_α + (θ_t + uθ_α)²)`.
///
/// The mean terms are what the torus adds; on the line they vanish. The
/// antiderivative discards the mean of its argument.
pub fn sheet_rates(state: &SheetState, physics: Physics) -> Result<SheetRates> {
    physics.validate()?;
    let theta = state.theta();
    let u = state.u();
    let r1 = remainder_r1(state)?;
    let theta_a = theta.deriv(1);
    let drift = 0.5 * state.gamma().mul(&theta_a)?.mean();
    let adv = u.mul(&theta_a)?;
    let th_t = u.deriv(1).hilbert().add(&r1)?.sub(&adv)?.map(|v| v + drift);
    let vel = CurveVelocity::from_theta_t(state.interface(), &th_t);
    let rhs = gamma_t_rhs(state, &vel, physics)?;
    let gamma_t = solve_one_plus_two_j(state.interface(), &rhs)?;
    let wtn = w_t_normal(state, &gamma_t, &vel)?;
    let r2 = r2_from_parts(state, &wtn, &th_t)?;
    let q = th_t.add(&adv)?;
    let integrand = q.mul(&q)?.sub(&r2.mul(&theta_a)?)?;
    let v = state.velocity();
    let mean_term = v.w_normal.mul(&th_t)?.mean();
    let u_t = theta
        .deriv(2)
        .scale(0.5 * physics.s)
        .sub(&theta.scale(physics.g))?
        .sub(&u.mul(&u.deriv(1))?)?
        .sub(&v.delta.scale(v.c0))?
        .add(&integrand.antiderivative_projected())?
        .map(|x| x + mean_term);
    Ok(SheetRates { theta_t: th_t, gamma_t, r1, r2, w_t_normal: wtn, u_t })
}

/// `(r₂, r₃)` with `r₃ = r₂ − H(u_t)` for a supplied `u_t`.
pub fn remainder_r2_r3(state: &SheetState, u_t: &RealField, physics: Physics) -> Result<(RealField, RealField)> {
    let th_t = theta_t(state)?;
    let gamma_t = gamma_t_solve(state, &th_t, physics)?;
    let vel = CurveVelocity::from_theta_t(state.interface(), &th_t);
    let wtn = w_t_normal(state, &gamma_t, &vel)?;
    let r2 = r2_from_parts(state, &wtn, &th_t)?;
    let r3 = r2.sub(&u_t.hilbert())?;
    Ok((r2, r3))
}
