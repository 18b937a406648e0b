use serde::{Deserialize, Serialize};

use super::free::rotate_modes;
use super::problem::{apply_p, LinearProblem};
use crate::error::{Error, Result};
use crate::spectral::RealField;
use crate::util::d1_fourth_order;

/// Stability cap factor shared with the nonlinear integrator: `dt ≤ 0.5·Δα^{3/2}`.
pub const LINEAR_DT_CAP_FACTOR: f64 = 0.5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearConfig {
    /// Requested step; shrunk so an integer number of steps reaches `t_final`.
    pub dt: f64,
    /// Keep every this many steps (the first and last are always kept).
    pub snapshot_stride: usize,
    pub blowup_threshold: f64,
    /// Compute the a-posteriori residual `‖Pu − R‖` from the snapshots.
    pub residual: bool,
}

impl LinearConfig {
    pub fn new(dt: f64) -> Self {
        Self { dt, snapshot_stride: 1, blowup_threshold: 1e8, residual: true }
    }
}

/// A-posteriori residual of a trajectory: `‖Pu − R‖_{L²}` over the snapshots,
/// with `∂_t²u` from fourth-order differences of the stored `∂_tu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_l2: f64,
    /// `max_l2` divided by the largest `‖H∂³u‖_{L²}` seen.
    pub relative: f64,
}

#[derive(Debug, Clone)]
pub struct LinearTrajectory {
    pub dt: f64,
    pub steps: usize,
    pub times: Vec<f64>,
    pub u: Vec<RealField>,
    pub u_t: Vec<RealField>,
    /// `v = ∂_tu + V∂u`.
    pub v: Vec<RealField>,
    pub residual: Option<ResidualReport>,
    pub failure: Option<Error>,
}

impl LinearTrajectory {
    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }

    pub fn last(&self) -> (&RealField, &RealField) {
        (self.u.last().expect("nonempty"), self.u_t.last().expect("nonempty"))
    }
}

/// Non-stiff part of the first-order system: `(−V∂u, −V∂v + V_t∂u + VV_α∂u + R)`.
fn lower_order(p: &LinearProblem, t: f64, u: &RealField, v: &RealField) -> Result<(RealField, RealField)> {
    let forcing = p.forcing.eval(p.grid(), t)?;
    let (nu, mut nv) = if p.coefficient.is_zero() {
        (RealField::zeros(p.grid()), RealField::zeros(p.grid()))
    } else {
        let c = p.coefficient.value(t)?;
        let ct = p.coefficient.time_derivative(t)?;
        let ua = u.deriv(1);
        let coeff = ct.add(&c.mul(&c.deriv(1))?)?;
        let nu = c.mul(&ua)?.scale(-1.0);
        let nv = c.mul(&v.deriv(1))?.scale(-1.0).add(&coeff.mul(&ua)?)?;
        (nu, nv)
    };
    if let Some(f) = forcing {
        nv = nv.add(&f)?;
    }
    Ok((nu, nv))
}

fn w2(xi: f64) -> f64 {
    xi.abs().powi(3)
}

/// One Lawson–RK4 step of `u_t = −V∂u + v`, `v_t = −V∂v + H∂³u + V_t∂u + VV_α∂u + R`.
pub fn linear_step(p: &LinearProblem, t: f64, u: &RealField, v: &RealField, h: f64) -> Result<(RealField, RealField)> {
    let prop = |a: &RealField, b: &RealField, s: f64| rotate_modes(a, b, s, w2);
    let axpy = |y: &RealField, a: f64, x: &RealField| y.add(&x.scale(a));
    let (k1u, k1v) = lower_order(p, t, u, v)?;
    let (ua, va) = prop(&axpy(u, 0.5 * h, &k1u)?, &axpy(v, 0.5 * h, &k1v)?, 0.5 * h);
    let (k2u, k2v) = lower_order(p, t + 0.5 * h, &ua, &va)?;
    let (uh, vh) = prop(u, v, 0.5 * h);
    let (k3u, k3v) = lower_order(p, t + 0.5 * h, &axpy(&uh, 0.5 * h, &k2u)?, &axpy(&vh, 0.5 * h, &k2v)?)?;
    let (u1, v1) = prop(u, v, h);
    let (p3u, p3v) = prop(&k3u, &k3v, 0.5 * h);
    let (k4u, k4v) = lower_order(p, t + h, &axpy(&u1, h, &p3u)?, &axpy(&v1, h, &p3v)?)?;
    let (p1u, p1v) = prop(&k1u, &k1v, h);
    let (m23u, m23v) = prop(&k2u.add(&k3u)?, &k2v.add(&k3v)?, 0.5 * h);
    let c = h / 6.0;
    let un = u1.add(&p1u.add(&m23u.scale(2.0))?.add(&k4u)?.scale(c))?;
    let vn = v1.add(&p1v.add(&m23v.scale(2.0))?.add(&k4v)?.scale(c))?;
    Ok((un, vn))
}

fn u_t_from_v(p: &LinearProblem, t: f64, u: &RealField, v: &RealField) -> Result<RealField> {
    if p.coefficient.is_zero() {
        return Ok(v.clone());
    }
    v.sub(&p.coefficient.value(t)?.mul(&u.deriv(1))?)
}

/// Solves the problem on `[0, t_final]`. On blowup the trajectory ends at the
/// last valid state and carries the error.
pub fn linear_solve(p: &LinearProblem, cfg: &LinearConfig) -> Result<LinearTrajectory> {
    if !(cfg.dt > 0.0) || cfg.snapshot_stride == 0 {
        return Err(Error::InvalidInput("need dt > 0 and snapshot_stride ≥ 1".into()));
    }
    let steps = (p.t_final / cfg.dt).ceil().max(1.0) as usize;
    let h = p.t_final / steps as f64;
    let cap = LINEAR_DT_CAP_FACTOR * p.grid().dx().powf(1.5);
    if h > cap {
        return Err(Error::StepTooLarge { dt: h, cap });
    }
    let mut u = p.u0.clone();
    let mut v = if p.coefficient.is_zero() {
        p.u1.clone()
    } else {
        p.u1.add(&p.coefficient.value(0.0)?.mul(&u.deriv(1))?)?
    };
    let mut tr = LinearTrajectory {
        dt: h,
        steps: 0,
        times: vec![0.0],
        u: vec![u.clone()],
        u_t: vec![p.u1.clone()],
        v: vec![v.clone()],
        residual: None,
        failure: None,
    };
    for n in 1..=steps {
        let t = (n - 1) as f64 * h;
        let next = linear_step(p, t, &u, &v, h).and_then(|(un, vn)| {
            let big = un.max_abs().max(vn.max_abs());
            if !un.is_finite() || !vn.is_finite() || big > cfg.blowup_threshold {
                Err(Error::Blowup { t: t + h })
            } else {
                Ok((un, vn))
            }
        });
        match next {
            Ok((un, vn)) => {
                u = un;
                v = vn;
                tr.steps = n;
            }
            Err(e) => {
                tr.failure = Some(e);
                let tl = (n - 1) as f64 * h;
                if tr.times.last() != Some(&tl) {
                    tr.times.push(tl);
                    tr.u_t.push(u_t_from_v(p, tl, &u, &v)?);
                    tr.u.push(u.clone());
                    tr.v.push(v.clone());
                }
                break;
            }
        }
        if n % cfg.snapshot_stride == 0 || n == steps {
            let tn = n as f64 * h;
            tr.times.push(tn);
            tr.u_t.push(u_t_from_v(p, tn, &u, &v)?);
            tr.u.push(u.clone());
            tr.v.push(v.clone());
        }
    }
    if cfg.residual && tr.is_ok() {
        tr.residual = residual(p, &tr)?;
    }
    Ok(tr)
}

/// `‖Pu − R‖` over a trajectory with uniformly spaced snapshots; `None` if
/// fewer than five snapshots or the spacing is not uniform.
pub fn residual(p: &LinearProblem, tr: &LinearTrajectory) -> Result<Option<ResidualReport>> {
    let n = tr.times.len();
    if n < 5 {
        return Ok(None);
    }
    let h = tr.times[1] - tr.times[0];
    if tr.times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Ok(None);
    }
    let g = p.grid();
    let npts = g.n();
    let mut column = vec![0.0; n];
    let mut u_tt = vec![vec![0.0; npts]; n];
    for m in 0..npts {
        for (c, f) in column.iter_mut().zip(&tr.u_t) {
            *c = f.values()[m];
        }
        for (i, row) in u_tt.iter_mut().enumerate() {
            row[m] = d1_fourth_order(&column, h, i);
        }
    }
    let mut max_l2: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (i, row) in u_tt.into_iter().enumerate() {
        let t = tr.times[i];
        let utt = RealField::new(g, row)?;
        let mut r = apply_p(&p.coefficient, t, &tr.u[i], &tr.u_t[i], &utt)?;
        if let Some(f) = p.forcing.eval(g, t)? {
            r = r.sub(&f)?;
        }
        max_l2 = max_l2.max(r.l2_norm());
        scale = scale.max(tr.u[i].deriv(3).hilbert().l2_norm());
    }
    let relative = if scale > 0.0 { max_l2 / scale } else { max_l2 };
    Ok(Some(ResidualReport { max_l2, relative }))
}
