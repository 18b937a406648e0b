use serde::{Deserialize, Serialize};

use super::energy::{energy_report, gronwall_fit, GronwallFit};
use super::rhs::{linear_operator, omega_squared, rhs_uv};
use super::state::{ModelVariant, WaveSnapshot, WaveState};
use crate::error::{Error, Result};
use crate::linear::rotate_modes;
use crate::spectral::RealField;

/// Stability cap factor: `|dt| ≤ DT_CAP_FACTOR · Δα^{3/2}`.
pub const DT_CAP_FACTOR: f64 = 0.5;

/// Sup-norm level above which a run is declared blown up.
pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e6;

pub fn dt_cap(state: &WaveState) -> f64 {
    DT_CAP_FACTOR * state.grid().dx().powf(1.5)
}

fn dealias(f: &RealField) -> RealField {
    let g = f.grid();
    let mut spec = f.spectrum().to_vec();
    g.dealias_spectrum(&mut spec);
    RealField::new(g, g.inverse_real(&spec)).expect("grid length")
}

struct Stage {
    nu: RealField,
    nv: RealField,
    dtheta: RealField,
}

/// Nonlinear part of the right side (the right side minus the linear flow), dealiased.
fn nonlinear(state: &WaveState, variant: ModelVariant) -> Result<Stage> {
    let r = rhs_uv(state, variant)?;
    if !variant.is_nonlinear() {
        let z = RealField::zeros(state.grid());
        return Ok(Stage { nu: z.clone(), nv: z, dtheta: r.dtheta });
    }
    let nu = r.du.sub(&state.v)?;
    let nv = r.dv.sub(&linear_operator(&state.u, state.physics))?;
    Ok(Stage { nu: dealias(&nu), nv: dealias(&nv), dtheta: dealias(&r.dtheta) })
}

fn axpy(y: &RealField, a: f64, x: &RealField) -> Result<RealField> {
    y.add(&x.scale(a))
}

/// One Lawson–RK4 step: the linear part `(u_t, v_t) = (v, −ω²u)` is solved
/// exactly per mode and the nonlinear part is integrated in the rotating
/// frame; θ is advanced by classical RK4 through the same stages.
/// Negative `dt` integrates backward.
pub fn step(state: &WaveState, dt: f64, variant: ModelVariant) -> Result<WaveState> {
    let cap = dt_cap(state);
    if !dt.is_finite() || dt.abs() > cap {
        return Err(Error::StepTooLarge { dt, cap });
    }
    let physics = state.physics;
    let w2 = |xi: f64| omega_squared(xi, physics);
    let prop = |u: &RealField, v: &RealField, h: f64| rotate_modes(u, v, h, w2);
    let h = dt;
    let at = |u: RealField, v: RealField, theta: RealField| WaveState { t: state.t, u, v, theta, physics };

    let k1 = nonlinear(state, variant)?;
    let (ua, va) = prop(&axpy(&state.u, 0.5 * h, &k1.nu)?, &axpy(&state.v, 0.5 * h, &k1.nv)?, 0.5 * h);
    let k2 = nonlinear(&at(ua, va, axpy(&state.theta, 0.5 * h, &k1.dtheta)?), variant)?;
    let (uh, vh) = prop(&state.u, &state.v, 0.5 * h);
    let k3 = nonlinear(
        &at(axpy(&uh, 0.5 * h, &k2.nu)?, axpy(&vh, 0.5 * h, &k2.nv)?, axpy(&state.theta, 0.5 * h, &k2.dtheta)?),
        variant,
    )?;
    let (u1, v1) = prop(&state.u, &state.v, h);
    let (k3u, k3v) = prop(&k3.nu, &k3.nv, 0.5 * h);
    let k4 = nonlinear(
        &at(axpy(&u1, h, &k3u)?, axpy(&v1, h, &k3v)?, axpy(&state.theta, h, &k3.dtheta)?),
        variant,
    )?;

    let (k1u, k1v) = prop(&k1.nu, &k1.nv, h);
    let (m23u, m23v) = prop(&k2.nu.add(&k3.nu)?, &k2.nv.add(&k3.nv)?, 0.5 * h);
    let c = h / 6.0;
    let u = u1.add(&k1u.add(&m23u.scale(2.0))?.add(&k4.nu)?.scale(c))?;
    let v = v1.add(&k1v.add(&m23v.scale(2.0))?.add(&k4.nv)?.scale(c))?;
    let dth = k1.dtheta.add(&k2.dtheta.add(&k3.dtheta)?.scale(2.0))?.add(&k4.dtheta)?;
    let theta = axpy(&state.theta, c, &dth)?;
    let out = WaveState { t: state.t + h, u, v, theta, physics };
    if !out.is_finite() {
        return Err(Error::Blowup { t: out.t });
    }
    Ok(out)
}

/// Called after every accepted step; an error aborts the run.
pub trait Observer {
    fn observe(&mut self, state: &WaveState) -> Result<()>;
}

impl<F: FnMut(&WaveState) -> Result<()>> Observer for F {
    fn observe(&mut self, state: &WaveState) -> Result<()> {
        self(state)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub t_final: f64,
    /// Requested step; shrunk so that an integer number of steps reaches `t_final`.
    pub dt: f64,
    pub variant: ModelVariant,
    /// Snapshot every this many steps (the initial and final states are always kept).
    pub snapshot_stride: usize,
    /// Order `s` of the energy recorded at every step; `None` skips it.
    pub energy_order: Option<u32>,
    pub blowup_threshold: f64,
}

impl EvolveConfig {
    pub fn new(t_final: f64, dt: f64, variant: ModelVariant) -> Self {
        Self {
            t_final,
            dt,
            variant,
            snapshot_stride: usize::MAX,
            energy_order: None,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
        }
    }
}

/// Result of [`evolve`]. On failure `final_state` is the last valid state
/// and `failure` holds the error.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub variant: ModelVariant,
    pub dt: f64,
    pub steps: usize,
    pub snapshots: Vec<WaveSnapshot>,
    /// `(t, 𝔈^s)` at every step when requested.
    pub energy: Vec<(f64, f64)>,
    pub gronwall: Option<GronwallFit>,
    pub final_state: WaveState,
    pub failure: Option<Error>,
}

impl Trajectory {
    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// Integrates from `initial.t` to `initial.t + t_final` (backward if `t_final < 0`).
pub fn evolve(initial: &WaveState, cfg: &EvolveConfig, observers: &mut [&mut dyn Observer]) -> Result<Trajectory> {
    if !cfg.t_final.is_finite() || !(cfg.dt > 0.0) || cfg.snapshot_stride == 0 {
        return Err(Error::InvalidInput("need finite t_final, dt > 0 and snapshot_stride ≥ 1".into()));
    }
    let steps = (cfg.t_final.abs() / cfg.dt).ceil().max(1.0) as usize;
    let h = cfg.t_final / steps as f64;
    let cap = dt_cap(initial);
    if h.abs() > cap {
        return Err(Error::StepTooLarge { dt: h, cap });
    }
    let record_energy = |st: &WaveState, out: &mut Vec<(f64, f64)>| -> Result<()> {
        if let Some(s) = cfg.energy_order {
            out.push((st.t, energy_report(st, s)?.total));
        }
        Ok(())
    };
    let mut energy = Vec::new();
    record_energy(initial, &mut energy)?;
    let mut snapshots = vec![initial.snapshot()];
    let mut state = initial.clone();
    let mut failure = None;
    let mut taken = 0;
    for n in 1..=steps {
        let next = match step(&state, h, cfg.variant) {
            Ok(s) if s.u.max_abs().max(s.v.max_abs()).max(s.theta.max_abs()) > cfg.blowup_threshold => {
                Err(Error::Blowup { t: s.t })
            }
            other => other,
        };
        let next = match next {
            Ok(s) => s,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        if let Err(e) = observers.iter_mut().try_for_each(|o| o.observe(&next)) {
            failure = Some(match e {
                Error::Observer(m) => Error::Observer(m),
                other => Error::Observer(other.to_string()),
            });
            state = next;
            taken = n;
            break;
        }
        state = next;
        taken = n;
        record_energy(&state, &mut energy)?;
        if n % cfg.snapshot_stride == 0 || n == steps {
            snapshots.push(state.snapshot());
        }
    }
    let gronwall = if energy.len() >= 3 {
        let (ts, es): (Vec<f64>, Vec<f64>) = energy.iter().copied().unzip();
        Some(gronwall_fit(&ts, &es, 1.0)?)
    } else {
        None
    };
    Ok(Trajectory { variant: cfg.variant, dt: h, steps: taken, snapshots, energy, gronwall, final_state: state, failure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicGrid;
    use crate::vortex_sheet::Physics;

    #[test]
    fn propagator_is_exact_on_a_mode() {
        let g = PeriodicGrid::new(32, std::f64::consts::TAU).unwrap();
        let u = RealField::from_fn(&g, |a| (3.0 * a).cos());
        let v = RealField::zeros(&g);
        let (u1, _) = rotate_modes(&u, &v, 0.3, |xi| omega_squared(xi, Physics::default()));
        let om = 27f64.sqrt();
        let want = RealField::from_fn(&g, |a| (om * 0.3).cos() * (3.0 * a).cos());
        assert!(u1.sub(&want).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = PeriodicGrid::new(32, std::f64::consts::TAU).unwrap();
        let s = WaveState::zeros(&g, Physics::default());
        for v in ModelVariant::ALL {
            let out = step(&s, 0.01, v).unwrap();
            assert_eq!(out.u.max_abs() + out.v.max_abs() + out.theta.max_abs(), 0.0);
        }
    }

    #[test]
    fn oversized_step_rejected() {
        let g = PeriodicGrid::new(64, std::f64::consts::TAU).unwrap();
        let s = WaveState::zeros(&g, Physics::default());
        assert!(matches!(step(&s, 0.1, ModelVariant::LinearFree), Err(Error::StepTooLarge { .. })));
    }
}
