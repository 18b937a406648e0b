use serde::{Deserialize, Serialize};

use super::pairs::AdmissiblePair;
use super::samples::Samples;
use crate::error::{Error, Result};
use crate::evolution::{evolve, initialize, EvolveConfig, ModelVariant};
use crate::spectral::{homogeneous_sobolev_norm, mixed_norm, MixedNormSpec, RealField, C64};
use crate::vortex_sheet::Physics;

/// Relative spectral content above the resolvable range that triggers a resolution error.
pub const COMPRESSION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    /// Integer dilation factor, so the rescaled data stays periodic on the same grid.
    pub lambda: u32,
    pub variant: ModelVariant,
    pub t_final: f64,
    pub dt: f64,
    /// Snapshot intervals of each run.
    pub intervals: usize,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// Derivative order `s − 1/(2p)`.
    Half,
    /// Derivative order `s − 1/p`.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRatio {
    pub pair: AdmissiblePair,
    pub loss: Loss,
    pub base: f64,
    pub rescaled: f64,
    /// `log(rescaled/base)/log λ`; `None` at `λ = 1`.
    pub exponent: Option<f64>,
    /// `0` for the half loss, `−1/(2p)` for the full loss.
    pub predicted_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub lambda: u32,
    pub variant: ModelVariant,
    /// `max_k ‖λ^{1/2}u(t_k, λ·) − u_λ(t_k/λ^{3/2})‖ / ‖u_λ‖` over the snapshots.
    pub max_relative_l2: f64,
    pub final_relative_l2: f64,
    pub ratios: Vec<ScalingRatio>,
}

/// `f(λα)` on the same grid, exact on the spectrum. With `strict`, spectral content that
/// would land above `limit` (in mode index) raises a resolution error; otherwise it is dropped.
pub fn compress(f: &RealField, lambda: u32, limit: usize, strict: bool) -> Result<RealField> {
    let g = f.grid();
    let n = g.n();
    let spec = f.spectrum();
    let scale = spec.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let lam = lambda as i64;
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (k, c) in spec.iter().enumerate() {
        let m = if k <= n / 2 { k as i64 } else { k as i64 - n as i64 };
        let target = lam * m;
        if target.unsigned_abs() as usize > limit {
            if strict && c.norm() > COMPRESSION_TOLERANCE * scale {
                let xi = g.wavenumbers()[k].abs();
                return Err(Error::Resolution { band: -1, needed: lambda as f64 * xi, resolved: limit as f64 * g.dk() });
            }
            continue;
        }
        out[target.rem_euclid(n as i64) as usize] = *c;
    }
    RealField::from_spectrum(g, &out)
}

fn homogeneous_data_norm(u0: &RealField, u1: &RealField, s: f64) -> f64 {
    homogeneous_sobolev_norm(u0, s) + homogeneous_sobolev_norm(u1, s - 1.5)
}

/// Compares the run from `(u₀, u₁)` with the run from `(λ^{1/2}u₀(λ·), λ²u₁(λ·))` under
/// `u ↦ λ^{1/2}u(λ^{3/2}t, λα)`, and tracks Strichartz ratios measured on one period
/// of the rescaled solution (so they scale as on the line).
pub fn scaling_diagnostics(
    u0: &RealField,
    u1: &RealField,
    physics: Physics,
    cfg: &ScalingConfig,
    pairs: &[AdmissiblePair],
) -> Result<ScalingReport> {
    if physics.g != 0.0 {
        return Err(Error::InvalidInput("the scaling symmetry requires g = 0".into()));
    }
    if cfg.lambda == 0 || cfg.intervals == 0 || !(cfg.t_final > 0.0) || !(cfg.dt > 0.0) {
        return Err(Error::InvalidInput("need lambda >= 1, intervals >= 1, t_final > 0 and dt > 0".into()));
    }
    let g = u0.grid();
    let limit = if cfg.variant.is_nonlinear() { g.n() / 3 } else { g.n() / 2 - 1 };
    let lam = cfg.lambda as f64;
    let time_scale = lam.powf(1.5);
    let u0l = compress(u0, cfg.lambda, limit, true)?.scale(lam.sqrt());
    let u1l = compress(u1, cfg.lambda, limit, true)?.scale(lam * lam);

    let per = ((cfg.t_final / cfg.dt) / cfg.intervals as f64).ceil().max(1.0) as usize;
    let steps = per * cfg.intervals;
    let h = cfg.t_final / steps as f64;
    let run = |a: &RealField, b: &RealField, t_final: f64, dt: f64| -> Result<Samples> {
        let (state, _) = initialize(a, b, physics, cfg.variant)?;
        let mut ec = EvolveConfig::new(t_final, dt * (1.0 + 1e-9), cfg.variant);
        ec.snapshot_stride = per;
        let tr = evolve(&state, &ec, &mut [])?;
        if let Some(e) = tr.failure {
            return Err(e);
        }
        Samples::from_evolution(&tr)
    };
    let base = run(u0, u1, cfg.t_final, h)?;
    let scaled = run(&u0l, &u1l, cfg.t_final / time_scale, h / time_scale)?;

    let mut max_rel: f64 = 0.0;
    let mut final_rel = 0.0;
    for (a, b) in base.u.iter().zip(&scaled.u) {
        let mapped = compress(a, cfg.lambda, g.n() / 2 - 1, false)?.scale(lam.sqrt());
        let denom = b.l2_norm().max(f64::MIN_POSITIVE);
        final_rel = mapped.sub(b)?.l2_norm() / denom;
        max_rel = max_rel.max(final_rel);
    }

    let base_data = homogeneous_data_norm(&base.u0, &base.u1, cfg.s);
    let scaled_data = homogeneous_data_norm(&scaled.u0, &scaled.u1, cfg.s) / lam.sqrt();
    let mut ratios = Vec::new();
    for &pair in pairs {
        for loss in [Loss::Half, Loss::Full] {
            let order = match loss {
                Loss::Half => cfg.s - 0.5 / pair.p,
                Loss::Full => cfg.s - 1.0 / pair.p,
            };
            let norm = |smp: &Samples| -> Result<f64> {
                mixed_norm(&smp.u, &MixedNormSpec::new(pair.p, pair.q, order, smp.window())?)
            };
            let b = norm(&base)? / base_data;
            let r = norm(&scaled)? * lam.powf(-1.0 / pair.q) / scaled_data;
            let exponent = if cfg.lambda > 1 { Some((r / b).ln() / lam.ln()) } else { None };
            let predicted_exponent = match loss {
                Loss::Half => 0.0,
                Loss::Full => -0.5 / pair.p,
            };
            ratios.push(ScalingRatio { pair, loss, base: b, rescaled: r, exponent, predicted_exponent });
        }
    }
    Ok(ScalingReport { lambda: cfg.lambda, variant: cfg.variant, max_relative_l2: max_rel, final_relative_l2: final_rel, ratios })
}
