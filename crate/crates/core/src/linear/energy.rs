use serde::{Deserialize, Serialize};

use super::problem::LinearProblem;
use super::solve::LinearTrajectory;
use crate::error::{Error, Result};
use crate::spectral::{sobolev_norm, RealField};

/// Energy of order `s` of `(u, v)` for the linear system.
///
/// Integer `s ≥ 0`: `‖u‖² + ‖v‖² + Σ_{k=1}^s 𝓔^k` with
/// `𝓔^k = ½∫(∂^{k+1}u H∂ ∂^{k+1}u + (∂^k v)²)`.
/// `−3/2 ≤ s < 0`: the conjugated energy `‖U‖² + ‖W‖² + 𝓔^0(U, W)` of
/// `U = ⟨D⟩^s u`, `W = ⟨D⟩^s v`.
pub fn linear_energy(u: &RealField, v: &RealField, s: f64) -> Result<f64> {
    if **u.grid() != **v.grid() {
        return Err(Error::GridMismatch);
    }
    let g = u.grid();
    let spec = |weight: &dyn Fn(f64) -> (f64, f64)| -> f64 {
        g.length()
            * g.wavenumbers()
                .iter()
                .zip(u.spectrum().iter().zip(v.spectrum()))
                .map(|(&xi, (a, b))| {
                    let (wu, wv) = weight(xi);
                    wu * a.norm_sqr() + wv * b.norm_sqr()
                })
                .sum::<f64>()
    };
    if s >= 0.0 && s.fract() == 0.0 {
        let top = s as i32;
        Ok(spec(&|xi: f64| {
            let a = xi.abs();
            let sum: f64 = (1..=top).map(|k| a.powi(2 * k)).sum();
            (1.0 + 0.5 * a.powi(3) * sum, 1.0 + 0.5 * sum)
        }))
    } else if (-1.5..0.0).contains(&s) {
        Ok(spec(&|xi: f64| {
            let w = (1.0 + xi * xi).powf(s);
            let a = xi.abs();
            (w * (1.0 + 0.5 * a.powi(3)), w * 1.5)
        }))
    } else {
        Err(Error::InvalidInput(format!("energy order must be a nonnegative integer or in [-3/2, 0), got {s}")))
    }
}

/// Gain of the inhomogeneous estimate:
/// `sup_t(‖u‖_{H^{s+3/2}} + ‖∂_tu‖_{H^s}) / ‖R‖_{L²_tH^s}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub solution_norm: f64,
    pub forcing_norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearEnergyAudit {
    pub s: f64,
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    /// Smallest `C ≥ 0` with `𝔈^s(t) ≤ 𝔈^s(0)e^{Ct}` on the snapshots.
    pub growth_rate: f64,
    /// `max_t |𝔈^s(t) − 𝔈^s(0)| / 𝔈^s(0)`.
    pub max_relative_drift: f64,
    pub gain: Option<GainReport>,
}

pub fn linear_energy_audit(p: &LinearProblem, tr: &LinearTrajectory, s: f64) -> Result<LinearEnergyAudit> {
    let energies = tr.u.iter().zip(&tr.v).map(|(u, v)| linear_energy(u, v, s)).collect::<Result<Vec<_>>>()?;
    let e0 = energies[0];
    let mut growth_rate: f64 = 0.0;
    let mut drift: f64 = 0.0;
    for (&t, &e) in tr.times.iter().zip(&energies).skip(1) {
        if e0 > 0.0 {
            drift = drift.max((e - e0).abs() / e0);
            if t > 0.0 && e > 0.0 {
                growth_rate = growth_rate.max((e / e0).ln() / t);
            }
        }
    }
    let gain = if p.forcing.is_zero() {
        None
    } else {
        let solution_norm = tr
            .u
            .iter()
            .zip(&tr.u_t)
            .map(|(u, ut)| sobolev_norm(u, s + 1.5) + sobolev_norm(ut, s))
            .fold(0.0, f64::max);
        let sq = tr
            .times
            .iter()
            .map(|&t| Ok(p.forcing.eval(p.grid(), t)?.map_or(0.0, |f| sobolev_norm(&f, s).powi(2))))
            .collect::<Result<Vec<_>>>()?;
        let forcing_norm = tr
            .times
            .windows(2)
            .zip(sq.windows(2))
            .map(|(t, q)| 0.5 * (t[1] - t[0]) * (q[0] + q[1]))
            .sum::<f64>()
            .sqrt();
        let ratio = if forcing_norm > 0.0 { solution_norm / forcing_norm } else { f64::INFINITY };
        Some(GainReport { solution_norm, forcing_norm, ratio })
    };
    Ok(LinearEnergyAudit { s, times: tr.times.clone(), energies, growth_rate, max_relative_drift: drift, gain })
}
