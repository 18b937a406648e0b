use serde::{Deserialize, Serialize};

use super::rhs::omega_squared;
use super::state::WaveState;
use crate::error::{Error, Result};
use crate::spectral::{sobolev_norm, RealField};
use crate::vortex_sheet::Physics;

/// Energies of a state at order `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub s: u32,
    /// `𝓔^k` for `k = 1..=s`.
    pub per_k: Vec<f64>,
    pub u_l2_sq: f64,
    pub v_l2_sq: f64,
    /// `𝔈^s = ‖u‖² + ‖v‖² + Σ_k 𝓔^k`.
    pub total: f64,
    /// `‖u‖²_{H^{s+3/2}} + ‖v‖²_{H^s}`.
    pub reference: f64,
    /// `total / reference` (1 for the zero state).
    pub ratio: f64,
}

/// `𝓔^k = ½∫(∂^{k+1}u · H∂(∂^{k+1}u) + (∂^k v)²)`, evaluated on the spectrum.
///
/// The `u` weight is `ω²(ξ)|ξ|^{2k}`, which is `|ξ|^{2k+3}` for `S/2 = 1, g = 0`.
pub fn energy_k(u: &RealField, v: &RealField, k: u32, physics: Physics) -> Result<f64> {
    if **u.grid() != **v.grid() {
        return Err(Error::GridMismatch);
    }
    let g = u.grid();
    let sum: f64 = g
        .wavenumbers()
        .iter()
        .zip(u.spectrum().iter().zip(v.spectrum()))
        .map(|(&xi, (a, b))| {
            let w = xi.abs().powi(2 * k as i32);
            w * (omega_squared(xi, physics) * a.norm_sqr() + b.norm_sqr())
        })
        .sum();
    Ok(0.5 * g.length() * sum)
}

pub fn energy_report(state: &WaveState, s: u32) -> Result<EnergyReport> {
    if s < 1 {
        return Err(Error::InvalidInput("energy order s must be ≥ 1".into()));
    }
    let (u, v) = (&state.u, &state.v);
    let per_k = (1..=s).map(|k| energy_k(u, v, k, state.physics)).collect::<Result<Vec<_>>>()?;
    let u_l2_sq = u.l2_norm().powi(2);
    let v_l2_sq = v.l2_norm().powi(2);
    let total = u_l2_sq + v_l2_sq + per_k.iter().sum::<f64>();
    let reference = sobolev_norm(u, s as f64 + 1.5).powi(2) + sobolev_norm(v, s as f64).powi(2);
    let ratio = if reference > 0.0 { total / reference } else { 1.0 };
    Ok(EnergyReport { s, per_k, u_l2_sq, v_l2_sq, total, reference, ratio })
}

/// The two coupling integrals in `d𝓔^k/dt` for the linear flow,
/// `I₁ = ∫∂^{k+1}u · H∂^{k+2}v` and `I₂ = ∫∂^k v · H∂^{k+3}u`,
/// evaluated by quadrature of the differentiated fields.
pub fn coupling_terms(u: &RealField, v: &RealField, k: u32) -> Result<(f64, f64)> {
    let i1 = u.deriv(k + 1).dot(&v.deriv(k + 2).hilbert())?;
    let i2 = v.deriv(k).dot(&u.deriv(k + 3).hilbert())?;
    Ok((i1, i2))
}

/// `∫h ∂f H∂f`, the commutator term bounded by `C‖h‖_{H^{2.5+δ}}‖f‖²_{L²}`.
pub fn commutator_energy_term(h: &RealField, f: &RealField) -> Result<f64> {
    let fa = f.deriv(1);
    h.mul(&fa)?.dot(&fa.hilbert())
}

/// Fit of `|d𝔈/dt| ≤ C𝔈(1 + 𝔈)^p` over a sampled energy history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallFit {
    pub p: f64,
    /// Smallest `C` consistent with every sample.
    pub c: f64,
    pub max_rate: f64,
    pub samples: usize,
}

pub fn gronwall_fit(times: &[f64], energies: &[f64], p: f64) -> Result<GronwallFit> {
    let n = times.len();
    if n != energies.len() {
        return Err(Error::InvalidInput("times and energies differ in length".into()));
    }
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    let mut c: f64 = 0.0;
    let mut max_rate: f64 = 0.0;
    for i in 0..n {
        let (a, b) = if i == 0 { (0, 1) } else if i == n - 1 { (n - 2, n - 1) } else { (i - 1, i + 1) };
        let rate = (energies[b] - energies[a]) / (times[b] - times[a]);
        max_rate = max_rate.max(rate.abs());
        let e = energies[i];
        if e > 0.0 {
            c = c.max(rate.abs() / (e * (1.0 + e).powf(p)));
        }
    }
    Ok(GronwallFit { p, c, max_rate, samples: n })
}
