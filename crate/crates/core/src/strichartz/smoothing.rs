use serde::{Deserialize, Serialize};

use super::samples::Samples;
use super::suite::{band_data, data_norm, BandData};
use crate::error::{Error, Result};
use crate::spectral::{lq_norm, time_lp_norm, FourierMultiplier, Grid, RealField};
use crate::util::{fit_line, LinearFit};
use crate::vortex_sheet::Physics;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingProbe {
    pub rho: f64,
    pub s: f64,
    pub center: f64,
    pub window: (f64, f64),
    /// `‖⟨d_L(α, center)⟩^{−ρ}|D|^{s+1/4}u‖_{L²_tL²_α}`.
    pub value: f64,
    /// `sup_t ‖|D|^{s+1/4}u‖_{L²}`.
    pub unweighted: f64,
    /// `‖u₀‖_{H^s} + ‖u₁‖_{H^{s−3/2}}`.
    pub data_norm: f64,
    pub ratio: f64,
    pub unweighted_ratio: f64,
}

/// Periodic distance on a circle of length `length`.
pub fn periodic_distance(a: f64, b: f64, length: f64) -> f64 {
    let d = (a - b).rem_euclid(length);
    d.min(length - d)
}

/// `⟨d_L(α, center)⟩^{−ρ}` at the nodes.
pub fn periodic_weight(grid: &Grid, center: f64, rho: f64) -> RealField {
    let l = grid.length();
    RealField::from_fn(grid, |a| (1.0 + periodic_distance(a, center, l).powi(2)).powf(-0.5 * rho))
}

/// Circular mean of `|f|²`; the domain center when `|f|²` has no preferred position.
pub fn centroid(f: &RealField) -> f64 {
    let g = f.grid();
    let l = g.length();
    let k = std::f64::consts::TAU / l;
    let (mut c, mut s, mut total) = (0.0, 0.0, 0.0);
    for (a, v) in g.nodes().iter().zip(f.values()) {
        let w = v * v;
        c += w * (k * a).cos();
        s += w * (k * a).sin();
        total += w;
    }
    if total == 0.0 || c.hypot(s) < 1e-9 * total {
        return 0.5 * l;
    }
    s.atan2(c).rem_euclid(std::f64::consts::TAU) / k
}

/// Weighted local-smoothing norm at order `s + 1/4` over the sample window.
pub fn local_smoothing_suite(samples: &Samples, s: f64, rho: f64, center: Option<f64>) -> Result<SmoothingProbe> {
    if !(rho > 0.5) {
        return Err(Error::InvalidInput(format!("local smoothing needs rho > 1/2, got {rho}")));
    }
    let g = samples.grid();
    let center = center.unwrap_or_else(|| centroid(&samples.u0));
    let weight = periodic_weight(g, center, rho);
    let m = FourierMultiplier::abs_d(s + 0.25);
    let (mut weighted, mut sup) = (Vec::with_capacity(samples.u.len()), 0.0f64);
    for u in &samples.u {
        let du = u.apply(&m)?;
        sup = sup.max(du.l2_norm());
        weighted.push(lq_norm(du.mul(&weight)?.values(), 2.0, g.dx()));
    }
    let value = time_lp_norm(&weighted, 2.0, samples.dt());
    let data = data_norm(&samples.u0, &samples.u1, s);
    let div = |x: f64| if data > 0.0 { x / data } else if x == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(SmoothingProbe {
        rho,
        s,
        center,
        window: samples.window(),
        value,
        unweighted: sup,
        data_norm: data,
        ratio: div(value),
        unweighted_ratio: div(sup),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingSweep {
    pub bands: Vec<i32>,
    pub probes: Vec<SmoothingProbe>,
    /// `max/min` of the weighted ratios.
    pub weighted_variation: f64,
    /// `log₂` unweighted ratio against `j`.
    pub unweighted_fit: LinearFit,
}

/// Free-flow frequency sweep of the local smoothing probe with data `(band_data, 0)`.
pub fn smoothing_sweep(
    grid: &Grid,
    bands: &[i32],
    family: BandData,
    s: f64,
    rho: f64,
    t_final: f64,
    count: usize,
    physics: Physics,
) -> Result<SmoothingSweep> {
    let mut probes = Vec::with_capacity(bands.len());
    for &j in bands {
        let u0 = band_data(grid, j, family)?;
        let samples = Samples::free_flow(&u0, &RealField::zeros(grid), physics, t_final, count)?;
        probes.push(local_smoothing_suite(&samples, s, rho, Some(0.5 * grid.length()))?);
    }
    let lo = probes.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);
    let hi = probes.iter().map(|p| p.ratio).fold(0.0, f64::max);
    let xs: Vec<f64> = bands.iter().map(|&j| j as f64).collect();
    let ys: Vec<f64> = probes.iter().map(|p| p.unweighted_ratio.log2()).collect();
    Ok(SmoothingSweep { bands: bands.to_vec(), probes, weighted_variation: hi / lo, unweighted_fit: fit_line(&xs, &ys) })
}
