use serde::{Deserialize, Serialize};

use super::field::RealField;
use super::multiplier::{abs_pow, FourierMultiplier};
use crate::error::{Error, Result};

/// `(Σ_ξ ⟨ξ⟩^{2s} |f̂(ξ)|² L)^{1/2}`.
pub fn sobolev_norm(f: &RealField, s: f64) -> f64 {
    let g = f.grid();
    let sum: f64 = f
        .spectrum()
        .iter()
        .zip(g.wavenumbers())
        .map(|(c, &xi)| (1.0 + xi * xi).powf(s) * c.norm_sqr())
        .sum();
    (sum * g.length()).sqrt()
}

/// Homogeneous `(Σ_ξ |ξ|^{2s} |f̂(ξ)|² L)^{1/2}` with the zero-mode convention of `abs_pow`.
pub fn homogeneous_sobolev_norm(f: &RealField, s: f64) -> f64 {
    let g = f.grid();
    let sum: f64 = f
        .spectrum()
        .iter()
        .zip(g.wavenumbers())
        .map(|(c, &xi)| abs_pow(xi, 2.0 * s) * c.norm_sqr())
        .sum();
    (sum * g.length()).sqrt()
}

/// Spatial `L^q` norm by the trapezoid rule on the periodic nodes; `q = ∞` gives the max.
pub fn lq_norm(values: &[f64], q: f64, dx: f64) -> f64 {
    if q.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    if q == 2.0 {
        return (values.iter().map(|v| v * v).sum::<f64>() * dx).sqrt();
    }
    (values.iter().map(|v| v.abs().powf(q)).sum::<f64>() * dx).powf(1.0 / q)
}

/// `L^p` norm of uniformly spaced time samples by the trapezoid rule.
pub fn time_lp_norm(values: &[f64], p: f64, dt: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let n = values.len();
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        acc += w * v.abs().powf(p);
    }
    (acc * dt).powf(1.0 / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormOrder {
    /// `L^p_t L^q_α`
    TimeOutside,
    /// `L^q_α L^p_t`
    SpaceOutside,
}

/// Which derivative weight `D^s` the mixed norm applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeWeight {
    /// `|D|^s`
    Homogeneous,
    /// `⟨D⟩^s`
    Bracket,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedNormSpec {
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub window: (f64, f64),
    pub order: NormOrder,
    pub weight: DerivativeWeight,
}

impl MixedNormSpec {
    pub fn new(p: f64, q: f64, s: f64, window: (f64, f64)) -> Result<Self> {
        let spec = Self { p, q, s, window, order: NormOrder::TimeOutside, weight: DerivativeWeight::Homogeneous };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_order(mut self, order: NormOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_weight(mut self, weight: DerivativeWeight) -> Self {
        self.weight = weight;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |e: f64| e >= 1.0 && !e.is_nan();
        if !ok(self.p) || !ok(self.q) {
            return Err(Error::InvalidInput(format!("exponents must lie in [1, ∞], got p={} q={}", self.p, self.q)));
        }
        if !(self.window.1 > self.window.0) || !self.s.is_finite() {
            return Err(Error::InvalidInput(format!("empty window {:?}", self.window)));
        }
        Ok(())
    }

    pub fn multiplier(&self) -> FourierMultiplier {
        match self.weight {
            DerivativeWeight::Homogeneous => FourierMultiplier::abs_d(self.s),
            DerivativeWeight::Bracket => FourierMultiplier::bracket_d(self.s),
        }
    }
}

/// Mixed space-time norm of snapshots sampled uniformly over `spec.window`.
pub fn mixed_norm(snapshots: &[RealField], spec: &MixedNormSpec) -> Result<f64> {
    spec.validate()?;
    if snapshots.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: snapshots.len() });
    }
    let dt = (spec.window.1 - spec.window.0) / (snapshots.len() - 1) as f64;
    let weighted: Vec<RealField> = if spec.s == 0.0 {
        snapshots.to_vec()
    } else {
        let m = spec.multiplier();
        snapshots.iter().map(|f| f.apply(&m)).collect::<Result<_>>()?
    };
    let dx = weighted[0].grid().dx();
    Ok(match spec.order {
        NormOrder::TimeOutside => {
            let inner: Vec<f64> = weighted.iter().map(|f| lq_norm(f.values(), spec.q, dx)).collect();
            time_lp_norm(&inner, spec.p, dt)
        }
        NormOrder::SpaceOutside => {
            let n = weighted[0].values().len();
            let inner: Vec<f64> = (0..n)
                .map(|m| {
                    let series: Vec<f64> = weighted.iter().map(|f| f.values()[m]).collect();
                    time_lp_norm(&series, spec.p, dt)
                })
                .collect();
            lq_norm(&inner, spec.q, dx)
        }
    })
}
