use serde::{Deserialize, Serialize};

use super::field::RealField;
use super::grid::{PeriodicGrid, C64};
use crate::error::{Error, Result};

/// `exp(-1/x)` for `x > 0`, else 0.
fn mollifier(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth step rising from 0 at `a` to 1 at `b`.
pub fn smooth_step(x: f64, a: f64, b: f64) -> f64 {
    let y = (x - a) / (b - a);
    let f = mollifier(y);
    let g = mollifier(1.0 - y);
    if f + g == 0.0 {
        return if y >= 1.0 { 1.0 } else { 0.0 };
    }
    f / (f + g)
}

/// Step in `log₂ r`: 0 below `2^{-3/4}`, 1 above `2^{-1/4}`.
fn beta(log2r: f64) -> f64 {
    smooth_step(log2r, -0.75, -0.25)
}

/// Dyadic bump `ψ(r)`: 1 on `[2^{-1/4}, 2^{1/4}]`, supported in `[2^{-3/4}, 2^{3/4}]`.
///
/// Built as `β(log₂ r) − β(log₂ r − 1)`, so dilates telescope to a partition of unity.
pub fn psi(r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let x = r.log2();
    beta(x) - beta(x - 1.0)
}

/// Smooth cutoff equal to 1 on `[lo_flat, hi_flat]` and vanishing outside `[lo, hi]` (all in `r > 0`).
pub fn bump(r: f64, lo: f64, lo_flat: f64, hi_flat: f64, hi: f64) -> f64 {
    if r <= lo || r >= hi {
        return 0.0;
    }
    smooth_step(r, lo, lo_flat) * (1.0 - smooth_step(r, hi_flat, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Low,
    Dyadic(i32),
}

/// Littlewood–Paley partition `(1 − ψ⁰) + Σ_{j ≥ j0} ψ^j = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicPartition {
    pub cutoff: f64,
    pub j0: i32,
    pub j_max: i32,
}

impl DyadicPartition {
    /// Partition for a grid: `j0` is the least index with `2^{j0} ≥ M`, and
    /// `j_max` is chosen so the top band's flat part covers the resolved wavenumbers.
    pub fn new(cutoff: f64, grid: &PeriodicGrid) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::InvalidInput(format!("cutoff must be positive, got {cutoff}")));
        }
        let j0 = cutoff.log2().ceil() as i32;
        let j_max = (grid.xi_max().log2() - 0.25).ceil().max(j0 as f64) as i32;
        Ok(Self { cutoff, j0, j_max })
    }

    /// `ψ^j(ξ) = ψ(2^{-j}|ξ|)`.
    pub fn band_weight(&self, j: i32, xi: f64) -> f64 {
        psi(xi.abs() / 2f64.powi(j))
    }

    /// Low-frequency weight `1 − ψ⁰(ξ)`; equals 1 near ξ = 0.
    pub fn low_weight(&self, xi: f64) -> f64 {
        if xi == 0.0 {
            return 1.0;
        }
        1.0 - beta(xi.abs().log2() - self.j0 as f64)
    }

    pub fn weight(&self, band: Band, xi: f64) -> f64 {
        match band {
            Band::Low => self.low_weight(xi),
            Band::Dyadic(j) => self.band_weight(j, xi),
        }
    }

    pub fn bands(&self) -> Vec<Band> {
        std::iter::once(Band::Low).chain((self.j0..=self.j_max).map(Band::Dyadic)).collect()
    }

    /// `ψ^j(D) f`, or the low part for [`Band::Low`].
    pub fn project(&self, f: &RealField, band: Band) -> Result<RealField> {
        let grid = f.grid();
        if let Band::Dyadic(j) = band {
            if j < self.j0 {
                return Err(Error::InvalidInput(format!("band {j} below j0 = {}", self.j0)));
            }
            let needed = 2f64.powf(j as f64 - 0.75);
            if needed > grid.xi_max() {
                return Err(Error::Resolution { band: j, needed, resolved: grid.xi_max() });
            }
        }
        let mut spec: Vec<C64> = f.spectrum().to_vec();
        grid.apply_symbol_spectrum(&mut spec, |xi| C64::new(self.weight(band, xi), 0.0));
        RealField::from_spectrum(grid, &spec)
    }
}
