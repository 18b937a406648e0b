use std::fmt;
use std::sync::Arc;

use super::grid::{hilbert_symbol, PeriodicGrid, C64};
use crate::error::{Error, Result};

type Symbol = dyn Fn(f64) -> C64 + Send + Sync;

/// A Fourier multiplier `m(D)` given by its symbol `ξ ↦ m(ξ)`.
#[derive(Clone)]
pub struct FourierMultiplier {
    name: String,
    symbol: Arc<Symbol>,
}

impl fmt::Debug for FourierMultiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FourierMultiplier({})", self.name)
    }
}

impl FourierMultiplier {
    pub fn new<F>(name: impl Into<String>, symbol: F) -> Self
    where
        F: Fn(f64) -> C64 + Send + Sync + 'static,
    {
        Self { name: name.into(), symbol: Arc::new(symbol) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbol(&self, xi: f64) -> C64 {
        (self.symbol)(xi)
    }

    /// `H` with symbol `-i sgn ξ`, `sgn 0 = 0`.
    pub fn hilbert() -> Self {
        Self::new("H", hilbert_symbol)
    }

    /// `|D|^s`. The zero mode gets weight 0 for `s != 0`.
    pub fn abs_d(s: f64) -> Self {
        Self::new(format!("|D|^{s}"), move |xi| C64::new(abs_pow(xi, s), 0.0))
    }

    /// `⟨D⟩^s = (1 + D²)^{s/2}`.
    pub fn bracket_d(s: f64) -> Self {
        Self::new(format!("<D>^{s}"), move |xi| C64::new((1.0 + xi * xi).powf(0.5 * s), 0.0))
    }

    /// `∂^k`.
    pub fn deriv(k: u32) -> Self {
        Self::new(format!("d^{k}"), move |xi| C64::new(0.0, xi).powu(k))
    }

    /// `H∂³`, symbol `-|ξ|³`.
    pub fn h_d3() -> Self {
        Self::new("H d^3", |xi| C64::new(-xi.abs().powi(3), 0.0))
    }

    /// Product of symbols, i.e. composition of the operators.
    pub fn compose(&self, other: &FourierMultiplier) -> Self {
        let (a, b) = (Arc::clone(&self.symbol), Arc::clone(&other.symbol));
        Self {
            name: format!("{} * {}", self.name, other.name),
            symbol: Arc::new(move |xi| a(xi) * b(xi)),
        }
    }

    pub fn apply_spectrum(&self, grid: &PeriodicGrid, spectrum: &mut [C64]) -> Result<()> {
        for &xi in grid.wavenumbers() {
            let v = self.symbol(xi);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::InvalidMultiplier { name: self.name.clone(), xi });
            }
        }
        grid.apply_symbol_spectrum(spectrum, |xi| self.symbol(xi));
        Ok(())
    }
}

/// `|ξ|^s` with the zero-mode convention of the lab (0 at ξ = 0 unless s = 0).
pub fn abs_pow(xi: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if xi == 0.0 {
        0.0
    } else {
        xi.abs().powf(s)
    }
}
