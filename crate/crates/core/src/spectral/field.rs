use std::sync::{Arc, OnceLock};

use super::grid::{Grid, C64};
use super::multiplier::FourierMultiplier;
use crate::error::{Error, Result};

/// Real samples on a periodic grid with a lazily computed spectrum.
///
/// Fields are immutable; every operation returns a new field, so the cached
/// spectrum never goes stale.
#[derive(Debug, Clone)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
    spectrum: OnceLock<Vec<C64>>,
}

impl RealField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch { expected: grid.n(), got: values.len() });
        }
        Ok(Self { grid: Arc::clone(grid), values, spectrum: OnceLock::new() })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: &Grid, f: F) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid: Arc::clone(grid), values, spectrum: OnceLock::new() }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::from_fn(grid, |_| 0.0)
    }

    /// Builds a field from FFT-ordered coefficients; the imaginary residue of
    /// a non-Hermitian input is discarded.
    pub fn from_spectrum(grid: &Grid, spectrum: &[C64]) -> Result<Self> {
        if spectrum.len() != grid.n() {
            return Err(Error::LengthMismatch { expected: grid.n(), got: spectrum.len() });
        }
        let values = grid.inverse_real(spectrum);
        Ok(Self { grid: Arc::clone(grid), values, spectrum: OnceLock::new() })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn spectrum(&self) -> &[C64] {
        self.spectrum.get_or_init(|| self.grid.forward(&self.values))
    }

    fn same_grid(&self, other: &RealField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        Self { grid: Arc::clone(&self.grid), values, spectrum: OnceLock::new() }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &RealField, f: F) -> Result<Self> {
        self.same_grid(other)?;
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect()))
    }

    pub fn add(&self, other: &RealField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RealField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &RealField) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn deriv(&self, order: u32) -> Self {
        self.with_values(self.grid.deriv(&self.values, order))
    }

    pub fn hilbert(&self) -> Self {
        self.with_values(self.grid.hilbert(&self.values))
    }

    pub fn apply(&self, m: &FourierMultiplier) -> Result<Self> {
        let mut spec = self.spectrum().to_vec();
        m.apply_spectrum(&self.grid, &mut spec)?;
        RealField::from_spectrum(&self.grid, &spec)
    }

    /// `∂_α^{-1}` on mean-zero fields. Inputs whose mean exceeds `1e-8` times
    /// their L² norm are rejected.
    pub fn antiderivative(&self) -> Result<Self> {
        let mean = self.mean();
        let norm = self.l2_norm();
        if mean.abs() > 1e-8 * norm.max(f64::MIN_POSITIVE) && mean != 0.0 {
            return Err(Error::Antiderivative { mean, norm });
        }
        Ok(self.antiderivative_projected())
    }

    /// `∂_α^{-1}` after discarding the mean.
    pub fn antiderivative_projected(&self) -> Self {
        self.with_values(self.grid.antiderivative_projected(&self.values))
    }

    pub fn mean(&self) -> f64 {
        self.grid.mean(&self.values)
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    /// `∫ f g` over one period.
    pub fn dot(&self, other: &RealField) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.grid.dx())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        super::norms::lq_norm(&self.values, 2.0, self.grid.dx())
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        super::norms::sobolev_norm(self, s)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Shift by an integer number of grid cells: `g(α) = f(α - m Δα)`.
    pub fn shift(&self, cells: isize) -> Self {
        let n = self.values.len() as isize;
        self.with_values(
            (0..n).map(|i| self.values[((i - cells) % n + n) as usize % n as usize]).collect(),
        )
    }
}

/// Complex samples on a periodic grid (curves, conjugate velocities).
#[derive(Debug, Clone)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<C64>,
}

impl ComplexField {
    pub fn new(grid: &Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch { expected: grid.n(), got: values.len() });
        }
        Ok(Self { grid: Arc::clone(grid), values })
    }

    pub fn from_parts(re: &RealField, im: &RealField) -> Result<Self> {
        re.same_grid(im)?;
        Ok(Self {
            grid: Arc::clone(&re.grid),
            values: re.values.iter().zip(&im.values).map(|(&a, &b)| C64::new(a, b)).collect(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn spectrum(&self) -> Vec<C64> {
        self.grid.forward_complex(&self.values)
    }

    pub fn re(&self) -> RealField {
        RealField::from_fn_values(&self.grid, self.values.iter().map(|c| c.re).collect())
    }

    pub fn im(&self) -> RealField {
        RealField::from_fn_values(&self.grid, self.values.iter().map(|c| c.im).collect())
    }

    pub fn apply(&self, m: &FourierMultiplier) -> Result<Self> {
        let mut spec = self.spectrum();
        m.apply_spectrum(&self.grid, &mut spec)?;
        Ok(Self { grid: Arc::clone(&self.grid), values: self.grid.inverse_complex(&spec) })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

impl RealField {
    pub(crate) fn from_fn_values(grid: &Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid: Arc::clone(grid), values, spectrum: OnceLock::new() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicGrid;
    use std::f64::consts::PI;

    #[test]
    fn length_checked() {
        let g = PeriodicGrid::new(8, 1.0).unwrap();
        assert!(matches!(RealField::new(&g, vec![0.0; 7]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn spectrum_is_hermitian_and_round_trips() {
        let g = PeriodicGrid::new(32, 2.0 * PI).unwrap();
        let f = RealField::from_fn(&g, |x| (x.sin() + 0.2 * (3.0 * x).cos()).exp());
        let s = f.spectrum();
        for k in 1..16 {
            assert!((s[k] - s[32 - k].conj()).norm() < 1e-14);
        }
        let back = RealField::from_spectrum(&g, s).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn grid_mismatch_detected() {
        let a = RealField::zeros(&PeriodicGrid::new(8, 1.0).unwrap());
        let b = RealField::zeros(&PeriodicGrid::new(8, 2.0).unwrap());
        assert_eq!(a.add(&b).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn antiderivative_checks_mean() {
        let g = PeriodicGrid::new(32, 2.0 * PI).unwrap();
        let f = RealField::from_fn(&g, |x| (2.0 * x).cos());
        let a = f.antiderivative().unwrap();
        for (x, v) in g.nodes().iter().zip(a.values()) {
            assert!((v - 0.5 * (2.0 * x).sin()).abs() < 1e-13);
        }
        let shifted = f.map(|v| v + 0.1);
        assert!(matches!(shifted.antiderivative(), Err(Error::Antiderivative { .. })));
        assert_eq!(RealField::zeros(&g).antiderivative().unwrap().max_abs(), 0.0);
    }

    #[test]
    fn shift_moves_samples() {
        let g = PeriodicGrid::new(8, 8.0).unwrap();
        let f = RealField::from_fn(&g, |x| x);
        assert_eq!(f.shift(1).values()[1], 0.0);
        assert_eq!(f.shift(-1).values()[0], 1.0);
    }
}
