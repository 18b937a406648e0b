use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Serializable descriptor of a periodic grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub length: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        PeriodicGrid::new(self.n, self.length)
    }
}

/// Uniform grid on the torus `[0, L)` with `N` nodes and cached FFT plans.
///
/// Spectra use the normalization `f(α) = Σ f̂_k e^{iξ_k α}`, so that
/// `∫|f|² = L Σ|f̂_k|²`. Coefficients are stored in FFT order; index `N/2`
/// is the Nyquist mode.
pub struct PeriodicGrid {
    n: usize,
    length: f64,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

pub type Grid = Arc<PeriodicGrid>;

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

impl PeriodicGrid {
    pub fn new(n: usize, length: f64) -> Result<Grid> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::GridSize(n));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::GridLength(length));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let dk = 2.0 * PI / length;
        let wavenumbers = (0..n)
            .map(|k| {
                let m = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
                m * dk
            })
            .collect();
        Ok(Arc::new(Self { n, length, wavenumbers, forward, inverse }))
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { n: self.n, length: self.length }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Fundamental wavenumber `2π/L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn node(&self, m: usize) -> f64 {
        m as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.node(m)).collect()
    }

    /// Wavenumbers in FFT order; the Nyquist entry is `-πN/L`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Largest resolved |ξ| below Nyquist.
    pub fn xi_max(&self) -> f64 {
        (self.n / 2 - 1) as f64 * self.dk()
    }

    pub fn forward_complex(&self, values: &[C64]) -> Vec<C64> {
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= s);
        buf
    }

    pub fn forward(&self, values: &[f64]) -> Vec<C64> {
        let buf: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.forward_complex(&buf)
    }

    pub fn inverse_complex(&self, spectrum: &[C64]) -> Vec<C64> {
        let mut buf = spectrum.to_vec();
        self.inverse.process(&mut buf);
        buf
    }

    pub fn inverse_real(&self, spectrum: &[C64]) -> Vec<f64> {
        self.inverse_complex(spectrum).into_iter().map(|c| c.re).collect()
    }

    /// Multiplies a spectrum by a symbol. The Nyquist coefficient is scaled by
    /// the real part of the even part of the symbol, which keeps real inputs
    /// real (so odd symbols such as `iξ` or `-i sgn ξ` annihilate it).
    pub fn apply_symbol_spectrum<F: Fn(f64) -> C64>(&self, spectrum: &mut [C64], symbol: F) {
        let ny = self.nyquist_index();
        for (k, c) in spectrum.iter_mut().enumerate() {
            let xi = self.wavenumbers[k];
            if k == ny {
                let w = 0.5 * (symbol(xi) + symbol(-xi));
                *c *= w.re;
            } else {
                *c *= symbol(xi);
            }
        }
    }

    /// Real-valued Fourier multiplier applied to real samples.
    pub fn apply_symbol<F: Fn(f64) -> C64>(&self, values: &[f64], symbol: F) -> Vec<f64> {
        let mut spec = self.forward(values);
        self.apply_symbol_spectrum(&mut spec, symbol);
        self.inverse_real(&spec)
    }

    pub fn deriv(&self, values: &[f64], order: u32) -> Vec<f64> {
        if order == 0 {
            return values.to_vec();
        }
        self.apply_symbol(values, |xi| C64::new(0.0, xi).powu(order))
    }

    pub fn hilbert(&self, values: &[f64]) -> Vec<f64> {
        self.apply_symbol(values, hilbert_symbol)
    }

    pub fn hilbert_complex(&self, values: &[C64]) -> Vec<C64> {
        let mut spec = self.forward_complex(values);
        let ny = self.nyquist_index();
        for (k, c) in spec.iter_mut().enumerate() {
            *c *= if k == ny { C64::new(0.0, 0.0) } else { hilbert_symbol(self.wavenumbers[k]) };
        }
        self.inverse_complex(&spec)
    }

    pub fn deriv_complex(&self, values: &[C64], order: u32) -> Vec<C64> {
        let mut spec = self.forward_complex(values);
        let ny = self.nyquist_index();
        for (k, c) in spec.iter_mut().enumerate() {
            let xi = self.wavenumbers[k];
            let w = C64::new(0.0, xi).powu(order);
            *c *= if k == ny && order % 2 == 1 { C64::new(0.0, 0.0) } else { w };
        }
        self.inverse_complex(&spec)
    }

    /// Mean-free antiderivative: the zero mode of the input is discarded and
    /// the result has zero mean.
    pub fn antiderivative_projected(&self, values: &[f64]) -> Vec<f64> {
        self.apply_symbol(values, antiderivative_symbol)
    }

    pub fn antiderivative_projected_complex(&self, values: &[C64]) -> Vec<C64> {
        let mut spec = self.forward_complex(values);
        let ny = self.nyquist_index();
        for (k, c) in spec.iter_mut().enumerate() {
            *c *= if k == ny { C64::new(0.0, 0.0) } else { antiderivative_symbol(self.wavenumbers[k]) };
        }
        self.inverse_complex(&spec)
    }

    pub fn mean(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() / self.n as f64
    }

    /// Trapezoid (= rectangle on the torus) integral over one period.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.dx()
    }

    /// Zeroes all modes with |k| > N/3 (2/3-rule dealiasing).
    pub fn dealias_spectrum(&self, spectrum: &mut [C64]) {
        let cut = self.n / 3;
        for (k, c) in spectrum.iter_mut().enumerate() {
            let m = if k <= self.n / 2 { k } else { self.n - k };
            if m > cut {
                *c = C64::new(0.0, 0.0);
            }
        }
    }

    /// Spectral interpolation of periodic samples onto arbitrary points.
    pub fn interpolate(&self, values: &[f64], points: &[f64]) -> Vec<f64> {
        let spec = self.forward(values);
        let ny = self.nyquist_index();
        points
            .iter()
            .map(|&x| {
                let mut acc = spec[0].re;
                for k in 1..ny {
                    let e = C64::from_polar(1.0, self.wavenumbers[k] * x);
                    acc += 2.0 * (spec[k] * e).re;
                }
                acc + spec[ny].re * (self.wavenumbers[ny] * x).cos()
            })
            .collect()
    }

    /// Zero-padded resampling of a periodic real function onto a finer grid.
    pub fn resample(&self, values: &[f64], target: &PeriodicGrid) -> Result<Vec<f64>> {
        if target.length != self.length || target.n < self.n {
            return Err(Error::InvalidInput("resample target must refine the same period".into()));
        }
        let spec = self.forward(values);
        let mut out = vec![C64::new(0.0, 0.0); target.n];
        let half = self.n / 2;
        for k in 0..half {
            out[k] = spec[k];
        }
        for k in 1..half {
            out[target.n - k] = spec[self.n - k];
        }
        // split the Nyquist coefficient symmetrically
        out[half] += 0.5 * spec[half];
        out[target.n - half] += 0.5 * spec[half];
        Ok(target.inverse_real(&out))
    }
}

/// `1/(iξ)` with the zero mode set to 0.
pub fn antiderivative_symbol(xi: f64) -> C64 {
    if xi == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        C64::new(0.0, -1.0 / xi)
    }
}

pub fn hilbert_symbol(xi: f64) -> C64 {
    if xi > 0.0 {
        C64::new(0.0, -1.0)
    } else if xi < 0.0 {
        C64::new(0.0, 1.0)
    } else {
        C64::new(0.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(PeriodicGrid::new(12, 1.0).unwrap_err(), Error::GridSize(12));
        assert!(matches!(PeriodicGrid::new(16, -1.0), Err(Error::GridLength(_))));
    }

    #[test]
    fn wavenumbers_are_symmetric_except_nyquist() {
        let g = PeriodicGrid::new(8, 2.0 * PI).unwrap();
        assert_eq!(g.wavenumbers(), &[0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn round_trip() {
        let g = PeriodicGrid::new(64, 3.0).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|x| (2.0 * x).sin() + 0.3 * x.cos().exp()).collect();
        let back = g.inverse_real(&g.forward(&v));
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_of_sine() {
        let g = PeriodicGrid::new(32, 2.0 * PI).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|x| (3.0 * x).sin()).collect();
        let d = g.deriv(&v, 1);
        for (x, dv) in g.nodes().iter().zip(&d) {
            assert!((dv - 3.0 * (3.0 * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn resample_preserves_band_limited_function() {
        let g = PeriodicGrid::new(16, 2.0 * PI).unwrap();
        let fine = PeriodicGrid::new(64, 2.0 * PI).unwrap();
        let f = |x: f64| (2.0 * x).cos() + 0.5 * (5.0 * x).sin();
        let v: Vec<f64> = g.nodes().iter().map(|&x| f(x)).collect();
        let r = g.resample(&v, &fine).unwrap();
        for (x, y) in fine.nodes().iter().zip(&r) {
            assert!((f(*x) - y).abs() < 1e-12);
        }
    }
}
