use crate::error::{Error, Result};
use crate::spectral::{ComplexField, Grid, RealField, C64};

/// A curve `z(α)` with unit tangent `e^{iθ(α)}`, periodic up to the shift
/// `z(α + L) = z(α) + P`.
///
/// The period vector `P = ∫₀^L e^{iθ}` is generally complex: on the torus the
/// curve closes up to a rigid translation rather than up to `(L, 0)`.
#[derive(Debug, Clone)]
pub struct Interface {
    theta: RealField,
    z: Vec<C64>,
    z_alpha: Vec<C64>,
    z_alpha_alpha: Vec<C64>,
    period: C64,
}

/// Smallest `|P|/L` accepted; below it the sheet folds back on itself.
const MIN_PERIOD_RATIO: f64 = 0.5;

impl Interface {
    pub fn reconstruct(theta: &RealField) -> Result<Self> {
        let grid = theta.grid();
        let z_alpha: Vec<C64> = theta.values().iter().map(|&t| C64::from_polar(1.0, t)).collect();
        let mean = z_alpha.iter().sum::<C64>() / grid.n() as f64;
        let ratio = mean.norm();
        if ratio < MIN_PERIOD_RATIO || !ratio.is_finite() {
            return Err(Error::NonClosingCurve { ratio });
        }
        let fluct: Vec<C64> = z_alpha.iter().map(|w| w - mean).collect();
        let periodic = grid.antiderivative_projected_complex(&fluct);
        let z = periodic.iter().zip(grid.nodes()).map(|(p, a)| p + mean * a).collect();
        let z_alpha_alpha = z_alpha
            .iter()
            .zip(theta.deriv(1).values())
            .map(|(w, &ta)| C64::new(0.0, ta) * w)
            .collect();
        Ok(Self { theta: theta.clone(), z, z_alpha, z_alpha_alpha, period: mean * grid.length() })
    }

    pub fn flat(grid: &Grid) -> Self {
        Self::reconstruct(&RealField::zeros(grid)).expect("flat curve always closes")
    }

    pub fn grid(&self) -> &Grid {
        self.theta.grid()
    }

    pub fn theta(&self) -> &RealField {
        &self.theta
    }

    pub fn z(&self) -> &[C64] {
        &self.z
    }

    pub fn z_alpha(&self) -> &[C64] {
        &self.z_alpha
    }

    pub fn z_alpha_alpha(&self) -> &[C64] {
        &self.z_alpha_alpha
    }

    pub fn period(&self) -> C64 {
        self.period
    }

    pub fn curve(&self) -> ComplexField {
        ComplexField::new(self.grid(), self.z.clone()).expect("curve has grid length")
    }

    /// Arclength density `|z_α|` recomputed from the reconstructed curve.
    pub fn s_alpha(&self) -> Vec<f64> {
        self.curve_derivative().iter().map(|w| w.norm()).collect()
    }

    /// Tangent angle recovered from the curve as `atan2(y_α, x_α)` (principal branch).
    pub fn angle_from_curve(&self) -> RealField {
        let values = self.curve_derivative().iter().map(|w| w.im.atan2(w.re)).collect();
        RealField::new(self.grid(), values).expect("grid length")
    }

    /// Spectral derivative of the periodic part of `z` plus the mean slope `P/L`.
    fn curve_derivative(&self) -> Vec<C64> {
        let grid = self.grid();
        let slope = self.period / grid.length();
        let periodic: Vec<C64> =
            self.z.iter().zip(grid.nodes()).map(|(z, a)| z - slope * a).collect();
        grid.deriv_complex(&periodic, 1).into_iter().map(|d| d + slope).collect()
    }

    /// Unit tangent `t̂ = (cos θ, sin θ)` as a complex number.
    pub fn tangent(&self, m: usize) -> C64 {
        self.z_alpha[m]
    }

    /// Unit normal `n̂ = (-sin θ, cos θ)` as a complex number.
    pub fn normal(&self, m: usize) -> C64 {
        C64::new(0.0, 1.0) * self.z_alpha[m]
    }
}

/// Curve reconstruction `z(α) = ∫₀^α e^{iθ}` on the torus.
pub fn reconstruct_curve(theta: &RealField) -> Result<Interface> {
    Interface::reconstruct(theta)
}
