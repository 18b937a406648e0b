use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, RealField};
use crate::vortex_sheet::Physics;

/// Which right-hand side is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    /// Full remainder `R` from the vortex-sheet formulation.
    Full,
    /// `R ≡ 0`: only the explicit quasilinear terms are kept.
    Truncated,
    /// The constant-coefficient linear equation `u_tt = (S/2)H∂³u − gH∂u`.
    LinearFree,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 3] = [ModelVariant::Full, ModelVariant::Truncated, ModelVariant::LinearFree];

    pub fn is_nonlinear(self) -> bool {
        self != ModelVariant::LinearFree
    }
}

/// `(u, v, θ)` at time `t`, with `v = u_t + uu_α` the material derivative.
#[derive(Debug, Clone)]
pub struct WaveState {
    pub t: f64,
    pub u: RealField,
    pub v: RealField,
    pub theta: RealField,
    pub physics: Physics,
}

impl WaveState {
    pub fn new(t: f64, u: RealField, v: RealField, theta: RealField, physics: Physics) -> Result<Self> {
        physics.validate()?;
        if **u.grid() != **v.grid() || **u.grid() != **theta.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { t, u, v, theta, physics })
    }

    pub fn zeros(grid: &crate::spectral::Grid, physics: Physics) -> Self {
        let z = RealField::zeros(grid);
        Self { t: 0.0, u: z.clone(), v: z.clone(), theta: z, physics }
    }

    pub fn grid(&self) -> &crate::spectral::Grid {
        self.u.grid()
    }

    /// `u_t = v − uu_α`.
    pub fn u_t(&self) -> Result<RealField> {
        self.v.sub(&self.u.mul(&self.u.deriv(1))?)
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.theta.is_finite()
    }

    pub fn snapshot(&self) -> WaveSnapshot {
        WaveSnapshot {
            t: self.t,
            grid: self.grid().spec(),
            u: self.u.values().to_vec(),
            v: self.v.values().to_vec(),
            theta: self.theta.values().to_vec(),
        }
    }
}

/// Serialized state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSnapshot {
    pub t: f64,
    pub grid: GridSpec,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
}
