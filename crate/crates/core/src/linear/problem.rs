use serde::{Deserialize, Serialize};

use super::coefficient::CoefficientField;
use crate::error::{Error, Result};
use crate::spectral::{Grid, RealField};
use crate::util::lagrange_weights;

/// Right side `R(t, α)` of the linear equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Forcing {
    Zero,
    /// `amplitude · cos(wavenumber · α) · cos(frequency · t)`.
    Mode { wavenumber: f64, amplitude: f64, frequency: f64 },
    /// Samples at `t0 + i·dt`, cubic interpolation in time.
    Samples { t0: f64, dt: f64, values: Vec<Vec<f64>> },
}

impl Forcing {
    pub fn is_zero(&self) -> bool {
        match self {
            Forcing::Zero => true,
            Forcing::Mode { amplitude, .. } => *amplitude == 0.0,
            Forcing::Samples { values, .. } => values.iter().all(|v| v.iter().all(|&x| x == 0.0)),
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        match self {
            Forcing::Zero => Ok(()),
            Forcing::Mode { wavenumber, amplitude, frequency } => {
                let m = wavenumber * grid.length() / std::f64::consts::TAU;
                if !(amplitude.is_finite() && frequency.is_finite()) || (m - m.round()).abs() > 1e-9 {
                    return Err(Error::InvalidInput(format!("forcing wavenumber {wavenumber} is not periodic on the grid")));
                }
                Ok(())
            }
            Forcing::Samples { t0, dt, values } => {
                if values.len() < 4 || !(*dt > 0.0) || !t0.is_finite() {
                    return Err(Error::InvalidInput("sampled forcing needs ≥ 4 samples and dt > 0".into()));
                }
                match values.iter().find(|v| v.len() != grid.n()) {
                    Some(v) => Err(Error::LengthMismatch { expected: grid.n(), got: v.len() }),
                    None => Ok(()),
                }
            }
        }
    }

    /// `R(t, ·)`, or `None` when identically zero.
    pub fn eval(&self, grid: &Grid, t: f64) -> Result<Option<RealField>> {
        match self {
            Forcing::Zero => Ok(None),
            Forcing::Mode { wavenumber, amplitude, frequency } => {
                let a = amplitude * (frequency * t).cos();
                Ok(Some(RealField::from_fn(grid, |x| a * (wavenumber * x).cos())))
            }
            Forcing::Samples { t0, dt, values } => {
                let t1 = t0 + (values.len() - 1) as f64 * dt;
                if !(t >= t0 - dt && t <= t1 + dt) {
                    return Err(Error::TimeOutOfRange { t, t0: *t0, t1 });
                }
                let (start, w) = lagrange_weights(values.len(), *t0, *dt, t, 4);
                let mut out = vec![0.0; grid.n()];
                for (k, wk) in w.iter().enumerate() {
                    for (o, x) in out.iter_mut().zip(&values[start + k]) {
                        *o += wk * x;
                    }
                }
                Ok(Some(RealField::new(grid, out)?))
            }
        }
    }
}

/// `∂_t²u − H∂³u + 2V∂∂_tu + V²∂²u = R` on `[0, t_final]` with `u(0) = u₀`, `∂_tu(0) = u₁`.
#[derive(Debug, Clone)]
pub struct LinearProblem {
    pub coefficient: CoefficientField,
    pub u0: RealField,
    pub u1: RealField,
    pub forcing: Forcing,
    pub t_final: f64,
}

impl LinearProblem {
    pub fn new(coefficient: CoefficientField, u0: RealField, u1: RealField, forcing: Forcing, t_final: f64) -> Result<Self> {
        let g = coefficient.grid();
        if **u0.grid() != **g || **u1.grid() != **g {
            return Err(Error::GridMismatch);
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidInput(format!("t_final must be positive, got {t_final}")));
        }
        forcing.validate(g)?;
        Ok(Self { coefficient, u0, u1, forcing, t_final })
    }

    pub fn grid(&self) -> &Grid {
        self.coefficient.grid()
    }
}

/// Length `2^{−j/2}T` of the semiclassical window of band `j`.
pub fn semiclassical_window(j: i32, t: f64) -> f64 {
    t * 2f64.powf(-0.5 * j as f64)
}

/// `∂_t²U − H∂³U + 2V∂∂_tU + V²∂²U` at time `t` from a snapshot triple.
pub fn apply_p(coefficient: &CoefficientField, t: f64, u: &RealField, u_t: &RealField, u_tt: &RealField) -> Result<RealField> {
    let h3 = u.deriv(3).hilbert();
    let base = u_tt.sub(&h3)?;
    if coefficient.is_zero() {
        return Ok(base);
    }
    let v = coefficient.value(t)?;
    let vt = v.mul(&u_t.deriv(1))?.scale(2.0);
    let vv = v.mul(&v)?.mul(&u.deriv(2))?;
    base.add(&vt)?.add(&vv)
}
