use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Grid, GridSpec, RealField};
use crate::util::{d1_fourth_order, lagrange_weights};

/// Number of samples in the time interpolation stencil (cubic).
const STENCIL: usize = 4;

/// Time-dependent coefficient `V(t, α)` given by samples at uniform times.
///
/// Values between samples use cubic Lagrange interpolation; `V_t` is the
/// fourth-order finite difference of the samples, interpolated the same way.
/// A single sample means `V` is constant in time. Evaluation is allowed up to
/// one sample spacing beyond either end (extrapolating the end stencil).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "CoefficientRecord", into = "CoefficientRecord")]
pub struct CoefficientField {
    grid: Grid,
    t0: f64,
    dt: f64,
    samples: Vec<Vec<f64>>,
    dt_samples: Vec<Vec<f64>>,
    zero: bool,
}

/// Serialized form of [`CoefficientField`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientRecord {
    pub grid: GridSpec,
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<Vec<f64>>,
}

impl TryFrom<CoefficientRecord> for CoefficientField {
    type Error = Error;

    fn try_from(r: CoefficientRecord) -> Result<Self> {
        let grid = r.grid.build()?;
        let samples = r.samples.into_iter().map(|v| RealField::new(&grid, v)).collect::<Result<Vec<_>>>()?;
        Self::new(&grid, r.t0, r.dt, samples)
    }
}

impl From<CoefficientField> for CoefficientRecord {
    fn from(c: CoefficientField) -> Self {
        Self { grid: c.grid.spec(), t0: c.t0, dt: c.dt, samples: c.samples }
    }
}

impl CoefficientField {
    pub fn new(grid: &Grid, t0: f64, dt: f64, samples: Vec<RealField>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if samples.len() > 1 && samples.len() < 5 {
            return Err(Error::InsufficientData { needed: 5, got: samples.len() });
        }
        if !t0.is_finite() || (samples.len() > 1 && !(dt > 0.0 && dt.is_finite())) {
            return Err(Error::InvalidInput(format!("bad coefficient time axis t0={t0} dt={dt}")));
        }
        let mut vals = Vec::with_capacity(samples.len());
        for s in &samples {
            if **s.grid() != **grid {
                return Err(Error::GridMismatch);
            }
            if !s.is_finite() {
                return Err(Error::InvalidInput("coefficient samples must be finite".into()));
            }
            vals.push(s.values().to_vec());
        }
        let n = grid.n();
        let dt_samples = if vals.len() == 1 {
            vec![vec![0.0; n]]
        } else {
            let mut out = vec![vec![0.0; n]; vals.len()];
            let mut column = vec![0.0; vals.len()];
            for m in 0..n {
                for (c, v) in column.iter_mut().zip(&vals) {
                    *c = v[m];
                }
                for (i, o) in out.iter_mut().enumerate() {
                    o[m] = d1_fourth_order(&column, dt, i);
                }
            }
            out
        };
        let zero = vals.iter().all(|v| v.iter().all(|&x| x == 0.0));
        Ok(Self { grid: grid.clone(), t0, dt, samples: vals, dt_samples, zero })
    }

    pub fn zero(grid: &Grid) -> Self {
        Self::constant(grid, RealField::zeros(grid))
    }

    /// Time-independent coefficient.
    pub fn constant(grid: &Grid, v: RealField) -> Self {
        Self::new(grid, 0.0, 1.0, vec![v]).expect("single finite sample on its own grid")
    }

    /// Samples `f(t, α)` at `nt + 1` uniform times on `[t0, t1]`.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: &Grid, t0: f64, t1: f64, nt: usize, f: F) -> Result<Self> {
        if nt < 4 || !(t1 > t0) {
            return Err(Error::InvalidInput("need t1 > t0 and at least 5 time samples".into()));
        }
        let dt = (t1 - t0) / nt as f64;
        let samples = (0..=nt).map(|i| RealField::from_fn(grid, |a| f(t0 + i as f64 * dt, a))).collect();
        Self::new(grid, t0, dt, samples)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn is_time_independent(&self) -> bool {
        self.samples.len() == 1
    }

    /// Sampled interval; unbounded for a time-independent field.
    pub fn time_range(&self) -> (f64, f64) {
        if self.is_time_independent() {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            (self.t0, self.t0 + (self.samples.len() - 1) as f64 * self.dt)
        }
    }

    fn interpolate(&self, data: &[Vec<f64>], t: f64) -> Result<RealField> {
        if data.len() == 1 {
            return RealField::new(&self.grid, data[0].clone());
        }
        let (a, b) = self.time_range();
        if !(t >= a - self.dt && t <= b + self.dt) {
            return Err(Error::TimeOutOfRange { t, t0: a, t1: b });
        }
        let (start, w) = lagrange_weights(data.len(), self.t0, self.dt, t, STENCIL);
        let mut out = vec![0.0; self.grid.n()];
        for (k, wk) in w.iter().enumerate() {
            for (o, x) in out.iter_mut().zip(&data[start + k]) {
                *o += wk * x;
            }
        }
        RealField::new(&self.grid, out)
    }

    /// `V(t, ·)`.
    pub fn value(&self, t: f64) -> Result<RealField> {
        self.interpolate(&self.samples, t)
    }

    /// `V_t(t, ·)`.
    pub fn time_derivative(&self, t: f64) -> Result<RealField> {
        self.interpolate(&self.dt_samples, t)
    }

    fn w_k_inf(data: &[Vec<f64>], grid: &Grid, k: u32) -> f64 {
        data.iter()
            .map(|v| {
                let f = RealField::new(grid, v.clone()).expect("grid length");
                (0..=k).map(|j| f.deriv(j).max_abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// `‖V‖_{L^∞_t W^{k,∞}}` over the samples, with `‖f‖_{W^{k,∞}} = Σ_{j≤k} ‖∂^j f‖_∞`.
    pub fn sup_norm(&self, k: u32) -> f64 {
        Self::w_k_inf(&self.samples, &self.grid, k)
    }

    /// `‖V_t‖_{L^∞_t W^{k,∞}}` over the samples.
    pub fn sup_norm_t(&self, k: u32) -> f64 {
        Self::w_k_inf(&self.dt_samples, &self.grid, k)
    }
}
