use crate::error::{Error, Result};
use crate::evolution::{omega_squared, ModelVariant, Trajectory};
use crate::linear::{rotate_modes, LinearProblem, LinearTrajectory};
use crate::spectral::{Grid, RealField};
use crate::vortex_sheet::Physics;

/// Uniform time samples of `u` together with the data `(u₀, u₁)` that produced them.
#[derive(Debug, Clone)]
pub struct Samples {
    pub times: Vec<f64>,
    pub u: Vec<RealField>,
    pub u0: RealField,
    pub u1: RealField,
}

impl Samples {
    pub fn new(times: Vec<f64>, u: Vec<RealField>, u0: RealField, u1: RealField) -> Result<Self> {
        if times.len() < 2 || times.len() != u.len() {
            return Err(Error::InsufficientData { needed: 2, got: times.len().min(u.len()) });
        }
        let h = times[1] - times[0];
        if !(h > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
            return Err(Error::WindowMismatch("sample times must be increasing and uniform".into()));
        }
        let g = u0.grid();
        if **u1.grid() != **g || u.iter().any(|f| **f.grid() != **g) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { times, u, u0, u1 })
    }

    /// Snapshots of a nonlinear run; `u₁ = v₀ − u₀∂u₀` (or `v₀` for the linear-free variant).
    pub fn from_evolution(tr: &Trajectory) -> Result<Self> {
        let g = tr.final_state.grid();
        let field = |x: &[f64]| RealField::new(g, x.to_vec());
        let first = tr.snapshots.first().ok_or(Error::InsufficientData { needed: 2, got: 0 })?;
        let u0 = field(&first.u)?;
        let v0 = field(&first.v)?;
        let u1 = if tr.variant == ModelVariant::LinearFree { v0 } else { v0.sub(&u0.mul(&u0.deriv(1))?)? };
        let u = tr.snapshots.iter().map(|s| field(&s.u)).collect::<Result<Vec<_>>>()?;
        Self::new(tr.snapshots.iter().map(|s| s.t).collect(), u, u0, u1)
    }

    pub fn from_linear(problem: &LinearProblem, tr: &LinearTrajectory) -> Result<Self> {
        Self::new(tr.times.clone(), tr.u.clone(), problem.u0.clone(), problem.u1.clone())
    }

    /// The exact linear-free flow `u_tt = −ω²(D)u` sampled at `count` uniform times on `[0, t_final]`.
    pub fn free_flow(u0: &RealField, u1: &RealField, physics: Physics, t_final: f64, count: usize) -> Result<Self> {
        physics.validate()?;
        if count < 2 || !(t_final > 0.0) {
            return Err(Error::InvalidInput("free flow needs t_final > 0 and at least two samples".into()));
        }
        let times: Vec<f64> = (0..count).map(|k| t_final * k as f64 / (count - 1) as f64).collect();
        let u = times.iter().map(|&t| rotate_modes(u0, u1, t, |xi| omega_squared(xi, physics)).0).collect();
        Self::new(times, u, u0.clone(), u1.clone())
    }

    pub fn grid(&self) -> &Grid {
        self.u0.grid()
    }

    pub fn window(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().expect("nonempty"))
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Index range of the samples spanning `[a, b]`; both ends must be sample times.
    pub fn index_range(&self, a: f64, b: f64) -> Result<(usize, usize)> {
        let h = self.dt();
        let t0 = self.times[0];
        let locate = |t: f64| -> Result<usize> {
            let k = ((t - t0) / h).round();
            if k < 0.0 || k as usize >= self.times.len() || (t - self.times[k as usize]).abs() > 1e-6 * h {
                return Err(Error::WindowMismatch(format!("time {t} is not a sample time in {:?}", self.window())));
            }
            Ok(k as usize)
        };
        let (i, j) = (locate(a)?, locate(b)?);
        if j <= i {
            return Err(Error::WindowMismatch(format!("window [{a}, {b}] holds fewer than two samples")));
        }
        Ok((i, j))
    }

    /// Samples on `[a, b]`, keeping the original data.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        let (i, j) = self.index_range(a, b)?;
        Ok(Self {
            times: self.times[i..=j].to_vec(),
            u: self.u[i..=j].to_vec(),
            u0: self.u0.clone(),
            u1: self.u1.clone(),
        })
    }

    /// Multiplies the samples and the data by `c`.
    pub fn scale(&self, c: f64) -> Self {
        Self {
            times: self.times.clone(),
            u: self.u.iter().map(|f| f.scale(c)).collect(),
            u0: self.u0.scale(c),
            u1: self.u1.scale(c),
        }
    }
}
