use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::CoefficientField;
use crate::spectral::{PeriodicGrid, RealField};

/// Default semiclassical constant `T` of the window `[0, 2^{−j/2}T]`.
pub const DEFAULT_T_SCALE: f64 = 1.0;
/// Minimum number of time steps over the window.
pub const MIN_STEPS: usize = 200;
/// The flow counts as degenerate once `∂α/∂β` drops below this.
pub const MIN_JACOBIAN: f64 = 0.1;
/// Target spacing of the coefficient lookup table.
const TABLE_SPACING: f64 = 0.02;
/// Points in the periodic Lagrange stencil of the lookup table.
const TABLE_STENCIL: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Semiclassical window `2^{−j/2}T`.
pub fn horizon(j: i32, t_scale: f64) -> f64 {
    t_scale * 2f64.powf(-0.5 * j as f64)
}

/// Frequency range `[2^{j−2}, 2^{j+2}]` on which the band-`j` phases are built.
pub fn band_range(j: i32) -> (f64, f64) {
    (2f64.powi(j - 2), 2f64.powi(j + 2))
}

/// Rescaled eikonal problem for one frequency `ξ` of band `j`:
/// `ϑ̃_t = 𝔮(t, α̃, ϑ̃_α̃)` with `α = 2^{j/2}α̃` and
/// `𝔮 = −σξ^{−1/2}V(t, 2^{j/2}α̃)(1 + σaη) + (1 + σaη)^{3/2} − 1`, `a = 2^{−j/2}ξ^{1/2}`.
///
/// `σ = ±1` selects the branch `φ^± = αξ ± ξ^{3/2}(t + ϑ)`.
#[derive(Debug, Clone)]
pub struct HamiltonJacobiProblem {
    pub coefficient: CoefficientField,
    pub j: i32,
    pub sign: Sign,
    pub xi: f64,
    pub t_scale: f64,
    pub steps: usize,
    /// Number of launch points `β_m` (a power of two, uniform over the period).
    pub launch_points: usize,
}

/// Launch count giving spacing at most 0.1 in `α`, capped by the coefficient grid.
pub fn default_launch_points(grid: &PeriodicGrid) -> usize {
    let want = (grid.length() / 0.1).ceil() as usize;
    want.next_power_of_two().clamp(64, grid.n().max(64))
}

impl HamiltonJacobiProblem {
    pub fn new(coefficient: CoefficientField, j: i32, sign: Sign, xi: f64, t_scale: f64) -> Result<Self> {
        if j < 1 {
            return Err(Error::InvalidInput(format!("band index must be at least 1, got {j}")));
        }
        let (lo, hi) = band_range(j);
        if !(xi >= lo * (1.0 - 1e-12) && xi <= hi * (1.0 + 1e-12)) {
            return Err(Error::InvalidInput(format!("ξ = {xi} outside the band range [{lo}, {hi}]")));
        }
        if !(t_scale > 0.0 && t_scale.is_finite()) {
            return Err(Error::InvalidInput(format!("T must be positive, got {t_scale}")));
        }
        let launch_points = default_launch_points(coefficient.grid());
        Ok(Self { coefficient, j, sign, xi, t_scale, steps: MIN_STEPS, launch_points })
    }

    pub fn horizon(&self) -> f64 {
        horizon(self.j, self.t_scale)
    }

    pub fn dt(&self) -> f64 {
        self.horizon() / self.steps as f64
    }

    fn validate(&self) -> Result<()> {
        if self.steps < MIN_STEPS {
            return Err(Error::InvalidInput(format!("need at least {MIN_STEPS} steps, got {}", self.steps)));
        }
        if !self.launch_points.is_power_of_two() || self.launch_points < 16 {
            return Err(Error::InvalidInput(format!("launch count {} must be a power of two ≥ 16", self.launch_points)));
        }
        Ok(())
    }

    fn scales(&self) -> Scales {
        let r = 2f64.powf(0.5 * self.j as f64);
        Scales { sigma: self.sign.factor(), r, a: self.xi.sqrt() / r, xi_mh: 1.0 / self.xi.sqrt() }
    }

    /// `𝔮(t, α̃, η)`, evaluating `V` by spectral interpolation.
    pub fn hamiltonian(&self, t: f64, alpha_tilde: f64, eta: f64) -> Result<f64> {
        let s = self.scales();
        let v = self.coefficient.value(t)?;
        let x = s.r * alpha_tilde;
        let vx = v.grid().interpolate(v.values(), &[x])[0];
        let p = 1.0 + s.sigma * s.a * eta;
        Ok(-s.sigma * s.xi_mh * vx * p + p.powf(1.5) - 1.0)
    }
}

#[derive(Debug, Clone, Copy)]
struct Scales {
    sigma: f64,
    /// `2^{j/2}`.
    r: f64,
    /// `2^{−j/2}ξ^{1/2}`.
    a: f64,
    /// `ξ^{−1/2}`.
    xi_mh: f64,
}

/// `V`, `V_α`, `V_αα` on a fine uniform grid at the half-step times of a window.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    length: f64,
    h: f64,
    n: usize,
    /// `[time][component][node]`; a single time for time-independent coefficients.
    data: Vec<[Vec<f64>; 3]>,
    zero: bool,
}

impl CoefficientTable {
    /// Table at times `k·dt/2`, `k = 0..=2·steps`.
    pub fn new(coefficient: &CoefficientField, dt: f64, steps: usize) -> Result<Self> {
        let g = coefficient.grid();
        let want = (g.length() / TABLE_SPACING).ceil() as usize;
        let n = want.next_power_of_two().max(g.n());
        let fine = PeriodicGrid::new(n, g.length())?;
        let build = |v: RealField| -> Result<[Vec<f64>; 3]> {
            let vals = if n == g.n() { v.into_values() } else { g.resample(v.values(), &fine)? };
            let d1 = fine.deriv(&vals, 1);
            let d2 = fine.deriv(&vals, 2);
            Ok([vals, d1, d2])
        };
        let data = if coefficient.is_time_independent() {
            vec![build(coefficient.value(0.0)?)?]
        } else {
            (0..=2 * steps).map(|k| build(coefficient.value(0.5 * dt * k as f64)?)).collect::<Result<Vec<_>>>()?
        };
        Ok(Self { length: g.length(), h: g.length() / n as f64, n, data, zero: coefficient.is_zero() })
    }

    /// `(V, V_α, V_αα)` at half-step index `k` and physical position `x`.
    pub fn eval(&self, k: usize, x: f64) -> (f64, f64, f64) {
        if self.zero {
            return (0.0, 0.0, 0.0);
        }
        let d = if self.data.len() == 1 { &self.data[0] } else { &self.data[k] };
        let s = x.rem_euclid(self.length) / self.h;
        let base = s.floor() as isize - (TABLE_STENCIL as isize / 2 - 1);
        let frac = s - base as f64;
        let mut out = [0.0; 3];
        for i in 0..TABLE_STENCIL {
            let mut w = 1.0;
            for k2 in 0..TABLE_STENCIL {
                if k2 != i {
                    w *= (frac - k2 as f64) / (i as f64 - k2 as f64);
                }
            }
            let idx = (base + i as isize).rem_euclid(self.n as isize) as usize;
            for (o, comp) in out.iter_mut().zip(d.iter()) {
                *o += w * comp[idx];
            }
        }
        (out[0], out[1], out[2])
    }
}

/// Characteristics of the rescaled eikonal problem launched from `α̃ = β`, `η = 0`.
///
/// Stored per time step `n` and launch index `m`. `alpha` is unwrapped (not reduced
/// modulo the period). `action` is `ϑ̃` along the characteristic.
#[derive(Debug, Clone)]
pub struct CharacteristicFlow {
    pub j: i32,
    pub sign: Sign,
    pub xi: f64,
    pub dt: f64,
    pub steps: usize,
    pub beta: Vec<f64>,
    pub alpha: Vec<Vec<f64>>,
    pub eta: Vec<Vec<f64>>,
    pub jacobian: Vec<Vec<f64>>,
    pub action: Vec<Vec<f64>>,
    pub min_jacobian: f64,
    pub max_jacobian: f64,
}

impl CharacteristicFlow {
    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|n| n as f64 * self.dt).collect()
    }
}

/// Rates of `(α̃, η, ∂α̃/∂β, ∂η/∂β, ϑ̃)`:
/// `α̃' = −𝔮_η`, `η' = 𝔮_α̃`, the variational system, and `ϑ̃' = 𝔮 − η𝔮_η`.
fn rates(s: &Scales, table: &CoefficientTable, k: usize, y: &[f64; 5]) -> Option<[f64; 5]> {
    let [al, eta, jac, kk, _] = *y;
    let (v, va, vaa) = table.eval(k, s.r * al);
    let p = 1.0 + s.sigma * s.a * eta;
    if !(p > 0.0) {
        return None;
    }
    let sp = p.sqrt();
    let q = -s.sigma * s.xi_mh * v * p + p * sp - 1.0;
    let q_eta = -v / s.r + 1.5 * s.sigma * s.a * sp;
    let q_al = -s.sigma * s.xi_mh * s.r * va * p;
    let q_eta_eta = 0.75 * s.a * s.a / sp;
    let q_eta_al = -va;
    let q_al_al = -s.sigma * s.xi_mh * s.r * s.r * vaa * p;
    Some([
        -q_eta,
        q_al,
        -(q_eta_al * jac + q_eta_eta * kk),
        q_al_al * jac + q_eta_al * kk,
        q - eta * q_eta,
    ])
}

pub fn solve_characteristics(problem: &HamiltonJacobiProblem) -> Result<CharacteristicFlow> {
    problem.validate()?;
    let table = CoefficientTable::new(&problem.coefficient, problem.dt(), problem.steps)?;
    solve_characteristics_with(problem, &table)
}

/// As [`solve_characteristics`] with a prebuilt coefficient table (shared across `ξ`).
pub fn solve_characteristics_with(problem: &HamiltonJacobiProblem, table: &CoefficientTable) -> Result<CharacteristicFlow> {
    problem.validate()?;
    let s = problem.scales();
    let (h, steps, nb) = (problem.dt(), problem.steps, problem.launch_points);
    let length = problem.coefficient.grid().length();
    let beta: Vec<f64> = (0..nb).map(|m| m as f64 * length / nb as f64 / s.r).collect();
    let mut state: Vec<[f64; 5]> = beta.iter().map(|&b| [b, 0.0, 1.0, 0.0, 0.0]).collect();
    let take = |st: &[[f64; 5]], c: usize| st.iter().map(|y| y[c]).collect::<Vec<f64>>();
    let mut flow = CharacteristicFlow {
        j: problem.j,
        sign: problem.sign,
        xi: problem.xi,
        dt: h,
        steps,
        beta: beta.clone(),
        alpha: vec![beta],
        eta: vec![vec![0.0; nb]],
        jacobian: vec![vec![1.0; nb]],
        action: vec![vec![0.0; nb]],
        min_jacobian: 1.0,
        max_jacobian: 1.0,
    };
    let axpy = |y: &[f64; 5], c: f64, k: &[f64; 5]| -> [f64; 5] { std::array::from_fn(|i| y[i] + c * k[i]) };
    for n in 0..steps {
        let t = n as f64 * h;
        for y in state.iter_mut() {
            let stage = || -> Option<[f64; 5]> {
                let k1 = rates(&s, table, 2 * n, y)?;
                let k2 = rates(&s, table, 2 * n + 1, &axpy(y, 0.5 * h, &k1))?;
                let k3 = rates(&s, table, 2 * n + 1, &axpy(y, 0.5 * h, &k2))?;
                let k4 = rates(&s, table, 2 * n + 2, &axpy(y, h, &k3))?;
                Some(std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])))
            };
            *y = stage().ok_or(Error::FlowDegeneracy { jacobian: f64::NAN, t })?;
            let jac = y[2];
            if !jac.is_finite() || jac < MIN_JACOBIAN {
                return Err(Error::FlowDegeneracy { jacobian: jac, t: t + h });
            }
            flow.min_jacobian = flow.min_jacobian.min(jac);
            flow.max_jacobian = flow.max_jacobian.max(jac);
        }
        flow.alpha.push(take(&state, 0));
        flow.eta.push(take(&state, 1));
        flow.jacobian.push(take(&state, 2));
        flow.action.push(take(&state, 4));
    }
    Ok(flow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn table_reproduces_trigonometric_coefficient() {
        let g = PeriodicGrid::new(64, TAU).unwrap();
        let c = CoefficientField::constant(&g, RealField::from_fn(&g, |a| 0.3 * (2.0 * a).sin()));
        let t = CoefficientTable::new(&c, 0.01, 10).unwrap();
        for &x in &[0.1, 1.234, 5.9, -0.7, 7.0] {
            let (v, va, vaa) = t.eval(3, x);
            assert!((v - 0.3 * (2.0 * x).sin()).abs() < 1e-11);
            assert!((va - 0.6 * (2.0 * x).cos()).abs() < 1e-10);
            assert!((vaa + 1.2 * (2.0 * x).sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn hamiltonian_vanishes_at_rest_without_coefficient() {
        let g = PeriodicGrid::new(64, TAU).unwrap();
        let p = HamiltonJacobiProblem::new(CoefficientField::zero(&g), 4, Sign::Plus, 16.0, 1.0).unwrap();
        assert_eq!(p.hamiltonian(0.0, 0.3, 0.0).unwrap(), 0.0);
        assert!(HamiltonJacobiProblem::new(CoefficientField::zero(&g), 4, Sign::Plus, 100.0, 1.0).is_err());
    }
}
