use serde::{Deserialize, Serialize};

use super::interface::Interface;
use super::kernels::{br_conj, commutator_h_complex, k_apply};
use crate::error::{Error, Result};
use crate::spectral::{ComplexField, GridSpec, RealField, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Surface tension `S` and gravity `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    pub s: f64,
    pub g: f64,
}

impl Default for Physics {
    /// The normalization `S/2 = 1`, `g = 0`.
    fn default() -> Self {
        Self { s: 2.0, g: 0.0 }
    }
}

impl Physics {
    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s.is_finite()) || !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::InvalidInput(format!("need S > 0 and g >= 0, got S={} g={}", self.s, self.g)));
        }
        Ok(())
    }
}

/// Velocity fields induced by a sheet of strength γ on an interface.
#[derive(Debug, Clone)]
pub struct SheetVelocity {
    /// `Φ̄(W)` at the nodes.
    pub w_conj: Vec<C64>,
    /// `U⊥ = W·n̂`.
    pub w_normal: RealField,
    pub w_tangent: RealField,
    /// Mean-zero `U∥` with `∂_α U∥ = U⊥θ_α − c₀`.
    pub u_parallel: RealField,
    /// `c₀ = ⟨U⊥θ_α⟩`, the rate at which the period vector dilates.
    pub c0: f64,
    /// `U∥ − W·t̂`.
    pub delta: RealField,
}

impl SheetVelocity {
    pub fn compute(iface: &Interface, gamma: &RealField) -> Result<Self> {
        let grid = iface.grid();
        let w_conj = br_conj(iface, gamma.values())?;
        let za = iface.z_alpha();
        let wt: Vec<f64> = w_conj.iter().zip(za).map(|(w, z)| (z * w).re).collect();
        let wn: Vec<f64> = w_conj.iter().zip(za).map(|(w, z)| (I * z * w).re).collect();
        let w_tangent = RealField::new(grid, wt)?;
        let w_normal = RealField::new(grid, wn)?;
        let drive = w_normal.mul(&iface.theta().deriv(1))?;
        let c0 = drive.mean();
        let u_parallel = drive.antiderivative_projected();
        let delta = u_parallel.sub(&w_tangent)?;
        Ok(Self { w_conj, w_normal, w_tangent, u_parallel, c0, delta })
    }
}

/// Interface plus vortex-sheet strength γ and modified tangential velocity
/// `u = γ/2 − (U∥ − W·t̂)`.
#[derive(Debug, Clone)]
pub struct SheetState {
    interface: Interface,
    gamma: RealField,
    u: RealField,
    velocity: SheetVelocity,
}

/// Damped Picard parameters for recovering γ from u.
pub const PICARD_DAMPING: f64 = 0.5;
pub const PICARD_MAX_ITER: usize = 200;
const PICARD_TOL: f64 = 1e-13;

impl SheetState {
    pub fn from_gamma(theta: &RealField, gamma: &RealField) -> Result<Self> {
        let interface = Interface::reconstruct(theta)?;
        Self::from_interface_gamma(interface, gamma.clone())
    }

    fn from_interface_gamma(interface: Interface, gamma: RealField) -> Result<Self> {
        let velocity = SheetVelocity::compute(&interface, &gamma)?;
        let u = gamma.scale(0.5).sub(&velocity.delta)?;
        Ok(Self { interface, gamma, u, velocity })
    }

    /// Recovers γ from `u` by the damped fixed point `γ = 2u + 2(U∥ − W·t̂)[γ]`.
    pub fn from_u(theta: &RealField, u: &RealField) -> Result<Self> {
        let interface = Interface::reconstruct(theta)?;
        let gamma = gamma_from_u(&interface, u)?;
        let velocity = SheetVelocity::compute(&interface, &gamma)?;
        Ok(Self { interface, gamma, u: u.clone(), velocity })
    }

    pub fn interface(&self) -> &Interface {
        &self.interface
    }

    pub fn theta(&self) -> &RealField {
        self.interface.theta()
    }

    pub fn gamma(&self) -> &RealField {
        &self.gamma
    }

    pub fn u(&self) -> &RealField {
        &self.u
    }

    pub fn velocity(&self) -> &SheetVelocity {
        &self.velocity
    }

    /// `W_α·n̂` and `W_α·t̂` by spectral differentiation of the velocity vector.
    pub fn w_alpha(&self) -> Result<(RealField, RealField)> {
        let grid = self.interface.grid();
        let d = grid.deriv_complex(&self.velocity.w_conj, 1);
        let za = self.interface.z_alpha();
        let n = d.iter().zip(za).map(|(w, z)| (I * z * w).re).collect();
        let t = d.iter().zip(za).map(|(w, z)| (z * w).re).collect();
        Ok((RealField::new(grid, n)?, RealField::new(grid, t)?))
    }

    pub fn record(&self) -> SheetRecord {
        SheetRecord {
            grid: self.interface.grid().spec(),
            theta: self.theta().values().to_vec(),
            gamma: self.gamma.values().to_vec(),
            u: self.u.values().to_vec(),
        }
    }

    pub fn from_record(rec: &SheetRecord) -> Result<Self> {
        let grid = rec.grid.build()?;
        let theta = RealField::new(&grid, rec.theta.clone())?;
        let gamma = RealField::new(&grid, rec.gamma.clone())?;
        let u = RealField::new(&grid, rec.u.clone())?;
        let interface = Interface::reconstruct(&theta)?;
        let velocity = SheetVelocity::compute(&interface, &gamma)?;
        Ok(Self { interface, gamma, u, velocity })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.record()).expect("sheet record serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: SheetRecord =
            serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("sheet json: {e}")))?;
        Self::from_record(&rec)
    }
}

/// Serialized sheet: grid descriptor and raw samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheetRecord {
    pub grid: GridSpec,
    pub theta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub u: Vec<f64>,
}

pub(crate) fn gamma_from_u(iface: &Interface, u: &RealField) -> Result<RealField> {
    let two_u = u.scale(2.0);
    let mut gamma = two_u.clone();
    let scale = two_u.max_abs().max(f64::MIN_POSITIVE);
    let mut change = f64::INFINITY;
    for _ in 0..PICARD_MAX_ITER {
        let v = SheetVelocity::compute(iface, &gamma)?;
        let target = two_u.add(&v.delta.scale(2.0))?;
        let next = gamma.zip_with(&target, |g, t| (1.0 - PICARD_DAMPING) * g + PICARD_DAMPING * t)?;
        change = next.sub(&gamma)?.max_abs() / scale;
        gamma = next;
        if change <= PICARD_TOL {
            return Ok(gamma);
        }
    }
    if change <= 1e-10 {
        return Ok(gamma);
    }
    Err(Error::SolverDivergence { solver: "gamma-from-u", iterations: PICARD_MAX_ITER, residual: change })
}

/// `u = γ/2 − (U∥ − W·t̂)`.
pub fn u_from_gamma(iface: &Interface, gamma: &RealField) -> Result<RealField> {
    let v = SheetVelocity::compute(iface, gamma)?;
    gamma.scale(0.5).sub(&v.delta)
}

/// Normal and tangential Birkhoff–Rott velocity `(W·n̂, W·t̂)`.
pub fn birkhoff_rott(state: &SheetState) -> (RealField, RealField) {
    (state.velocity.w_normal.clone(), state.velocity.w_tangent.clone())
}

/// `Φ̄(m) = z_α K[z](γ_α/z_α − γz_αα/z_α²) + (z_α/2i)[H, 1/z_α²](γ_α − γz_αα/z_α)`.
pub fn compute_m(state: &SheetState) -> Result<ComplexField> {
    let iface = &state.interface;
    let grid = iface.grid();
    let (za, zaa) = (iface.z_alpha(), iface.z_alpha_alpha());
    let g = state.gamma.values();
    let ga = state.gamma.deriv(1);
    let ga = ga.values();
    let n = grid.n();
    let f1: Vec<C64> = (0..n).map(|k| ga[k] / za[k] - g[k] * zaa[k] / (za[k] * za[k])).collect();
    let kf = k_apply(iface, &f1)?;
    let h: Vec<C64> = za.iter().map(|z| 1.0 / (z * z)).collect();
    let f2: Vec<C64> = (0..n).map(|k| ga[k] - g[k] * zaa[k] / za[k]).collect();
    let comm = commutator_h_complex(grid, &h, &f2);
    let values = (0..n).map(|k| za[k] * kf[k] + za[k] / (2.0 * I) * comm[k]).collect();
    ComplexField::new(grid, values)
}

/// Tangential and normal components `(m·t̂, m·n̂)`.
pub fn m_components(state: &SheetState, m: &ComplexField) -> Result<(RealField, RealField)> {
    let grid = state.interface.grid();
    let za = state.interface.z_alpha();
    let t = m.values().iter().zip(za).map(|(w, z)| (z * w).re).collect();
    let nn = m.values().iter().zip(za).map(|(w, z)| (I * z * w).re).collect();
    Ok((RealField::new(grid, t)?, RealField::new(grid, nn)?))
}

/// `r₁ = −H(m·t̂) + m·n̂`.
pub fn remainder_r1(state: &SheetState) -> Result<RealField> {
    let m = compute_m(state)?;
    let (mt, mn) = m_components(state, &m)?;
    mn.sub(&mt.hilbert())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicGrid;
    use std::f64::consts::PI;

    #[test]
    fn flat_constant_sheet_is_at_rest() {
        let g = PeriodicGrid::new(32, 2.0 * PI).unwrap();
        let st = SheetState::from_gamma(&RealField::zeros(&g), &RealField::from_fn(&g, |_| 0.7)).unwrap();
        let (wn, wt) = birkhoff_rott(&st);
        assert!(wn.max_abs() < 1e-13 && wt.max_abs() < 1e-13);
        assert!(compute_m(&st).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn flat_cosine_sheet() {
        let g = PeriodicGrid::new(32, 2.0 * PI).unwrap();
        let st = SheetState::from_gamma(&RealField::zeros(&g), &RealField::from_fn(&g, f64::cos)).unwrap();
        let (wn, wt) = birkhoff_rott(&st);
        for (a, (n, t)) in g.nodes().iter().zip(wn.values().iter().zip(wt.values())) {
            assert!((n - 0.5 * a.sin()).abs() < 1e-13 && t.abs() < 1e-13);
        }
        assert!(compute_m(&st).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let g = PeriodicGrid::new(16, 2.0 * PI).unwrap();
        let theta = RealField::from_fn(&g, |a| 0.1 * a.sin() + 1.0 / 3.0);
        let gamma = RealField::from_fn(&g, |a| (a.cos()).exp() * 1e-3);
        let st = SheetState::from_gamma(&theta, &gamma).unwrap();
        let back = SheetState::from_json(&st.to_json()).unwrap();
        assert_eq!(back.record(), st.record());
        assert!(SheetState::from_json("{\"grid\":{\"n\":16,\"length\":1.0},\"theta\":[],\"gamma\":[],\"u\":[],\"x\":1}").is_err());
    }
}
