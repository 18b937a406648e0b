//! Periodized Cauchy-type kernels: the Birkhoff–Rott integral, the smoothing
//! operator `K[z]` and the Hilbert commutator `[H, h]`.
//!
//! On the torus `1/(z − z')` is replaced by `Kp(w, P) = (π/P) cot(πw/P)`,
//! which sums the images `1/(w + kP)`. Removable diagonals are filled with
//! their analytic limits, so the plain trapezoid rule is spectrally accurate.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::interface::Interface;
use crate::error::{Error, Result};
use crate::spectral::{ComplexField, Grid, RealField, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Complex cotangent, stable for large imaginary parts.
pub(crate) fn cot(x: C64) -> C64 {
    if x.im.abs() < 20.0 {
        x.cos() / x.sin()
    } else if x.im > 0.0 {
        let e = (2.0 * I * x).exp();
        I * (e + 1.0) / (e - 1.0)
    } else {
        let e = (-2.0 * I * x).exp();
        -I * (e + 1.0) / (e - 1.0)
    }
}

/// `Kp(w, P) = (π/P) cot(πw/P)`.
pub(crate) fn kp(w: C64, p: C64) -> C64 {
    (PI / p) * cot(PI * w / p)
}

/// `∂_w Kp` and `∂_P Kp`.
pub(crate) fn kp_derivatives(w: C64, p: C64) -> (C64, C64) {
    let c = cot(PI * w / p);
    let csc2 = 1.0 + c * c;
    let dw = -(PI / p) * (PI / p) * csc2;
    let dp = -(PI / (p * p)) * c + (PI * PI * w / (p * p * p)) * csc2;
    (dw, dp)
}

/// `(π/L) cot(π d Δα / L)` for index offsets `d = 0..N` (entry 0 unused).
pub(crate) fn flat_cot_table(grid: &Grid) -> Vec<f64> {
    let (n, l) = (grid.n(), grid.length());
    (0..n)
        .map(|d| if d == 0 { 0.0 } else { (PI / l) / (PI * d as f64 / n as f64).tan() })
        .collect()
}

/// Minimum separation between nodes at least two cells apart, relative to Δα,
/// below which the curve is treated as self-intersecting.
const MIN_SEPARATION: f64 = 0.01;

/// Nearest periodic image of `w` modulo the period vector.
fn reduce(w: C64, p: C64) -> C64 {
    let k = (w / p).re.round();
    w - k * p
}

/// Rejects curves whose well-separated node pairs nearly touch.
pub fn check_separation(iface: &Interface) -> Result<()> {
    let n = iface.grid().n();
    let dx = iface.grid().dx();
    let z = iface.z();
    let p = iface.period();
    let mut min = f64::INFINITY;
    for m in 0..n {
        for k in 2..=n / 2 {
            let d = reduce(z[m] - z[(m + k) % n], p).norm();
            min = min.min(d);
        }
    }
    if min < MIN_SEPARATION * dx {
        return Err(Error::CurveDegeneracy { separation: min });
    }
    Ok(())
}

/// Row `m` of the `K[z]` quadrature matrix, without the `Δα/(2πi)` factor.
fn k_row(iface: &Interface, table: &[f64], m: usize, out: &mut [C64]) {
    let n = out.len();
    let (z, za, zaa, p) = (iface.z(), iface.z_alpha(), iface.z_alpha_alpha(), iface.period());
    for (j, o) in out.iter_mut().enumerate() {
        *o = if j == m {
            // limit of 1/(z − z') − 1/(z_α'(α − α')) as α' → α
            -zaa[m] / (2.0 * za[m] * za[m])
        } else {
            let d = (m + n - j) % n;
            kp(reduce(z[m] - z[j], p), p) - table[d] / za[j]
        };
    }
}

/// `K[z]f` for a complex density on the grid.
pub fn k_apply(iface: &Interface, f: &[C64]) -> Result<Vec<C64>> {
    let grid = iface.grid();
    if f.len() != grid.n() {
        return Err(Error::LengthMismatch { expected: grid.n(), got: f.len() });
    }
    check_separation(iface)?;
    let table = flat_cot_table(grid);
    let scale = grid.dx() / (2.0 * PI * I);
    Ok((0..grid.n())
        .into_par_iter()
        .map_init(
            || vec![C64::new(0.0, 0.0); grid.n()],
            |row, m| {
                k_row(iface, &table, m, row);
                scale * row.iter().zip(f).map(|(k, v)| k * v).sum::<C64>()
            },
        )
        .collect())
}

/// Dense quadrature matrix of `K[z]` (includes the `Δα/(2πi)` factor).
pub fn k_matrix(iface: &Interface) -> Result<DMatrix<C64>> {
    check_separation(iface)?;
    let grid = iface.grid();
    let n = grid.n();
    let table = flat_cot_table(grid);
    let scale = grid.dx() / (2.0 * PI * I);
    let mut mat = DMatrix::zeros(n, n);
    let mut row = vec![C64::new(0.0, 0.0); n];
    for m in 0..n {
        k_row(iface, &table, m, &mut row);
        for j in 0..n {
            mat[(m, j)] = scale * row[j];
        }
    }
    Ok(mat)
}

/// The smoothing operator `K[z]` applied to a real density.
pub fn smoothing_op_k(iface: &Interface, f: &RealField) -> Result<ComplexField> {
    let fc: Vec<C64> = f.values().iter().map(|&v| C64::new(v, 0.0)).collect();
    ComplexField::new(iface.grid(), k_apply(iface, &fc)?)
}

/// `Φ̄` of the Birkhoff–Rott velocity: `(1/2i) H(γ/z_α) + K[z]γ`.
pub fn br_conj(iface: &Interface, gamma: &[f64]) -> Result<Vec<C64>> {
    let grid = iface.grid();
    let ratio: Vec<C64> = gamma.iter().zip(iface.z_alpha()).map(|(g, za)| g / za).collect();
    let h = grid.hilbert_complex(&ratio);
    let gc: Vec<C64> = gamma.iter().map(|&g| C64::new(g, 0.0)).collect();
    let k = k_apply(iface, &gc)?;
    Ok(h.iter().zip(&k).map(|(h, k)| h / (2.0 * I) + k).collect())
}

/// `[H, h]f = H(hf) − hH(f)`.
pub fn commutator_h(h: &RealField, f: &RealField) -> Result<RealField> {
    let hf = h.mul(f)?;
    hf.hilbert().sub(&h.mul(&f.hilbert())?)
}

/// Complex version of [`commutator_h`].
pub fn commutator_h_complex(grid: &Grid, h: &[C64], f: &[C64]) -> Vec<C64> {
    let hf: Vec<C64> = h.iter().zip(f).map(|(a, b)| a * b).collect();
    let a = grid.hilbert_complex(&hf);
    let b = grid.hilbert_complex(f);
    a.iter().zip(h.iter().zip(&b)).map(|(a, (h, b))| a - h * b).collect()
}

/// Real circulant row of the grid Hilbert transform: `(Hf)_m = Σ_j c_{(m−j) mod N} f_j`.
pub(crate) fn hilbert_circulant(grid: &Grid) -> Vec<f64> {
    let mut e0 = vec![0.0; grid.n()];
    e0[0] = 1.0;
    grid.hilbert(&e0)
}
