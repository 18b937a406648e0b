use serde::{Deserialize, Serialize};

use super::characteristics::{band_range, Sign};
use super::phase::{build_phase, PhaseConfig, PhaseFunction, PhaseSlice};
use crate::error::{Error, Result};
use crate::linear::{apply_p, linear_solve, CoefficientField, Forcing, LinearConfig, LinearProblem, LINEAR_DT_CAP_FACTOR};
use crate::spectral::{sobolev_norm, ComplexField, Grid, PeriodicGrid, RealField, C64};

/// Default cap on the number of Neumann corrections.
pub const DEFAULT_NEUMANN_ORDER: usize = 8;
/// Contraction ratio at or above which the band is rejected.
pub const NEUMANN_RATIO_LIMIT: f64 = 0.9;
/// Relative residual required of the initial-data system.
pub const SYSTEM_TOLERANCE: f64 = 1e-8;

/// The two branches `φ^{j,±}` of one band, built for `ξ > 0`.
#[derive(Debug, Clone)]
pub struct PhasePair {
    pub coefficient: CoefficientField,
    pub plus: PhaseFunction,
    pub minus: PhaseFunction,
}

impl PhasePair {
    pub fn build(coefficient: &CoefficientField, j: i32, cfg: &PhaseConfig) -> Result<Self> {
        Ok(Self {
            coefficient: coefficient.clone(),
            plus: build_phase(coefficient, j, Sign::Plus, cfg)?,
            minus: build_phase(coefficient, j, Sign::Minus, cfg)?,
        })
    }

    pub fn j(&self) -> i32 {
        self.plus.j
    }

    pub fn horizon(&self) -> f64 {
        self.plus.horizon()
    }

    pub fn get(&self, sign: Sign) -> &PhaseFunction {
        match sign {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        }
    }
}

/// Grid modes with `|ξ|` inside the phase range: `(|ξ|, index of +|ξ|, index of −|ξ|)`.
fn band_modes(grid: &PeriodicGrid, j: i32) -> Vec<(f64, usize, usize)> {
    let (lo, hi) = band_range(j);
    let n = grid.n();
    (1..n / 2)
        .map(|k| (k as f64 * grid.dk(), k, n - k))
        .filter(|&(xi, _, _)| xi >= lo * (1.0 - 1e-12) && xi <= hi * (1.0 + 1e-12))
        .collect()
}

/// `(ϑ, ϑ_t, ϑ_tt)` of one branch at `|ξ|`, moved onto `target`.
fn columns(phase: &PhaseFunction, slice: &PhaseSlice, xi: f64, target: &PeriodicGrid) -> Result<[Vec<f64>; 3]> {
    let (start, w) = phase.xi_weights(xi);
    let na = phase.grid().n();
    let mut out = [vec![0.0; na], vec![0.0; na], vec![0.0; na]];
    for (k, wk) in w.iter().enumerate() {
        let rows = slice.row(start + k);
        for (o, r) in out.iter_mut().zip(rows) {
            for (a, b) in o.iter_mut().zip(r) {
                *a += wk * b;
            }
        }
    }
    if na == target.n() {
        return Ok(out);
    }
    let [a, b, c] = out;
    let g = phase.grid();
    Ok([g.resample(&a, target)?, g.resample(&b, target)?, g.resample(&c, target)?])
}

/// Phase branch used at wavenumber sign `s` for amplitude branch `σ`: negative frequencies
/// use `φ^σ(t, α, −|ξ|) = −φ^{−σ}(t, α, |ξ|)`.
fn branch(sigma: Sign, positive: bool) -> Sign {
    if positive {
        sigma
    } else {
        sigma.flip()
    }
}

/// `w, ∂_tw, ∂_t²w` of `Σ_± Σ_ξ e^{iφ^±(t,α,ξ)} f̂^±(ξ)` (real part) over the band modes.
fn synthesize(pair: &PhasePair, spectra: [&[C64]; 2], grid: &PeriodicGrid, t: f64) -> Result<[Vec<f64>; 3]> {
    let n = grid.n();
    let nodes = grid.nodes();
    let slices = [pair.plus.slice(t)?, pair.minus.slice(t)?];
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for (xi, kp, kn) in band_modes(grid, pair.j()) {
        let cols = [columns(&pair.plus, &slices[0], xi, grid)?, columns(&pair.minus, &slices[1], xi, grid)?];
        let w32 = xi.powf(1.5);
        for (si, sigma) in Sign::BOTH.into_iter().enumerate() {
            let sg = sigma.factor();
            for (k, positive) in [(kp, true), (kn, false)] {
                let c = spectra[si][k];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                let xk = if positive { xi } else { -xi };
                let [th, th_t, th_tt] = &cols[if branch(sigma, positive) == Sign::Plus { 0 } else { 1 }];
                for m in 0..n {
                    let ph = nodes[m] * xk + sg * w32 * (t + th[m]);
                    let e = c * C64::from_polar(1.0, ph);
                    let ft = sg * w32 * (1.0 + th_t[m]);
                    let ftt = sg * w32 * th_tt[m];
                    out[0][m] += e.re;
                    out[1][m] -= ft * e.im;
                    out[2][m] -= ftt * e.im + ft * ft * e.re;
                }
            }
        }
    }
    Ok(out)
}

fn project(grid: &PeriodicGrid, j: i32, spec: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); spec.len()];
    for (_, kp, kn) in band_modes(grid, j) {
        out[kp] = spec[kp];
        out[kn] = spec[kn];
    }
    out
}

/// Spectrum of `Π Op(φ_t^σ(0,α,ξ) ∓ |ξ|^{3/2}) f`, where `Π` keeps the band modes.
fn apply_correction(pair: &PhasePair, slice: [&PhaseSlice; 2], sigma: Sign, grid: &PeriodicGrid, f: &[C64]) -> Result<Vec<C64>> {
    let n = grid.n();
    let nodes = grid.nodes();
    let sg = sigma.factor();
    let mut acc = vec![C64::new(0.0, 0.0); n];
    for (xi, kp, kn) in band_modes(grid, pair.j()) {
        let w32 = xi.powf(1.5);
        for (k, positive) in [(kp, true), (kn, false)] {
            let c = f[k];
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let b = branch(sigma, positive);
            let phase = pair.get(b);
            let [_, th_t, _] = columns(phase, slice[if b == Sign::Plus { 0 } else { 1 }], xi, grid)?;
            let xk = if positive { xi } else { -xi };
            for m in 0..n {
                acc[m] += c * C64::from_polar(sg * w32 * th_t[m], nodes[m] * xk);
            }
        }
    }
    Ok(project(grid, pair.j(), &grid.forward_complex(&acc)))
}

/// `f^{j,±}` with `f⁺ + f⁻ = u₀ʲ`, `A₁⁺f⁺ + A₁⁻f⁻ = −iu₁ʲ`.
#[derive(Debug, Clone)]
pub struct DataComponents {
    pub plus: ComplexField,
    pub minus: ComplexField,
    /// Largest ratio of successive Neumann corrections (the first relative to the zeroth term).
    pub neumann_ratio: f64,
    pub iterations: usize,
    /// Relative residual of the 2×2 system.
    pub system_residual: f64,
}

impl DataComponents {
    fn spectra(&self) -> [Vec<C64>; 2] {
        [self.plus.spectrum(), self.minus.spectrum()]
    }
}

/// Solves the initial-data system by the Neumann series around `A₁^± ≈ ±|D|^{3/2}`,
/// with at most `order` corrections.
pub fn build_data_components(pair: &PhasePair, u0: &RealField, u1: &RealField, order: usize) -> Result<DataComponents> {
    let data = neumann_components(pair, u0, u1, order)?;
    if data.system_residual > SYSTEM_TOLERANCE {
        return Err(Error::SolverDivergence {
            solver: "initial-data Neumann series",
            iterations: data.iterations,
            residual: data.system_residual,
        });
    }
    Ok(data)
}

/// Leading term `M₀⁻¹(u₀ʲ, −iu₁ʲ)` of the Neumann series alone. The system residual is
/// reported, not enforced; replaying it measures the size of the dropped correction.
pub fn leading_order_components(pair: &PhasePair, u0: &RealField, u1: &RealField) -> Result<DataComponents> {
    neumann_components(pair, u0, u1, 0)
}

fn neumann_components(pair: &PhasePair, u0: &RealField, u1: &RealField, order: usize) -> Result<DataComponents> {
    let grid = pair.coefficient.grid();
    if **u0.grid() != **grid || **u1.grid() != **grid {
        return Err(Error::GridMismatch);
    }
    let j = pair.j();
    let g: &PeriodicGrid = grid;
    let ws = g.wavenumbers();
    let b1 = project(g, j, u0.spectrum());
    let b2: Vec<C64> = project(g, j, u1.spectrum()).iter().map(|c| c * C64::new(0.0, -1.0)).collect();
    let inv32 = |k: usize| if ws[k] == 0.0 { 0.0 } else { ws[k].abs().powf(-1.5) };
    let norm = |v: &[C64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let m0_inv = |c1: &[C64], c2: &[C64]| -> [Vec<C64>; 2] {
        let p = (0..c1.len()).map(|k| 0.5 * (c1[k] + c2[k] * inv32(k))).collect();
        let m = (0..c1.len()).map(|k| 0.5 * (c1[k] - c2[k] * inv32(k))).collect();
        [p, m]
    };
    let s0 = [pair.plus.slice(0.0)?, pair.minus.slice(0.0)?];
    let slices = [&s0[0], &s0[1]];
    let correction = |f: &[Vec<C64>; 2]| -> Result<Vec<C64>> {
        let a = apply_correction(pair, slices, Sign::Plus, g, &f[0])?;
        let b = apply_correction(pair, slices, Sign::Minus, g, &f[1])?;
        Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect())
    };
    let mut f = m0_inv(&b1, &b2);
    let mut prev = norm(&f[0]) + norm(&f[1]);
    let mut ratio: f64 = 0.0;
    let mut iterations = 0;
    let scale = prev.max(f64::MIN_POSITIVE);
    for _ in 0..order {
        let corr = correction(&f)?;
        let rhs: Vec<C64> = b2.iter().zip(&corr).map(|(x, y)| x - y).collect();
        let next = m0_inv(&b1, &rhs);
        let delta = norm(&sub(&next[0], &f[0])) + norm(&sub(&next[1], &f[1]));
        iterations += 1;
        if prev > 1e-14 * scale {
            ratio = ratio.max(delta / prev);
        }
        if ratio >= NEUMANN_RATIO_LIMIT {
            return Err(Error::BandTooLow { ratio });
        }
        f = next;
        prev = delta;
        if delta <= 1e-14 * scale {
            break;
        }
    }
    // residual of the full system
    let corr = correction(&f)?;
    let r1: Vec<C64> = (0..b1.len()).map(|k| f[0][k] + f[1][k] - b1[k]).collect();
    let r2: Vec<C64> = (0..b1.len())
        .map(|k| {
            let a = ws[k].abs().powf(1.5);
            (a * (f[0][k] - f[1][k]) + corr[k] - b2[k]) * inv32(k)
        })
        .collect();
    let scaled_b2: Vec<C64> = (0..b2.len()).map(|k| b2[k] * inv32(k)).collect();
    let denom = (norm(&b1) + norm(&scaled_b2)).max(f64::MIN_POSITIVE);
    let system_residual = (norm(&r1) + norm(&r2)) / denom;
    let field = |s: &[C64]| ComplexField::new(grid, g.inverse_complex(s));
    Ok(DataComponents { plus: field(&f[0])?, minus: field(&f[1])?, neumann_ratio: ratio, iterations, system_residual })
}

fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Leading-order parametrix `w^j` of one band.
#[derive(Debug, Clone)]
pub struct Parametrix {
    pub pair: PhasePair,
    pub data: DataComponents,
    pub u0: RealField,
    pub u1: RealField,
    spectra: [Vec<C64>; 2],
}

impl Parametrix {
    /// `u0`, `u1` should already be localized to band `j` of the pair.
    pub fn new(pair: PhasePair, u0: RealField, u1: RealField) -> Result<Self> {
        let data = build_data_components(&pair, &u0, &u1, DEFAULT_NEUMANN_ORDER)?;
        Self::with_data(pair, data, u0, u1)
    }

    /// Parametrix with precomputed data components on the grid of `u0`.
    pub fn with_data(pair: PhasePair, data: DataComponents, u0: RealField, u1: RealField) -> Result<Self> {
        if **data.plus.grid() != **u0.grid() || **data.minus.grid() != **u0.grid() || **u1.grid() != **u0.grid() {
            return Err(Error::GridMismatch);
        }
        let spectra = data.spectra();
        Ok(Self { pair, data, u0, u1, spectra })
    }

    pub fn grid(&self) -> &Grid {
        self.u0.grid()
    }

    pub fn horizon(&self) -> f64 {
        self.pair.horizon()
    }

    /// `‖u₀ʲ‖_{H¹} + ‖u₁ʲ‖_{H^{−1/2}}`.
    pub fn data_norm(&self) -> f64 {
        sobolev_norm(&self.u0, 1.0) + sobolev_norm(&self.u1, -0.5)
    }

    /// `(w, ∂_tw, ∂_t²w)` at time `t`; time derivatives act on the phases exactly.
    pub fn evaluate_jet(&self, t: f64) -> Result<[RealField; 3]> {
        let [a, b, c] = synthesize(&self.pair, [&self.spectra[0], &self.spectra[1]], self.grid(), t)?;
        let g = self.grid();
        Ok([RealField::new(g, a)?, RealField::new(g, b)?, RealField::new(g, c)?])
    }
}

/// `w(t, ·)` on the data grid.
pub fn evaluate_parametrix(p: &Parametrix, t: f64) -> Result<RealField> {
    let [a, _, _] = synthesize(&p.pair, [&p.spectra[0], &p.spectra[1]], p.grid(), t)?;
    RealField::new(p.grid(), a)
}

/// Fraction of `Σ|ŵ|²` outside `2^{j−2} ≤ |ξ| ≤ 2^{j+2}`.
pub fn band_leakage(w: &RealField, j: i32) -> f64 {
    let (lo, hi) = band_range(j);
    let (mut inside, mut total) = (0.0, 0.0);
    for (c, &xi) in w.spectrum().iter().zip(w.grid().wavenumbers()) {
        let e = c.norm_sqr();
        total += e;
        if xi.abs() >= lo && xi.abs() <= hi {
            inside += e;
        }
    }
    if total > 0.0 {
        (total - inside) / total
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSeries {
    pub times: Vec<f64>,
    /// `‖Pw(t)‖_{L²}`.
    pub norms: Vec<f64>,
    /// `‖u₀ʲ‖_{H¹} + ‖u₁ʲ‖_{H^{−1/2}}`.
    pub data_norm: f64,
    /// `max_t ‖Pw(t)‖ / data_norm`.
    pub max_ratio: f64,
}

/// `‖Pw(t)‖_{L²}` at the given times.
#[allow(non_snake_case)]
pub fn residual_E(p: &Parametrix, times: &[f64]) -> Result<ResidualSeries> {
    let mut norms = Vec::with_capacity(times.len());
    for &t in times {
        let [w, wt, wtt] = p.evaluate_jet(t)?;
        norms.push(apply_p(&p.pair.coefficient, t, &w, &wt, &wtt)?.l2_norm());
    }
    let data_norm = p.data_norm();
    let max_ratio = norms.iter().fold(0.0f64, |m, v| m.max(*v)) / data_norm.max(f64::MIN_POSITIVE);
    Ok(ResidualSeries { times: times.to_vec(), norms, data_norm, max_ratio })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub times: Vec<f64>,
    /// `‖w(t) − U(t)‖_{L²}`.
    pub errors: Vec<f64>,
    pub data_norm: f64,
    /// `sup_t ‖w − U‖_{L²} / data_norm`.
    pub normalized: f64,
}

/// Compares the parametrix with `linear_solve` of the same band data at `samples + 1` uniform
/// times of the window.
pub fn parametrix_fidelity(p: &Parametrix, samples: usize) -> Result<FidelityReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample interval".into()));
    }
    let h = p.horizon();
    let cap = LINEAR_DT_CAP_FACTOR * p.grid().dx().powf(1.5);
    let per = ((h / samples as f64) / cap).ceil().max(1.0) as usize;
    let dt = h / (samples * per) as f64;
    let problem = LinearProblem::new(p.pair.coefficient.clone(), p.u0.clone(), p.u1.clone(), Forcing::Zero, h)?;
    let mut cfg = LinearConfig::new(dt * (1.0 + 1e-9));
    cfg.snapshot_stride = per;
    cfg.residual = false;
    let tr = linear_solve(&problem, &cfg)?;
    if let Some(e) = tr.failure {
        return Err(e);
    }
    let mut errors = Vec::with_capacity(tr.times.len());
    for (t, u) in tr.times.iter().zip(&tr.u) {
        let w = evaluate_parametrix(p, t.min(h))?;
        errors.push(w.sub(u)?.l2_norm());
    }
    let data_norm = p.data_norm();
    let normalized = errors.iter().fold(0.0f64, |m, v| m.max(*v)) / data_norm.max(f64::MIN_POSITIVE);
    Ok(FidelityReport { times: tr.times, errors, data_norm, normalized })
}
