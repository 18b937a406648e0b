use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::characteristics::{
    band_range, default_launch_points, horizon, solve_characteristics_with, CharacteristicFlow, CoefficientTable,
    HamiltonJacobiProblem, Sign, DEFAULT_T_SCALE, MIN_STEPS,
};
use crate::error::{Error, Result};
use crate::linear::CoefficientField;
use crate::spectral::{bump, Grid, GridSpec, PeriodicGrid};
use crate::util::{d1_fourth_order, fd_weights, lagrange_nonuniform, stencil_start};

/// Allowed mismatch of `ϑ̃` between the two reference characteristics.
pub const CONSTANT_TOLERANCE: f64 = 1e-8;
/// Nodes in the interpolation stencil from characteristic feet to the grid.
const FEET_STENCIL: usize = 8;
/// Nodes in the `log ξ` interpolation stencil.
const XI_STENCIL: usize = 8;
/// Nodes in the time interpolation stencil.
const T_STENCIL: usize = 6;

/// `χ₂(r)`: 1 on `[1/2, 2]`, supported in `[1/4, 4]`.
pub fn chi2(r: f64) -> f64 {
    bump(r, 0.25, 0.5, 2.0, 4.0)
}

/// `χ̃₂(r)`: 1 on `[1/4, 4]` (the support of `χ₂`), supported in `[2^{−1/4}/4, 2^{1/4}·4]`.
pub fn chi2_tilde(r: f64) -> f64 {
    let e = 2f64.powf(0.25);
    bump(r, 0.25 / e, 0.25, 4.0, 4.0 * e)
}

/// `ϑ(t, α)` of one frequency, on the uniform phase grid at every time step.
#[derive(Debug, Clone)]
pub struct PhaseColumn {
    pub xi: f64,
    pub theta: Vec<Vec<f64>>,
    /// Sup over the grid and window of the eikonal residual, in units of `ξ^{3/2}`.
    pub residual: f64,
    /// Mismatch of the recovered `ϑ̃` against the action at the second reference characteristic.
    pub constant_mismatch: f64,
}

/// Interpolates `η` from the characteristic feet onto the uniform grid.
fn feet_to_grid(x: &[f64], eta: &[f64], length: f64, targets: &[f64]) -> Vec<f64> {
    let n = x.len();
    let shift = (x[0] / length).floor() * length;
    let mut xs = Vec::with_capacity(3 * n);
    let mut ys = Vec::with_capacity(3 * n);
    for r in [-1.0, 0.0, 1.0] {
        for (xm, em) in x.iter().zip(eta) {
            xs.push(xm - shift + r * length);
            ys.push(*em);
        }
    }
    targets
        .iter()
        .map(|&xt| {
            let pos = xs.partition_point(|&v| v < xt);
            let start = pos.saturating_sub(FEET_STENCIL / 2).min(xs.len() - FEET_STENCIL);
            lagrange_nonuniform(&xs[start..start + FEET_STENCIL], &ys[start..start + FEET_STENCIL], xt)
        })
        .collect()
}

/// Recovers `ϑ(t, α) = ϑ̃(t, 2^{−j/2}α)` from the flow: `ϑ_α = 2^{−j/2}η(t, β(α))`, spectral
/// antiderivative, and the action along the `β = 0` characteristic for the constant.
/// The action at `β` one third of the way along is the cross-check.
pub fn assemble_phase(flow: &CharacteristicFlow, problem: &HamiltonJacobiProblem, tolerance: f64) -> Result<PhaseColumn> {
    let nb = flow.beta.len();
    let g = PeriodicGrid::new(nb, problem.coefficient.grid().length())?;
    let table = CoefficientTable::new(&problem.coefficient, flow.dt, flow.steps)?;
    assemble_with(flow, &g, &table, tolerance)
}

fn assemble_with(
    flow: &CharacteristicFlow,
    g: &PeriodicGrid,
    table: &CoefficientTable,
    tolerance: f64,
) -> Result<PhaseColumn> {
    let r = 2f64.powf(0.5 * flow.j as f64);
    let length = g.length();
    let nodes = g.nodes();
    let m2 = flow.beta.len() / 3;
    let mut theta = Vec::with_capacity(flow.steps + 1);
    let mut mismatch: f64 = 0.0;
    for n in 0..=flow.steps {
        let x: Vec<f64> = flow.alpha[n].iter().map(|a| a * r).collect();
        let eta = feet_to_grid(&x, &flow.eta[n], length, &nodes);
        let d: Vec<f64> = eta.iter().map(|e| e / r).collect();
        let anti = g.antiderivative_projected(&d);
        let at = g.interpolate(&anti, &[x[0], x[m2]]);
        let c = flow.action[n][0] - at[0];
        mismatch = mismatch.max((at[1] + c - flow.action[n][m2]).abs());
        theta.push(anti.iter().map(|v| v + c).collect::<Vec<f64>>());
    }
    if mismatch > CONSTANT_TOLERANCE {
        return Err(Error::PhaseAssembly { residual: mismatch, tolerance: CONSTANT_TOLERANCE });
    }
    let residual = eikonal_residual(&theta, flow, g, table);
    if !(residual <= tolerance) {
        return Err(Error::PhaseAssembly { residual, tolerance });
    }
    Ok(PhaseColumn { xi: flow.xi, theta, residual, constant_mismatch: mismatch })
}

/// `sup |ϑ_t + σξ^{−1/2}V(1 + σξ^{1/2}ϑ_α) − (1 + σξ^{1/2}ϑ_α)^{3/2} + 1|`, which is the residual of
/// `φ_t = −Vφ_α ± φ_α^{3/2}` divided by `ξ^{3/2}`. `ϑ_t` by fourth-order differences in time.
fn eikonal_residual(theta: &[Vec<f64>], flow: &CharacteristicFlow, g: &PeriodicGrid, table: &CoefficientTable) -> f64 {
    let sigma = flow.sign.factor();
    let sx = flow.xi.sqrt();
    let na = g.n();
    let nt = theta.len();
    let nodes = g.nodes();
    let mut worst: f64 = 0.0;
    let mut column = vec![0.0; nt];
    let derivs: Vec<Vec<f64>> = theta.iter().map(|th| g.deriv(th, 1)).collect();
    for i in 0..na {
        for (c, th) in column.iter_mut().zip(theta) {
            *c = th[i];
        }
        for n in 0..nt {
            let th_t = d1_fourth_order(&column, flow.dt, n);
            let p = 1.0 + sigma * sx * derivs[n][i];
            let (v, _, _) = table.eval(2 * n, nodes[i]);
            let rhs = -sigma * v / sx * p + p.max(0.0).powf(1.5) - 1.0;
            worst = worst.max((th_t - rhs).abs());
        }
    }
    worst
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub t_scale: f64,
    pub steps: usize,
    /// Phase tensor nodes per octave of `ξ` (log-uniform).
    pub xi_per_octave: usize,
    /// Launch points; `None` picks spacing ≤ 0.1.
    pub launch_points: Option<usize>,
    /// Eikonal residual tolerance.
    pub tolerance: f64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self { t_scale: DEFAULT_T_SCALE, steps: MIN_STEPS, xi_per_octave: 16, launch_points: None, tolerance: 1e-6 }
    }
}

/// `ϑ^{j,σ}(t, α, ξ)` on a tensor grid: uniform in `t` over the window, uniform in `α` over the
/// period, log-uniform in `ξ` over `[2^{j−2}, 2^{j+2}]`. Layout `[ξ][t][α]`.
#[derive(Debug, Clone)]
pub struct PhaseFunction {
    pub j: i32,
    pub sign: Sign,
    pub t_scale: f64,
    grid: Grid,
    dt: f64,
    steps: usize,
    xis: Vec<f64>,
    theta: Vec<f64>,
    pub residual: f64,
    pub constant_mismatch: f64,
    pub jacobian_range: (f64, f64),
}

/// Builds the phase of band `j` and branch `sign` for the coefficient.
pub fn build_phase(coefficient: &CoefficientField, j: i32, sign: Sign, cfg: &PhaseConfig) -> Result<PhaseFunction> {
    if cfg.xi_per_octave < 2 {
        return Err(Error::InvalidInput("need at least two ξ nodes per octave".into()));
    }
    let (lo, _) = band_range(j);
    let nxi = 4 * cfg.xi_per_octave + 1;
    let xis: Vec<f64> = (0..nxi).map(|i| lo * 2f64.powf(i as f64 / cfg.xi_per_octave as f64)).collect();
    let launch = cfg.launch_points.unwrap_or_else(|| default_launch_points(coefficient.grid()));
    let mut template = HamiltonJacobiProblem::new(coefficient.clone(), j, sign, xis[0], cfg.t_scale)?;
    template.steps = cfg.steps;
    template.launch_points = launch;
    let table = CoefficientTable::new(coefficient, template.dt(), cfg.steps)?;
    let g = PeriodicGrid::new(launch, coefficient.grid().length())?;
    let columns = xis
        .par_iter()
        .map(|&xi| {
            let mut p = template.clone();
            p.xi = xi;
            let flow = solve_characteristics_with(&p, &table)?;
            let col = assemble_with(&flow, &g, &table, cfg.tolerance)?;
            Ok((col, flow.min_jacobian, flow.max_jacobian))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut theta = Vec::with_capacity(nxi * (cfg.steps + 1) * launch);
    let (mut residual, mut mismatch, mut jmin, mut jmax) = (0.0f64, 0.0f64, f64::INFINITY, 0.0f64);
    for (col, a, b) in columns {
        residual = residual.max(col.residual);
        mismatch = mismatch.max(col.constant_mismatch);
        jmin = jmin.min(a);
        jmax = jmax.max(b);
        for row in col.theta {
            theta.extend(row);
        }
    }
    Ok(PhaseFunction {
        j,
        sign,
        t_scale: cfg.t_scale,
        grid: g,
        dt: template.dt(),
        steps: cfg.steps,
        xis,
        theta,
        residual,
        constant_mismatch: mismatch,
        jacobian_range: (jmin, jmax),
    })
}

/// `ϑ`, `ϑ_t`, `ϑ_tt` at one time on the `(ξ, α)` nodes, layout `[ξ][α]`.
#[derive(Debug, Clone)]
pub struct PhaseSlice {
    pub t: f64,
    pub value: Vec<f64>,
    pub dt: Vec<f64>,
    pub dtt: Vec<f64>,
    na: usize,
}

impl PhaseSlice {
    pub fn row(&self, ix: usize) -> [&[f64]; 3] {
        let r = ix * self.na..(ix + 1) * self.na;
        [&self.value[r.clone()], &self.dt[r.clone()], &self.dtt[r]]
    }
}

impl PhaseFunction {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn xis(&self) -> &[f64] {
        &self.xis
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|n| n as f64 * self.dt).collect()
    }

    pub fn horizon(&self) -> f64 {
        horizon(self.j, self.t_scale)
    }

    pub fn xi_range(&self) -> (f64, f64) {
        (self.xis[0], *self.xis.last().expect("nonempty"))
    }

    /// `ϑ` at tensor node `(ξ index, time index)` over the `α` grid.
    pub fn node_row(&self, ix: usize, n: usize) -> &[f64] {
        let na = self.grid.n();
        let start = (ix * (self.steps + 1) + n) * na;
        &self.theta[start..start + na]
    }

    pub fn theta_raw(&self) -> &[f64] {
        &self.theta
    }

    /// Time interpolation of the tensor to `t ∈ [0, horizon]`, with first and second time derivatives.
    pub fn slice(&self, t: f64) -> Result<PhaseSlice> {
        let h = self.horizon();
        if !(t >= -1e-12 * h && t <= h * (1.0 + 1e-12)) {
            return Err(Error::TimeOutOfRange { t, t0: 0.0, t1: h });
        }
        let nt = self.steps + 1;
        let start = stencil_start(nt, 0.0, self.dt, t, T_STENCIL);
        let ts: Vec<f64> = (start..start + T_STENCIL).map(|n| n as f64 * self.dt).collect();
        let w = fd_weights(t, &ts, 2);
        let na = self.grid.n();
        let nxi = self.xis.len();
        let mut out = [vec![0.0; nxi * na], vec![0.0; nxi * na], vec![0.0; nxi * na]];
        for ix in 0..nxi {
            for k in 0..T_STENCIL {
                let row = self.node_row(ix, start + k);
                for (d, o) in out.iter_mut().enumerate() {
                    let wk = w[d][k];
                    for (a, b) in o[ix * na..(ix + 1) * na].iter_mut().zip(row) {
                        *a += wk * b;
                    }
                }
            }
        }
        let [value, dt, dtt] = out;
        Ok(PhaseSlice { t, value, dt, dtt, na })
    }

    /// Weights of the `log ξ` interpolation stencil at `ξ` (clamped to the tensor range).
    pub fn xi_weights(&self, xi: f64) -> (usize, Vec<f64>) {
        let per = (self.xis.len() - 1) as f64 / 4.0;
        let s = (xi / self.xis[0]).log2() * per;
        let start = stencil_start(self.xis.len(), 0.0, 1.0, s, XI_STENCIL);
        let nodes: Vec<f64> = (start..start + XI_STENCIL).map(|i| i as f64).collect();
        (start, fd_weights(s, &nodes, 0).swap_remove(0))
    }
}

/// Sidecar describing an exported phase tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSidecar {
    pub format: String,
    /// `[n_xi, n_t, n_alpha]`, row-major.
    pub shape: [usize; 3],
    pub band: i32,
    pub sign: Sign,
    pub t_scale: f64,
    pub horizon: f64,
    pub dt: f64,
    pub grid: GridSpec,
    pub xis: Vec<f64>,
    pub residual: f64,
    pub constant_mismatch: f64,
    pub jacobian_range: (f64, f64),
}

const PHASE_FORMAT: &str = "f64-le";

/// Writes `<stem>.bin` (little-endian `f64`, layout `[ξ][t][α]`) and `<stem>.json`.
pub fn export_phase(phase: &PhaseFunction, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let bin = dir.join(format!("{stem}.bin"));
    let json = dir.join(format!("{stem}.json"));
    let bytes: Vec<u8> = phase.theta.iter().flat_map(|v| v.to_le_bytes()).collect();
    write_atomic(&bin, &bytes)?;
    let side = PhaseSidecar {
        format: PHASE_FORMAT.into(),
        shape: [phase.xis.len(), phase.steps + 1, phase.grid.n()],
        band: phase.j,
        sign: phase.sign,
        t_scale: phase.t_scale,
        horizon: phase.horizon(),
        dt: phase.dt,
        grid: phase.grid.spec(),
        xis: phase.xis.clone(),
        residual: phase.residual,
        constant_mismatch: phase.constant_mismatch,
        jacobian_range: phase.jacobian_range,
    };
    let text = serde_json::to_string_pretty(&side).map_err(|e| Error::Io(e.to_string()))?;
    write_atomic(&json, text.as_bytes())?;
    Ok((bin, json))
}

/// Reads a tensor written by [`export_phase`] from its sidecar path.
pub fn import_phase(json: &Path) -> Result<PhaseFunction> {
    let text = std::fs::read_to_string(json)?;
    let side: PhaseSidecar = serde_json::from_str(&text).map_err(|e| Error::InvalidInput(e.to_string()))?;
    if side.format != PHASE_FORMAT {
        return Err(Error::InvalidInput(format!("unknown tensor format {}", side.format)));
    }
    let bytes = std::fs::read(json.with_extension("bin"))?;
    let [nxi, nt, na] = side.shape;
    if bytes.len() != 8 * nxi * nt * na || side.xis.len() != nxi || side.grid.n != na || nt < 2 {
        return Err(Error::InvalidInput("phase tensor does not match its sidecar".into()));
    }
    let theta = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok(PhaseFunction {
        j: side.band,
        sign: side.sign,
        t_scale: side.t_scale,
        grid: side.grid.build()?,
        dt: side.dt,
        steps: nt - 1,
        xis: side.xis,
        theta,
        residual: side.residual,
        constant_mismatch: side.constant_mismatch,
        jacobian_range: side.jacobian_range,
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
