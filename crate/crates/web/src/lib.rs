//! Browser bindings for three operations of the lab: admissibility diagram
//! data, pair checks and a free-flow wave packet. Every export returns JSON.
//!
//! The plain `*_json` functions hold the logic so they can be tested natively;
//! the `#[wasm_bindgen]` wrappers only convert errors.

use std::f64::consts::PI;

use capwave::evolution::{dt_cap, energy_k, evolve, initialize, EvolveConfig, ModelVariant};
use capwave::spectral::{PeriodicGrid, RealField};
use capwave::strichartz::{admissibility_diagram, AdmissiblePair, DiagramKind};
use capwave::vortex_sheet::Physics;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest grid the page may request; the free flow runs on the main thread.
pub const MAX_POINTS: usize = 1024;

#[derive(Serialize)]
struct LineOut {
    label: String,
    relation: String,
    p_intercept: String,
    q_intercept: String,
    p_value: f64,
    q_value: f64,
}

#[derive(Serialize)]
struct PairOut {
    p: f64,
    /// `None` at the endpoint `q = ∞`.
    q: Option<f64>,
    inv_p: f64,
    inv_q: f64,
    defect: f64,
    endpoint: bool,
}

#[derive(Serialize)]
struct Frame {
    t: f64,
    u: Vec<f64>,
    /// Sum of the `k = 1` dispersive energy terms at this frame.
    energy: f64,
}

#[derive(Serialize)]
struct FlowOut {
    x: Vec<f64>,
    dt: f64,
    steps: usize,
    frames: Vec<Frame>,
    energy_drift: f64,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Lines of one admissibility diagram (`fig1a`, `fig1` or `fig3`).
pub fn diagram_json(figure: &str) -> Result<String, String> {
    let kind: DiagramKind = figure.parse().map_err(err)?;
    let lines: Vec<LineOut> = admissibility_diagram(kind)
        .into_iter()
        .map(|l| LineOut {
            relation: l.relation(),
            p_intercept: l.p_intercept().to_string(),
            q_intercept: l.q_intercept().to_string(),
            p_value: l.p_intercept().value(),
            q_value: l.q_intercept().value(),
            label: l.label,
        })
        .collect();
    serde_json::to_string(&lines).map_err(err)
}

/// Checks `(p, q)`; a non-positive or non-finite `q` means "derive q from p".
pub fn pair_json(p: f64, q: f64) -> Result<String, String> {
    let pair = if q.is_finite() && q > 0.0 { AdmissiblePair::new(p, q) } else { AdmissiblePair::from_p(p) }.map_err(err)?;
    let out = PairOut {
        p: pair.p,
        q: (!pair.is_endpoint()).then_some(pair.q),
        inv_p: 1.0 / pair.p,
        inv_q: if pair.is_endpoint() { 0.0 } else { 1.0 / pair.q },
        defect: pair.defect(),
        endpoint: pair.is_endpoint(),
    };
    serde_json::to_string(&out).map_err(err)
}

/// Free flow of a Gaussian packet at rest on `[0, 2π)` with `n` points.
pub fn free_flow_json(n: usize, amplitude: f64, width: f64, wavenumber: f64, t_final: f64, frames: usize) -> Result<String, String> {
    if n > MAX_POINTS {
        return Err(format!("at most {MAX_POINTS} grid points"));
    }
    if !(width > 0.0) || !(t_final > 0.0) || frames == 0 {
        return Err("width, t_final and frames must be positive".into());
    }
    let grid = PeriodicGrid::new(n, 2.0 * PI).map_err(err)?;
    let u0 = RealField::from_fn(&grid, |x| {
        let d = (x - PI) / width;
        amplitude * (-d * d).exp() * (wavenumber * x).cos()
    });
    let u1 = RealField::zeros(&grid);
    let physics = Physics::default();
    let (state, _) = initialize(&u0, &u1, physics, ModelVariant::LinearFree).map_err(err)?;
    let dt = 0.9 * dt_cap(&state);
    let steps = (t_final / dt).ceil() as usize;
    let mut cfg = EvolveConfig::new(t_final, dt, ModelVariant::LinearFree);
    cfg.snapshot_stride = (steps / frames).max(1);
    let tr = evolve(&state, &cfg, &mut []).map_err(err)?;
    if let Some(f) = tr.failure {
        return Err(f.to_string());
    }
    let mut out = Vec::with_capacity(tr.snapshots.len());
    for s in tr.snapshots {
        let u = RealField::new(&grid, s.u).map_err(err)?;
        let v = RealField::new(&grid, s.v).map_err(err)?;
        let energy = energy_k(&u, &v, 1, physics).map_err(err)?;
        out.push(Frame { t: s.t, u: u.values().to_vec(), energy });
    }
    let e0 = out[0].energy;
    let energy_drift = out.iter().map(|f| (f.energy - e0).abs()).fold(0.0, f64::max) / e0.max(f64::MIN_POSITIVE);
    let x = (0..n).map(|i| i as f64 * grid.dx()).collect();
    serde_json::to_string(&FlowOut { x, dt: tr.dt, steps: tr.steps, frames: out, energy_drift }).map_err(err)
}

#[wasm_bindgen]
pub fn diagram(figure: &str) -> Result<String, JsValue> {
    diagram_json(figure).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn pair(p: f64, q: f64) -> Result<String, JsValue> {
    pair_json(p, q).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn free_flow(n: usize, amplitude: f64, width: f64, wavenumber: f64, t_final: f64, frames: usize) -> Result<String, JsValue> {
    free_flow_json(n, amplitude, width, wavenumber, t_final, frames).map_err(|e| JsValue::from_str(&e))
}
