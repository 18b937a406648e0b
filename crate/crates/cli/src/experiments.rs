use std::collections::BTreeMap;
use std::path::Path;

use capwave::evolution::{coupling_terms, energy_k, energy_report, evolve, initialize, EvolveConfig, Trajectory, WaveState};
use capwave::linear::{linear_energy_audit, linear_solve, LinearConfig, LinearProblem};
use capwave::parametrix::{
    band_leakage, build_phase, evaluate_parametrix, kernel_probe, parametrix_fidelity, prefactor_fit, residual_E, Parametrix,
    PhasePair,
};
use capwave::spectral::{Grid, RealField};
use capwave::strichartz::{admissibility_diagram, band_data, scaling_diagnostics, smoothing_sweep, strichartz_band_sweep};
use capwave::util::fit_loglog;
use capwave::vortex_sheet::Physics;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::*;
use crate::error::CliError;
use crate::output::{Cell, Table};
use crate::plot::Plot;

/// Everything a run produced. Filled incrementally so a failed run keeps its partial results.
#[derive(Debug, Default)]
pub struct Outcome {
    pub observables: BTreeMap<String, f64>,
    pub tables: Vec<Table>,
    pub plots: Vec<Plot>,
    pub details: BTreeMap<String, Value>,
}

impl Outcome {
    fn set(&mut self, name: impl Into<String>, value: f64) {
        self.observables.insert(name.into(), value);
    }
}

pub struct Context<'a> {
    pub grid: Grid,
    pub physics: Physics,
    pub seed: u64,
    pub base: &'a Path,
}

impl Context<'_> {
    fn data(&self, u0: &DataSpec, u1: &DataSpec) -> Result<(RealField, RealField), CliError> {
        Ok((u0.build(&self.grid, self.seed, 0, self.base)?, u1.build(&self.grid, self.seed, 1, self.base)?))
    }
}

/// `p` as it appears in observable names: `5`, `5.5`.
fn p_key(p: f64) -> String {
    format!("{p}")
}

fn band_key(j: i32) -> String {
    if j < 0 {
        format!("m{}", -j)
    } else {
        j.to_string()
    }
}

pub fn run(experiment: &Experiment, ctx: &Context, out: &mut Outcome) -> Result<(), CliError> {
    match experiment {
        Experiment::Simulate(e) => simulate(e, ctx, out),
        Experiment::Linear(e) => linear(e, ctx, out),
        Experiment::Parametrix(e) => parametrix(e, ctx, out),
        Experiment::Dispersion(e) => dispersion(e, ctx, out),
        Experiment::Strichartz(e) => strichartz(e, ctx, out),
        Experiment::Smoothing(e) => smoothing(e, ctx, out),
        Experiment::Energy(e) => energy(e, ctx, out),
        Experiment::Diagram(e) => diagram(e, out),
    }
}

fn max_relative_drift(values: &[f64]) -> f64 {
    let e0 = values.first().copied().unwrap_or(0.0);
    if e0 == 0.0 {
        return 0.0;
    }
    values.iter().map(|e| (e - e0).abs() / e0.abs()).fold(0.0, f64::max)
}

fn l2_diff(a: &RealField, b: &RealField) -> Result<f64, CliError> {
    Ok(a.sub(b)?.l2_norm())
}

fn reversal_error(tr: &Trajectory, start: &WaveState, t_final: f64, dt: f64) -> Result<f64, CliError> {
    let back = evolve(&tr.final_state, &EvolveConfig::new(-t_final, dt, tr.variant), &mut [])?;
    if let Some(e) = back.failure {
        return Err(e.into());
    }
    let s = &back.final_state;
    Ok(l2_diff(&s.u, &start.u)?.max(l2_diff(&s.v, &start.v)?).max(l2_diff(&s.theta, &start.theta)?))
}

fn energy_table(energy: &[(f64, f64)]) -> Table {
    let mut t = Table::new("energy", &["t", "energy"]);
    for &(time, e) in energy {
        t.push(vec![time.into(), e.into()]);
    }
    t
}

fn energy_plot(energy: &[(f64, f64)], label: &str) -> Plot {
    let mut p = Plot::new("energy", "energy history", "t", label);
    p.add(label, energy.to_vec());
    p
}

/// `Σ_{k=1}^s 𝓔^k` at every snapshot; conserved by the free flow.
fn dispersive_energies(tr: &Trajectory, s: u32, ctx: &Context) -> Result<Vec<f64>, CliError> {
    tr.snapshots
        .iter()
        .map(|snap| {
            let u = RealField::new(&ctx.grid, snap.u.clone())?;
            let v = RealField::new(&ctx.grid, snap.v.clone())?;
            (1..=s).map(|k| Ok(energy_k(&u, &v, k, ctx.physics)?)).sum()
        })
        .collect()
}

fn simulate(e: &Simulate, ctx: &Context, out: &mut Outcome) -> Result<(), CliError> {
    let (u0, u1) = ctx.data(&e.u0, &e.u1)?;
    let (state, init) = initialize(&u0, &u1, ctx.physics, e.variant)?;
    out.set("init_residual", init.residual);
    out.details.insert("init".into(), json!({"iterations": init.iterations, "residual": init.residual, "mean_mismatch": init.mean_mismatch}));
    let mut cfg = EvolveConfig::new(e.t_final, e.dt, e.variant);
    cfg.snapshot_stride = e.snapshot_stride;
    cfg.energy_order = Some(e.energy_order);
    let tr = evolve(&state, &cfg, &mut [])?;

    let mut snaps = Table::new("snapshots", &["t", "u_l2", "v_l2", "theta_l2", "u_max"]);
    let dx = ctx.grid.dx();
    let l2 = |v: &[f64]| (dx * v.iter().map(|x| x * x).sum::<f64>()).sqrt();
    for s in &tr.snapshots {
        let u_max = s.u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        snaps.push(vec![s.t.into(), l2(&s.u).into(), l2(&s.v).into(), l2(&s.theta).into(), u_max.into()]);
    }
    out.tables.push(snaps);
    out.tables.push(energy_table(&tr.energy));
    out.plots.push(energy_plot(&tr.energy, &format!("energy of order {}", e.energy_order)));
    let energies: Vec<f64> = tr.energy.iter().map(|x| x.1).collect();
    out.set("steps", tr.steps as f64);
    out.set("dt", tr.dt);
    out.set("energy_drift", max_relative_drift(&energies));
    if let Some(g) = &tr.gronwall {
        out.set("gronwall_c", g.c);
    }
    out.set("dispersive_energy_drift", max_relative_drift(&dispersive_energies(&tr, e.energy_order, ctx)?));
    let last = &tr.final_state;
    out.set("final_time", last.t);
    out.set("final_u_l2", last.u.l2_norm());
    if let Some(f) = tr.failure.clone() {
        return Err(CliError::Numerical(f));
    }
    if e.reverse {
        out.set("reversal_error", reversal_error(&tr, &state, e.t_final, e.dt)?);
    }
    Ok(())
}

fn linear(e: &Linear, ctx: &Context, out: &mut Outcome) -> Result<(), CliError> {
    let (u0, u1) = ctx.data(&e.u0, &e.u1)?;
    let coef = e.coefficient.build(&ctx.grid, e.t_final)?;
    let problem = LinearProblem::new(coef, u0, u1, e.forcing.clone(), e.t_final)?;
    let mut cfg = LinearConfig::new(e.dt);
    cfg.snapshot_stride = e.snapshot_stride;
    let tr = linear_solve(&problem, &cfg)?;
    let audit = linear_energy_audit(&problem, &tr, e.s)?;
    let mut table = Table::new("energy", &["t", "energy", "u_l2"]);
    for ((t, en), u) in audit.times.iter().zip(&audit.energies).zip(&tr.u) {
        table.push(vec![(*t).into(), (*en).into(), u.l2_norm().into()]);
    }
    out.tables.push(table);
    let series: Vec<(f64, f64)> = audit.times.iter().copied().zip(audit.energies.iter().copied()).collect();
    out.plots.push(energy_plot(&series, &format!("linear energy of order {}", e.s)));
    out.set("steps", tr.steps as f64);
    out.set("energy_drift", audit.max_relative_drift);
    out.set("growth_rate", audit.growth_rate);
    if let Some(g) = &audit.gain {
        out.set("gain_ratio", g.ratio);
    }
    if let Some(r) = &tr.residual {
        out.set("residual_l2", r.max_l2);
        out.set("residual_relative", r.relative);
    }
    match tr.failure {
        Some(f) => Err(CliError::Numerical(f)),
        None => Ok(()),
    }
}

/// `(u₀, u₁)` on band `j`: the configured family and `u₁ = velocity · 2^{3j/2} · H u₀`.
fn band_pair(grid: &Grid, j: i32, family: capwave::strichartz::BandData, velocity: f64) -> Result<(RealField, RealField), CliError> {
    let u0 = band_data(grid, j, family)?;
    let u1 = u0.hilbert().scale(velocity * 2f64.powf(1.5 * j as f64));
    Ok((u0, u1))
}

struct BandFidelity {
    j: i32,
    horizon: f64,
    data_norm: f64,
    system_residual: f64,
    leakage: f64,
    residual: f64,
    fidelity: capwave::parametrix::FidelityReport,
}

fn parametrix(e: &ParametrixRun, ctx: &Context, out: &mut Outcome) -> Result<(), CliError> {
    let coef = e.coefficient.build(&ctx.grid, 1.0)?;
    let results: Vec<Result<BandFidelity, CliError>> = e
        .bands
        .par_iter()
        .map(|&j| {
            let pair = PhasePair::build(&coef, j, &e.phase)?;
            let (u0, u1) = band_pair(&ctx.grid, j, e.band_data, e.velocity)?;
            let p = Parametrix::new(pair, u0, u1)?;
            let h = p.horizon();
            let ts: Vec<f64> = (0..=e.samples).map(|i| h * i as f64 / e.samples as f64).collect();
            let residual = residual_E(&p, &ts)?.max_ratio;
            let leakage = band_leakage(&evaluate_parametrix(&p, h)?, j);
            let fidelity = parametrix_fidelity(&p, e.samples)?;
            Ok(BandFidelity { j, horizon: h, data_norm: p.data_norm(), system_residual: p.data.system_residual, leakage, residual, fidelity })
        })
        .collect();
    let mut bands = Table::new("parametrix", &["j", "horizon", "data_norm", "system_residual", "leakage", "residual_ratio", "fidelity"]);
    let mut series = Table::new("fidelity", &["j", "t", "error"]);
    let (mut xs, mut fid, mut res) = (Vec::new(), Vec::new(), Vec::new());
    let mut plot = Plot::new("fidelity", "parametrix against the direct solver", "2^j", "normalized error").log_log();
    for r in results {
        let b = r?;
        bands.push(vec![
            b.j.into(),
            b.horizon.into(),
            b.data_norm.into(),
            b.system_residual.into(),
            b.leakage.into(),
            b.residual.into(),
            b.fidelity.normalized.into(),
        ]);
        for (t, err) in b.fidelity.times.iter().zip(&b.fidelity.errors) {
            series.push(vec![b.j.into(), (*t).into(), (*err).into()]);
        }
        let k = band_key(b.j);
        out.set(format!("fidelity_j{k}"), b.fidelity.normalized);
        out.set(format!("residual_j{k}"), b.residual);
        out.set(format!("leakage_j{k}"), b.leakage);
        xs.push(2f64.powi(b.j));
        fid.push(b.fidelity.normalized);
        res.push(b.residual);
    }
    if xs.len() >= 2 {
        out.set("fidelity_slope", fit_loglog(&xs, &fid, 2.0).slope);
        out.set("residual_slope", fit_loglog(&xs, &res, 2.0).slope);
    }
    plot.add("fidelity", xs.iter().copied().zip(fid.iter().copied()).collect());
    plot.add("residual ratio", xs.iter().copied().zip(res.iter().copied()).collect());
    out.tables.push(bands);
    out.tables.push(series);
    out.plots.push(plot);
    Ok(())
}

fn dispersion(e: &Dispersion, ctx: &Context, out: &mut Outcome) -> Result<(), CliError> {
    let coef = e.coefficient.build(&ctx.grid, 1.0)?;
    let probes: Vec<Result<_, CliError>> = e
        .bands
        .par_iter()
        .map(|&j| {
            let ph = build_phase(&coef, j, e.sign, &e.phase)?;
            let h = ph.horizon();
            Ok((h, kernel_probe(&ph, (e.window_start * h, h), e.times, &e.kernel)?))
        })
        .collect();
    let mut kernel = Table::new("kernel", &["j", "t", "sup", "predicted", "beta_at_sup", "nodes"]);
    let mut bands = Table::new("bands", &["j", "horizon", "t_slope", "r2", "prefactor"]);
    let mut plot = Plot::new("kernel", "sup of the band kernel", "t", "sup |K|").log_log();
    let mut ok = Vec::new();
    for p in probes {
        let (h, probe) = p?;
        let mut worst: f64 = 0.0;
        for s in &probe.samples {
            kernel.push(vec![probe.j.into(), s.t.into(), s.sup.into(), s.predicted.into(), s.beta_at_sup.into(), s.nodes.into()]);
            worst = worst.max((s.sup / s.predicted - 1.0).abs());
        }
        bands.push(vec![probe.j.into(), h.into(), probe.t_fit.slope.into(), probe.t_fit.r2.into(), probe.prefactor.into()]);
        plot.add(format!("j = {}", probe.j), probe.samples.iter().map(|s| (s.t, s.sup)).collect());
        let k = band_key(probe.j);
        out.set(format!("t_slope_j{k}"), probe.t_fit.slope);
        out.set(format!("prefactor_j{k}"), probe.prefactor);
        out.set(format!("prediction_error_j{k}"), worst);
        ok.push(probe);
    }
    if ok.len() >= 2 {
        out.set("prefactor_slope", prefactor_fit(&ok).slope);
    }
    out.tables.push(kernel);
    out.tables.push(bands);
    out.plots.push(plot);
    Ok(())
}

fn strichartz(e: &Strichartz, ctx: &Context, out: &mut Outcome) -> Result<(), CliError> {
    let pairs = pairs_from(&e.pairs)?;
    let sweep = strichartz_band_sweep(&ctx.grid, &e.bands, e.band_data, e.s, &pairs, e.t_final, e.samples, ctx.physics)?;
    let mut rows = Table::new("strichartz", &["j", "p", "q", "fixed_ratio", "semiclassical_ratio"]);
    let mut semi_max: f64 = 0.0;
    for r in &sweep.rows {
        rows.push(vec![r.j.into(), r.pair.p.into(), r.pair.q.into(), r.fixed_ratio.into(), r.semiclassical_ratio.into()]);
        semi_max = semi_max.max(r.semiclassical_ratio);
    }
    let mut fits = Table::new("fits", &["p", "q", "slope", "r2", "predicted_loss"]);
    let mut plot = Plot::new("strichartz", "fixed-time ratio across bands", "2^j", "ratio").log_log();
    for f in &sweep.fits {
        fits.push(vec![f.pair.p.into(), f.pair.q.into(), f.fit.slope.into(), f.fit.r2.into(), f.predicted_loss.into()]);
        let k = p_key(f.pair.p);
        out.set(format!("fixed_slope_p{k}"), f.fit.slope);
        out.set(format!("loss_margin_p{k}"), f.fit.slope - f.predicted_loss);
        let pts = sweep.rows.iter().filter(|r| r.pair == f.pair).map(|r| (2f64.powi(r.j), r.fixed_ratio)).collect();
        plot.add(format!("{}", f.pair), pts);
    }
    out.set("semiclassical_max", semi_max);
    out.tables.push(rows);
    out.tables.push(fits);
    out.plots.push(plot);
    if let Some(sc) = &e.scaling {
        let grid = match sc.grid {
            Some(g) => g.build()?,
            None => ctx.grid.clone(),
        };
        let u0 = sc.u0.build(&grid, ctx.seed, 0, ctx.base)?;
        let u1 = sc.u1.build(&grid, ctx.seed, 1, ctx.base)?;
        let rep = scaling_diagnostics(&u0, &u1, ctx.physics, &sc.config(), &pairs)?;
        let mut t = Table::new("scaling", &["p", "q", "loss", "base", "rescaled", "exponent", "predicted_exponent"]);
        let mut defect: f64 = 0.0;
        for r in &rep.ratios {
            let exponent = r.exponent.map_or(Cell::Text(String::new()), Cell::Float);
            t.push(vec![r.pair.p.into(), r.pair.q.into(), format!("{:?}", r.loss).to_lowercase().into(), r.base.into(), r.rescaled.into(), exponent, r.predicted_exponent.into()]);
            if let Some(x) = r.exponent {
                defect = defect.max((x - r.predicted_exponent).abs());
            }
        }
        out.tables.push(t);
        out.set("scaling_max_relative_l2", rep.max_relative_l2);
        out.set("scaling_final_relative_l2", rep.final_relative_l2);
        out.set("scaling_exponent_defect", defect);
    }
    Ok(())
}

fn smoothing(e: &Smoothing, ctx: &Context, out: &mut Outcome) -> Result<(), CliError> {
    let sweep = smoothing_sweep(&ctx.grid, &e.bands, e.band_data, e.s, e.rho, e.t_final, e.samples, ctx.physics)?;
    let mut t = Table::new("smoothing", &["j", "center", "value", "unweighted", "data_norm", "ratio", "unweighted_ratio"]);
    let mut plot = Plot::new("smoothing", "local smoothing across bands", "2^j", "ratio to data").log_log();
    for (&j, p) in sweep.bands.iter().zip(&sweep.probes) {
        t.push(vec![j.into(), p.center.into(), p.value.into(), p.unweighted.into(), p.data_norm.into(), p.ratio.into(), p.unweighted_ratio.into()]);
        let k = band_key(j);
        out.set(format!("weighted_ratio_j{k}"), p.ratio);
        out.set(format!("unweighted_ratio_j{k}"), p.unweighted_ratio);
    }
    let xs: Vec<f64> = sweep.bands.iter().map(|&j| 2f64.powi(j)).collect();
    plot.add("weighted", xs.iter().copied().zip(sweep.probes.iter().map(|p| p.ratio)).collect());
    plot.add("unweighted", xs.iter().copied().zip(sweep.probes.iter().map(|p| p.unweighted_ratio)).collect());
    out.set("weighted_variation", sweep.weighted_variation);
    out.set("unweighted_slope", sweep.unweighted_fit.slope);
    out.tables.push(t);
    out.plots.push(plot);
    Ok(())
}

fn energy(e: &Energy, ctx: &Context, out: &mut Outcome) -> Result<(), CliError> {
    let (u0, u1) = ctx.data(&e.u0, &e.u1)?;
    let (state, _) = initialize(&u0, &u1, ctx.physics, e.variant)?;
    let mut coupling = Table::new("coupling", &["k", "i1", "i2", "relative_sum"]);
    let mut cancel: f64 = 0.0;
    for k in 1..=e.s {
        let (i1, i2) = coupling_terms(&state.u, &state.v, k)?;
        let scale = i1.abs() + i2.abs();
        let rel = if scale > 0.0 { (i1 + i2).abs() / scale } else { 0.0 };
        cancel = cancel.max(rel);
        coupling.push(vec![(k as usize).into(), i1.into(), i2.into(), rel.into()]);
    }
    out.tables.push(coupling);
    out.set("coupling_cancellation", cancel);
    let report = energy_report(&state, e.s)?;
    out.set("equivalence_ratio", report.ratio);

    let mut cfg = EvolveConfig::new(e.t_final, e.dt, e.variant);
    cfg.energy_order = Some(e.s);
    let tr = evolve(&state, &cfg, &mut [])?;
    out.tables.push(energy_table(&tr.energy));
    out.plots.push(energy_plot(&tr.energy, &format!("energy of order {}", e.s)));
    let energies: Vec<f64> = tr.energy.iter().map(|x| x.1).collect();
    out.set("energy_drift", max_relative_drift(&energies));
    if let Some(g) = &tr.gronwall {
        out.set("gronwall_c", g.c);
    }
    if let Some(f) = tr.failure.clone() {
        return Err(CliError::Numerical(f));
    }
    if e.reverse {
        out.set("reversal_error", reversal_error(&tr, &state, e.t_final, e.dt)?);
    }
    Ok(())
}

fn slug(label: &str) -> String {
    label.split(|c: char| !c.is_ascii_alphanumeric()).filter(|w| !w.is_empty()).collect::<Vec<_>>().join("_")
}

fn diagram(e: &Diagram, out: &mut Outcome) -> Result<(), CliError> {
    let lines = admissibility_diagram(e.figure);
    let mut t = Table::new("diagram", &["figure", "label", "a", "b", "c", "relation", "p_intercept", "q_intercept"]);
    let mut plot = Plot::new("diagram", &format!("admissibility diagram {}", e.figure.name()), "1/p", "1/q");
    for l in &lines {
        let (p, q) = (l.p_intercept(), l.q_intercept());
        t.push(vec![
            e.figure.name().into(),
            l.label.as_str().into(),
            l.a.to_string().into(),
            l.b.to_string().into(),
            l.c.to_string().into(),
            l.relation().into(),
            p.to_string().into(),
            q.to_string().into(),
        ]);
        let name = slug(&l.label);
        out.set(format!("p_intercept_{name}"), p.value());
        out.set(format!("q_intercept_{name}"), q.value());
        plot.add(l.label.clone(), vec![(0.0, q.value()), (p.value(), 0.0)]);
    }
    out.tables.push(t);
    out.plots.push(plot);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagram_rows_are_exact_rationals() {
        let mut out = Outcome::default();
        diagram(&Diagram { figure: capwave::strichartz::DiagramKind::Fig1 }, &mut out).unwrap();
        let ps: Vec<&Cell> = out.tables[0].rows.iter().map(|r| &r[6]).collect();
        assert_eq!(ps, [&Cell::from("1/4"), &Cell::from("1/5"), &Cell::from("2/5"), &Cell::from("1/2")]);
        assert_eq!(out.observables["p_intercept_scaling_plus_sobolev"], 0.2);
    }

    #[test]
    fn keys() {
        assert_eq!(p_key(5.0), "5");
        assert_eq!(p_key(5.5), "5.5");
        assert_eq!(band_key(-1), "m1");
        assert_eq!(slug("sobolev plus local smoothing"), "sobolev_plus_local_smoothing");
    }
}
