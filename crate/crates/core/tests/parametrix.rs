use std::f64::consts::PI;

use capwave::linear::{free_propagator, CoefficientField};
use capwave::parametrix::*;
use capwave::spectral::{Band, DyadicPartition, Grid, PeriodicGrid, RealField, C64};
use capwave::util::fit_loglog;
use capwave::Error;

fn grid(n: usize, length: f64) -> Grid {
    PeriodicGrid::new(n, length).unwrap()
}

fn sine(g: &Grid, amp: f64) -> CoefficientField {
    CoefficientField::constant(g, RealField::from_fn(g, |a| amp * a.sin()))
}

fn constant(g: &Grid, c: f64) -> CoefficientField {
    CoefficientField::constant(g, RealField::from_fn(g, |_| c))
}

/// Wave packets carried by band `j`, with `u₁` scaled to the band frequency.
fn packet(g: &Grid, j: i32) -> (RealField, RealField) {
    let part = DyadicPartition::new(1.0, g).unwrap();
    let k = 2f64.powi(j);
    let c = 0.5 * g.length();
    let u0 = RealField::from_fn(g, |a| (-(a - c).powi(2)).exp() * (k * a).cos());
    let u1 = RealField::from_fn(g, |a| (-2.0 * (a - c - 0.5).powi(2)).exp() * (k * a).sin());
    let u0j = part.project(&u0, Band::Dyadic(j)).unwrap();
    let u1j = part.project(&u1, Band::Dyadic(j)).unwrap().scale(k.powf(1.5));
    (u0j, u1j)
}

fn rel(a: &RealField, b: &RealField) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm()
}

fn final_state(flow: &CharacteristicFlow) -> (&[f64], &[f64]) {
    (&flow.alpha[flow.steps], &flow.eta[flow.steps])
}

#[test]
fn characteristics_free_and_constant_drift() {
    let g = grid(256, 2.0 * PI);
    let (j, xi) = (4, 20.0);
    let r = 2f64.powf(0.5 * j as f64);
    for sign in Sign::BOTH {
        for c in [0.0, 0.7] {
            let coef = if c == 0.0 { CoefficientField::zero(&g) } else { constant(&g, c) };
            let problem = HamiltonJacobiProblem::new(coef, j, sign, xi, 1.0).unwrap();
            let flow = solve_characteristics(&problem).unwrap();
            let speed = (c - 1.5 * sign.factor() * xi.sqrt()) / r;
            for (n, t) in flow.times().iter().enumerate() {
                for (m, b) in flow.beta.iter().enumerate() {
                    assert!((flow.alpha[n][m] - (b + speed * t)).abs() < 1e-12);
                    assert!(flow.eta[n][m].abs() < 1e-14);
                    assert!((flow.jacobian[n][m] - 1.0).abs() < 1e-12);
                    let action = -sign.factor() * c * t / xi.sqrt();
                    assert!((flow.action[n][m] - action).abs() < 1e-13);
                }
            }
        }
    }
}

#[test]
fn characteristics_fourth_order_under_refinement() {
    let g = grid(256, 2.0 * PI);
    let run = |steps: usize| {
        let mut p = HamiltonJacobiProblem::new(sine(&g, 0.5), 4, Sign::Plus, 12.0, 3.0).unwrap();
        p.steps = steps;
        p.launch_points = 16;
        let flow = solve_characteristics(&p).unwrap();
        let (a, e) = final_state(&flow);
        (a.to_vec(), e.to_vec())
    };
    let (a1, e1) = run(200);
    let (a2, e2) = run(400);
    let (a3, e3) = run(800);
    let gap = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let ra = gap(&a1, &a2) / gap(&a2, &a3);
    let re = gap(&e1, &e2) / gap(&e2, &e3);
    assert!((12.0..20.0).contains(&ra), "alpha ratio {ra}");
    assert!((12.0..20.0).contains(&re), "eta ratio {re}");
}

#[test]
fn characteristics_reject_bad_problems() {
    let g = grid(64, 2.0 * PI);
    let v = CoefficientField::zero(&g);
    assert!(HamiltonJacobiProblem::new(v.clone(), 0, Sign::Plus, 1.0, 1.0).is_err());
    assert!(HamiltonJacobiProblem::new(v.clone(), 4, Sign::Plus, 100.0, 1.0).is_err());
    assert!(HamiltonJacobiProblem::new(v.clone(), 4, Sign::Plus, 16.0, 0.0).is_err());
    let mut p = HamiltonJacobiProblem::new(v, 4, Sign::Plus, 16.0, 1.0).unwrap();
    p.steps = 50;
    assert!(matches!(solve_characteristics(&p), Err(Error::InvalidInput(_))));
}

#[test]
fn strong_coefficient_degenerates_the_flow() {
    let g = grid(256, 2.0 * PI);
    let p = HamiltonJacobiProblem::new(sine(&g, 40.0), 2, Sign::Plus, 4.0, 4.0).unwrap();
    assert!(matches!(solve_characteristics(&p), Err(Error::FlowDegeneracy { .. })));
}

#[test]
fn phase_vanishes_without_coefficient() {
    let g = grid(256, 2.0 * PI);
    let cfg = PhaseConfig { xi_per_octave: 4, ..PhaseConfig::default() };
    let ph = build_phase(&CoefficientField::zero(&g), 4, Sign::Plus, &cfg).unwrap();
    assert!(ph.theta_raw().iter().all(|x| x.abs() < 1e-14));
    assert!(ph.residual < 1e-12);
}

#[test]
fn constant_coefficient_phase_is_exact() {
    let g = grid(256, 2.0 * PI);
    let c = 0.3;
    let cfg = PhaseConfig { xi_per_octave: 4, ..PhaseConfig::default() };
    for sign in Sign::BOTH {
        let ph = build_phase(&constant(&g, c), 5, sign, &cfg).unwrap();
        assert!(ph.residual <= 1e-9);
        let times = ph.times();
        for (ix, &xi) in ph.xis().iter().enumerate() {
            for (n, &t) in times.iter().enumerate() {
                let want = -sign.factor() * c * t / xi.sqrt();
                assert!(ph.node_row(ix, n).iter().all(|th| (th - want).abs() < 1e-9));
            }
        }
    }
}

#[test]
fn sine_coefficient_phase_j6() {
    let g = grid(1024, 4.0 * PI);
    let ph = build_phase(&sine(&g, 0.1), 6, Sign::Plus, &PhaseConfig::default()).unwrap();
    assert!(ph.residual <= 1e-6, "eikonal residual {}", ph.residual);
    assert!(ph.constant_mismatch <= CONSTANT_TOLERANCE, "mismatch {}", ph.constant_mismatch);
    let (lo, hi) = ph.jacobian_range;
    assert!(lo >= 0.5 && hi <= 2.0, "jacobian range {lo}..{hi}");
    assert!(ph.node_row(0, 0).iter().all(|x| *x == 0.0));
}

/// Smallness of `ϑ` and the symbol bounds `|φ_α/ξ − 1|`, `|φ_t ∓ ξ^{3/2}|/ξ^{3/2}`, each
/// normalized by its expected size, stay bounded across bands.
#[test]
fn phase_size_and_symbol_bounds() {
    let g = grid(1024, 4.0 * PI);
    let v = sine(&g, 0.1);
    let cfg = PhaseConfig { xi_per_octave: 8, ..PhaseConfig::default() };
    let mut consts = Vec::new();
    for j in [4, 6] {
        let ph = build_phase(&v, j, Sign::Minus, &cfg).unwrap();
        let pg = ph.grid().clone();
        let (h, scale) = (ph.horizon(), 2f64.powf(-0.5 * j as f64));
        let (mut c_theta, mut c_alpha, mut c_t): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for (n, &t) in ph.times().iter().enumerate().skip(1) {
            let slice = ph.slice(t.min(h)).unwrap();
            for (ix, &xi) in ph.xis().iter().enumerate() {
                let row = ph.node_row(ix, n);
                let sup = row.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                c_theta = c_theta.max(sup / (t * (t + scale)));
                let th_a = RealField::new(&pg, row.to_vec()).unwrap().deriv(1);
                c_alpha = c_alpha.max(xi.sqrt() * th_a.max_abs() / scale);
                let [_, dt, _] = slice.row(ix);
                c_t = c_t.max(dt.iter().fold(0.0f64, |m, x| m.max(x.abs())) / scale);
            }
        }
        consts.push((c_theta, c_alpha, c_t));
    }
    for (ct, ca, cd) in &consts {
        assert!(ct.is_finite() && *ct < 1.0 && *ca < 1.0 && *cd < 1.0, "{consts:?}");
    }
    let (a, b) = (consts[0], consts[1]);
    assert!(b.0 < 2.0 * a.0 && b.1 < 2.0 * a.1 && b.2 < 2.0 * a.2, "{consts:?}");
}

#[test]
fn phase_export_round_trip() {
    let g = grid(256, 2.0 * PI);
    let cfg = PhaseConfig { xi_per_octave: 4, ..PhaseConfig::default() };
    let ph = build_phase(&sine(&g, 0.2), 4, Sign::Plus, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (bin, json) = export_phase(&ph, dir.path(), "phase_j4_plus").unwrap();
    assert!(bin.exists() && json.exists());
    let back = import_phase(&json).unwrap();
    assert_eq!(back.theta_raw(), ph.theta_raw());
    assert_eq!(back.xis(), ph.xis());
    assert_eq!((back.j, back.sign, back.residual), (ph.j, ph.sign, ph.residual));
    let t = 0.3 * ph.horizon();
    assert_eq!(back.slice(t).unwrap().value, ph.slice(t).unwrap().value);
}

#[test]
fn phase_config_rejects_unknown_keys() {
    assert!(serde_json::from_str::<PhaseConfig>(r#"{"t_scale":1,"steps":200,"xi_per_octave":16,"tolerance":1e-6,"bogus":1}"#).is_err());
}

#[test]
fn data_components_without_coefficient() {
    let g = grid(512, 2.0 * PI);
    let j = 5;
    let pair = PhasePair::build(&CoefficientField::zero(&g), j, &PhaseConfig { xi_per_octave: 4, ..PhaseConfig::default() }).unwrap();
    let (u0, u1) = packet(&g, j);
    let d = build_data_components(&pair, &u0, &u1, DEFAULT_NEUMANN_ORDER).unwrap();
    let (s0, s1) = (u0.spectrum(), u1.spectrum());
    let (sp, sm) = (d.plus.spectrum(), d.minus.spectrum());
    let scale = s0.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    for (k, &xi) in g.wavenumbers().iter().enumerate() {
        let m = if xi == 0.0 { 0.0 } else { xi.abs().powf(-1.5) };
        let i = C64::new(0.0, 1.0);
        assert!((sp[k] - 0.5 * (s0[k] - i * m * s1[k])).norm() < 1e-12 * scale);
        assert!((sm[k] - 0.5 * (s0[k] + i * m * s1[k])).norm() < 1e-12 * scale);
    }
    let d = build_data_components(&pair, &u0, &RealField::zeros(&g), DEFAULT_NEUMANN_ORDER).unwrap();
    let half = u0.scale(0.5);
    assert!(rel(&d.plus.re(), &half) < 1e-12 && d.plus.im().max_abs() < 1e-12 * half.max_abs());
    assert!(rel(&d.minus.re(), &half) < 1e-12);
}

#[test]
fn low_band_with_large_coefficient_is_rejected() {
    let g = grid(512, 2.0 * PI);
    let j = 4;
    let pair = PhasePair::build(&constant(&g, 8.0), j, &PhaseConfig { xi_per_octave: 4, ..PhaseConfig::default() }).unwrap();
    let (u0, u1) = packet(&g, j);
    assert!(matches!(build_data_components(&pair, &u0, &u1, DEFAULT_NEUMANN_ORDER), Err(Error::BandTooLow { .. })));
}

#[test]
fn free_parametrix_is_the_free_flow() {
    let g = grid(1024, 4.0 * PI);
    let j = 5;
    let pair = PhasePair::build(&CoefficientField::zero(&g), j, &PhaseConfig { xi_per_octave: 4, ..PhaseConfig::default() }).unwrap();
    let (u0, u1) = packet(&g, j);
    let p = Parametrix::new(pair, u0.clone(), u1.clone()).unwrap();
    let [w0, wt0, _] = p.evaluate_jet(0.0).unwrap();
    assert!(rel(&w0, &u0) < 1e-10 && rel(&wt0, &u1) < 1e-10);
    for frac in [0.3, 1.0] {
        let t = frac * p.horizon();
        let (uf, _) = free_propagator(&u0, &u1, t);
        let w = evaluate_parametrix(&p, t).unwrap();
        assert!(w.sub(&uf).unwrap().max_abs() < 1e-6 * uf.max_abs());
        assert!(band_leakage(&w, j) <= 1e-6);
    }
    let ts: Vec<f64> = (0..=4).map(|i| p.horizon() * i as f64 / 4.0).collect();
    let r = residual_E(&p, &ts).unwrap();
    assert!(r.max_ratio <= 1e-6, "free residual ratio {}", r.max_ratio);
}

#[test]
fn constant_coefficient_parametrix_is_exact() {
    let g = grid(1024, 4.0 * PI);
    let j = 5;
    let v = constant(&g, 0.4);
    let pair = PhasePair::build(&v, j, &PhaseConfig { xi_per_octave: 8, ..PhaseConfig::default() }).unwrap();
    let (u0, u1) = packet(&g, j);
    let p = Parametrix::new(pair, u0, u1).unwrap();
    let ts: Vec<f64> = (0..=4).map(|i| p.horizon() * i as f64 / 4.0).collect();
    assert!(residual_E(&p, &ts).unwrap().max_ratio <= 1e-6);
    assert!(parametrix_fidelity(&p, 4).unwrap().normalized <= 1e-8);
}

/// Band sweep for `V = 0.1 sin α`: initial-data replay, residual growth and fidelity.
#[test]
fn sine_coefficient_band_sweep() {
    let g = grid(1024, 4.0 * PI);
    let v = sine(&g, 0.1);
    let bands = [4, 5, 6, 7];
    let (mut replay, mut residual, mut fidelity) = (vec![], vec![], vec![]);
    for j in bands {
        let pair = PhasePair::build(&v, j, &PhaseConfig::default()).unwrap();
        let (u0, u1) = packet(&g, j);
        let lead = leading_order_components(&pair, &u0, &u1).unwrap();
        let pl = Parametrix::with_data(pair.clone(), lead, u0.clone(), u1.clone()).unwrap();
        let [w0, wt0, _] = pl.evaluate_jet(0.0).unwrap();
        replay.push(rel(&w0, &u0) + rel(&wt0, &u1));

        let p = Parametrix::new(pair, u0.clone(), u1.clone()).unwrap();
        assert!(p.data.system_residual <= SYSTEM_TOLERANCE);
        let [w0, wt0, _] = p.evaluate_jet(0.0).unwrap();
        assert!(rel(&w0, &u0) < 1e-10 && rel(&wt0, &u1) < 1e-10);
        let w = evaluate_parametrix(&p, p.horizon()).unwrap();
        assert!(band_leakage(&w, j) <= 1e-6);

        let ts: Vec<f64> = (0..=8).map(|i| p.horizon() * i as f64 / 8.0).collect();
        residual.push(residual_E(&p, &ts).unwrap().max_ratio);
        fidelity.push(parametrix_fidelity(&p, 8).unwrap().normalized);
    }
    let xs: Vec<f64> = bands.iter().map(|&j| 2f64.powi(j)).collect();
    let replay_fit = fit_loglog(&xs, &replay, 2.0);
    assert!((replay_fit.slope + 0.5).abs() <= 0.15, "replay slope {}", replay_fit.slope);
    // ‖Pw‖ grows like 2^{j/2} relative to the data norm; the rescaled constant is pinned.
    let residual_fit = fit_loglog(&xs, &residual, 2.0);
    assert!((residual_fit.slope - 0.5).abs() <= 0.1, "residual slope {}", residual_fit.slope);
    for (r, &j) in residual.iter().zip(&bands) {
        let c = r * 2f64.powf(-0.5 * j as f64);
        assert!((0.04..0.08).contains(&c), "rescaled residual {c} at j = {j}");
    }
    let fid_fit = fit_loglog(&xs, &fidelity, 2.0);
    assert!(fid_fit.slope <= -0.35, "fidelity slope {}", fid_fit.slope);
    for (f, &j) in fidelity.iter().zip(&bands) {
        assert!(*f <= 2f64.powf(-0.5 * j as f64), "fidelity {f} at j = {j}");
    }
}

#[test]
fn critical_frequency() {
    assert!((xi_critical(1.0, 0.0, 3.0) - 4.0).abs() < 1e-15);
    assert!((xi_critical(2.0, 1.0, -5.0) - 4.0).abs() < 1e-15);
}

#[test]
fn free_kernel_decay_and_band_prefactor() {
    let g = grid(4096, 16.0 * PI);
    let v = CoefficientField::zero(&g);
    let cfg = KernelConfig::default();
    let mut probes = Vec::new();
    for j in 4..=7 {
        let ph = build_phase(&v, j, Sign::Plus, &PhaseConfig::default()).unwrap();
        let h = ph.horizon();
        let probe = kernel_probe(&ph, (0.05 * h, h), 8, &cfg).unwrap();
        if j == 6 {
            assert!((probe.t_fit.slope + 0.5).abs() <= 0.1, "t slope {}", probe.t_fit.slope);
        }
        for s in &probe.samples {
            assert!(s.sup > 0.0 && (s.sup / s.predicted - 1.0).abs() < 0.35, "{s:?}");
        }
        probes.push(probe);
    }
    let fit = prefactor_fit(&probes);
    assert!((fit.slope - 0.25).abs() <= 0.05, "prefactor exponent {}", fit.slope);
}

#[test]
fn kernel_window_must_avoid_small_times() {
    let g = grid(512, 4.0 * PI);
    let ph = build_phase(&CoefficientField::zero(&g), 4, Sign::Plus, &PhaseConfig { xi_per_octave: 4, ..PhaseConfig::default() }).unwrap();
    let h = ph.horizon();
    assert!(kernel_probe(&ph, (0.01 * h, h), 4, &KernelConfig::default()).is_err());
    assert!(kernel_probe(&ph, (0.1 * h, 2.0 * h), 4, &KernelConfig::default()).is_err());
}

#[test]
fn ff_star_matches_kernel_without_coefficient() {
    let g = grid(4096, 16.0 * PI);
    let cfg = KernelConfig::default();
    let ph = build_phase(&CoefficientField::zero(&g), 6, Sign::Plus, &PhaseConfig::default()).unwrap();
    let (t, tp) = (0.6 * ph.horizon(), 0.2 * ph.horizon());
    let ff = ff_star_probe(&ph, t, tp, &cfg).unwrap();
    let k = kernel_sup(&ph, t - tp, &cfg).unwrap();
    assert!((ff.sup / k.sup - 1.0).abs() < 0.05, "ff* {} vs kernel {}", ff.sup, k.sup);
}

#[test]
fn ff_star_decay_with_sine_coefficient() {
    let g = grid(4096, 16.0 * PI);
    let cfg = KernelConfig::default();
    let ph = build_phase(&sine(&g, 0.1), 6, Sign::Plus, &PhaseConfig::default()).unwrap();
    let h = ph.horizon();
    let taus: Vec<f64> = (0..6).map(|i| 0.1 * h * 2f64.powf(0.5 * i as f64)).collect();
    let (samples, fit) = ff_star_fit(&ph, 0.0, &taus, &cfg).unwrap();
    assert_eq!(samples.len(), taus.len());
    assert!((fit.slope + 0.5).abs() <= 0.15, "ff* slope {}", fit.slope);
}
