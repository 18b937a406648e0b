use std::f64::consts::TAU;

use capwave::linear::*;
use capwave::spectral::{Grid, PeriodicGrid, RealField, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(n: usize) -> Grid {
    PeriodicGrid::new(n, TAU).unwrap()
}

fn band_data(g: &Grid, rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> RealField {
    let c: Vec<(f64, f64)> = (lo..=hi).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    RealField::from_fn(g, |a| {
        c.iter()
            .enumerate()
            .map(|(i, (x, y))| {
                let m = (lo + i) as f64;
                x * (m * a).cos() + y * (m * a).sin()
            })
            .sum()
    })
}

fn max_diff(a: &RealField, b: &RealField) -> f64 {
    a.sub(b).unwrap().max_abs()
}

/// Direct double sum of the oscillatory representation of the free solution.
fn free_quadrature(u0: &RealField, u1: &RealField, t: f64, alpha: f64) -> f64 {
    let g = u0.grid();
    let dx = g.dx();
    let nodes = g.nodes();
    let mut acc = C64::new(0.0, 0.0);
    for &xi in g.wavenumbers() {
        if xi.abs() >= g.xi_max() {
            continue;
        }
        let w = xi.abs().powf(1.5);
        let (c, s) = if w == 0.0 { (1.0, t) } else { ((w * t).cos(), (w * t).sin() / w) };
        for (m, &beta) in nodes.iter().enumerate() {
            let phase = C64::new(0.0, (alpha - beta) * xi).exp();
            acc += phase * (c * u0.values()[m] + s * u1.values()[m]) * dx;
        }
    }
    acc.re / g.length()
}

#[test]
fn free_propagator_matches_double_integral() {
    let g = grid(64);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u0 = band_data(&g, &mut rng, 4, 9);
    let u1 = band_data(&g, &mut rng, 4, 9);
    let t = 0.37;
    let (u, _) = free_propagator(&u0, &u1, t);
    for k in 0..5 {
        let alpha = 0.3 + 1.1 * k as f64;
        let direct = free_quadrature(&u0, &u1, t, alpha);
        let spectral = g.interpolate(u.values(), &[alpha])[0];
        assert!((direct - spectral).abs() < 1e-8, "{direct} {spectral}");
    }
}

#[test]
fn p_annihilates_free_flow() {
    let g = grid(32);
    let u0 = RealField::from_fn(&g, |a| (4.0 * a).cos());
    let p = LinearProblem::new(CoefficientField::zero(&g), u0, RealField::zeros(&g), Forcing::Zero, 0.02).unwrap();
    let tr = linear_solve(&p, &LinearConfig::new(0.001)).unwrap();
    let r = tr.residual.unwrap();
    assert!(r.max_l2 <= 1e-7, "{r:?}");
}

#[test]
fn p_on_plane_wave_with_constant_coefficient() {
    let g = grid(32);
    let (k, om, c, t) = (5.0, 3.0, 0.7, 0.4);
    let coef = CoefficientField::constant(&g, RealField::from_fn(&g, |_| c));
    let u = RealField::from_fn(&g, |a| (k * a - om * t).cos());
    let ut = RealField::from_fn(&g, |a| om * (k * a - om * t).sin());
    let utt = RealField::from_fn(&g, |a| -om * om * (k * a - om * t).cos());
    let pu = apply_p(&coef, t, &u, &ut, &utt).unwrap();
    let m = -om * om + k.powi(3) + 2.0 * c * k * om - c * c * k * k;
    assert!(max_diff(&pu, &u.scale(m)) < 1e-10 * m.abs());
    let z = RealField::zeros(&g);
    assert_eq!(apply_p(&coef, t, &z, &z, &z).unwrap().max_abs(), 0.0);
}

#[test]
fn solver_matches_free_propagator() {
    let g = grid(64);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u0 = band_data(&g, &mut rng, 1, 12);
    let u1 = band_data(&g, &mut rng, 1, 12);
    let p = LinearProblem::new(CoefficientField::zero(&g), u0.clone(), u1.clone(), Forcing::Zero, 0.5).unwrap();
    let tr = linear_solve(&p, &LinearConfig::new(0.01)).unwrap();
    let (u, ut) = tr.last();
    let (fu, fut) = free_propagator(&u0, &u1, 0.5);
    assert!(max_diff(u, &fu) < 1e-8 && max_diff(ut, &fut) < 1e-8);
}

#[test]
fn duhamel_single_mode() {
    let g = grid(32);
    let z = RealField::zeros(&g);
    let f = Forcing::Mode { wavenumber: 4.0, amplitude: 1.0, frequency: 0.0 };
    let p = LinearProblem::new(CoefficientField::zero(&g), z.clone(), z, f, 1.0).unwrap();
    let tr = linear_solve(&p, &LinearConfig::new(0.01)).unwrap();
    for (t, u) in tr.times.iter().zip(&tr.u) {
        let want = RealField::from_fn(&g, |a| (1.0 - (8.0 * t).cos()) / 64.0 * (4.0 * a).cos());
        assert!(max_diff(u, &want) < 1e-7, "t={t}");
    }
}

fn richardson(coef: &CoefficientField, t_final: f64, dts: [f64; 3]) -> f64 {
    let g = coef.grid();
    let u0 = RealField::from_fn(g, |a| a.cos() + 0.3 * (3.0 * a).sin());
    let u1 = RealField::from_fn(g, |a| 0.5 * (2.0 * a).cos());
    let p = LinearProblem::new(coef.clone(), u0, u1, Forcing::Zero, t_final).unwrap();
    let solve = |dt: f64| {
        let mut cfg = LinearConfig::new(dt);
        cfg.residual = false;
        cfg.snapshot_stride = usize::MAX;
        linear_solve(&p, &cfg).unwrap().last().0.clone()
    };
    let r = solve(dts[2]);
    let e1 = solve(dts[0]).sub(&r).unwrap().l2_norm();
    let e2 = solve(dts[1]).sub(&r).unwrap().l2_norm();
    e1 / e2
}

#[test]
fn fourth_order_with_smooth_coefficient() {
    let g = grid(64);
    let c = CoefficientField::constant(&g, RealField::from_fn(&g, |a| 0.1 * a.sin()));
    let ratio = richardson(&c, 0.5, [0.01, 0.005, 0.01 / 16.0]);
    assert!((ratio - 16.0).abs() <= 1.6, "ratio {ratio}");
    // Time-dependent coefficient sampled on every stage time of all three runs.
    let h_ref: f64 = 0.01 / 16.0;
    let ct = CoefficientField::from_fn(&g, 0.0, 0.5, (0.5 / (0.5 * h_ref)).round() as usize, |t, a| {
        0.1 * t.sin() * a.sin()
    })
    .unwrap();
    let ratio = richardson(&ct, 0.5, [0.01, 0.005, h_ref]);
    assert!((ratio - 16.0).abs() <= 1.6, "ratio {ratio}");
}

#[test]
fn free_flow_energies() {
    let g = grid(64);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = LinearProblem::new(
        CoefficientField::zero(&g),
        band_data(&g, &mut rng, 1, 8),
        band_data(&g, &mut rng, 1, 8),
        Forcing::Zero,
        1.0,
    )
    .unwrap();
    let mut cfg = LinearConfig::new(0.01);
    cfg.snapshot_stride = 10;
    let tr = linear_solve(&p, &cfg).unwrap();
    let audit = linear_energy_audit(&p, &tr, 2.0).unwrap();
    // Only the top-order parts are invariant: ‖u‖² + ‖v‖² oscillates.
    let top = |u: &RealField, v: &RealField| linear_energy(u, v, 2.0).unwrap() - linear_energy(u, v, 0.0).unwrap();
    let t0 = top(&tr.u[0], &tr.v[0]);
    for (u, v) in tr.u.iter().zip(&tr.v) {
        assert!((top(u, v) - t0).abs() <= 1e-10 * t0);
    }
    assert!(audit.max_relative_drift > 1e-6);
    assert!(audit.growth_rate.is_finite() && audit.gain.is_none());
}

#[test]
fn variable_coefficient_growth_is_finite() {
    let g = grid(64);
    let t_final = 1.0;
    let coef = CoefficientField::from_fn(&g, 0.0, t_final, 400, |t, a| 0.1 * t.sin() * a.sin()).unwrap();
    let u0 = RealField::from_fn(&g, |a| a.cos() + 0.2 * (5.0 * a).sin());
    let p = LinearProblem::new(coef.clone(), u0, RealField::zeros(&g), Forcing::Zero, t_final).unwrap();
    let mut cfg = LinearConfig::new(0.01);
    cfg.snapshot_stride = 5;
    let tr = linear_solve(&p, &cfg).unwrap();
    let audit = linear_energy_audit(&p, &tr, 1.0).unwrap();
    let m = coef.sup_norm(2) + coef.sup_norm_t(2);
    assert!(audit.growth_rate.is_finite());
    assert!(audit.growth_rate <= 2.0 * (1.0 + m).powi(2), "C = {}", audit.growth_rate);
    for (t, e) in audit.times.iter().zip(&audit.energies) {
        assert!(*e <= audit.energies[0] * (audit.growth_rate * t).exp() * (1.0 + 1e-12));
    }
}

#[test]
fn negative_index_energy_by_conjugation() {
    let g = grid(64);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let u = band_data(&g, &mut rng, 1, 20);
    let v = band_data(&g, &mut rng, 1, 20);
    let s = -1.5;
    let conj = |f: &RealField| {
        RealField::new(&g, g.apply_symbol(f.values(), |xi| C64::new((1.0 + xi * xi).powf(0.5 * s), 0.0))).unwrap()
    };
    let (cu, cv) = (conj(&u), conj(&v));
    let du = cu.deriv(1);
    let direct = cu.dot(&cu).unwrap()
        + cv.dot(&cv).unwrap()
        + 0.5 * (du.dot(&du.deriv(1).hilbert()).unwrap() + cv.dot(&cv).unwrap());
    let e = linear_energy(&u, &v, s).unwrap();
    assert!((e - direct).abs() <= 1e-8 * direct, "{e} {direct}");
    assert!(linear_energy(&u, &v, -2.0).is_err());
    assert!(linear_energy(&u, &v, 0.5).is_err());
}

#[test]
fn resonant_forcing_gain_is_band_independent() {
    let g = PeriodicGrid::new(128, TAU).unwrap();
    let z = RealField::zeros(&g);
    let mut ratios = Vec::new();
    for j in 3..=5 {
        let k = 2f64.powi(j);
        let f = Forcing::Mode { wavenumber: k, amplitude: 1.0, frequency: k.powf(1.5) };
        let p = LinearProblem::new(CoefficientField::zero(&g), z.clone(), z.clone(), f, 0.5).unwrap();
        let mut cfg = LinearConfig::new(0.002);
        cfg.residual = false;
        let tr = linear_solve(&p, &cfg).unwrap();
        ratios.push(linear_energy_audit(&p, &tr, 0.0).unwrap().gain.unwrap().ratio);
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo <= 3.0, "{ratios:?}");
}

#[test]
fn forced_residual_reproduces_forcing() {
    let g = grid(32);
    let coef = CoefficientField::constant(&g, RealField::from_fn(&g, |a| 0.1 * a.sin()));
    let z = RealField::zeros(&g);
    let f = Forcing::Mode { wavenumber: 2.0, amplitude: 1.0, frequency: 1.0 };
    let p = LinearProblem::new(coef, z.clone(), z, f, 0.05).unwrap();
    let tr = linear_solve(&p, &LinearConfig::new(0.001)).unwrap();
    let r = tr.residual.unwrap();
    assert!(r.max_l2 < 1e-6, "{r:?}");
}

#[test]
fn forcing_json_and_validation() {
    let g = grid(16);
    let f = Forcing::Mode { wavenumber: 3.0, amplitude: 0.5, frequency: 2.0 };
    let s = serde_json::to_string(&f).unwrap();
    assert_eq!(serde_json::from_str::<Forcing>(&s).unwrap(), f);
    assert!(serde_json::from_str::<Forcing>(r#"{"kind":"mode","wavenumber":1,"amplitude":1,"frequency":0,"extra":1}"#).is_err());
    assert!(Forcing::Mode { wavenumber: 2.5, amplitude: 1.0, frequency: 0.0 }.validate(&g).is_err());
    let z = RealField::zeros(&g);
    assert!(LinearProblem::new(CoefficientField::zero(&g), z.clone(), z, Forcing::Zero, -1.0).is_err());
}

#[test]
fn oversized_step_rejected() {
    let g = grid(256);
    let z = RealField::zeros(&g);
    let p = LinearProblem::new(CoefficientField::zero(&g), z.clone(), z, Forcing::Zero, 1.0).unwrap();
    assert!(matches!(linear_solve(&p, &LinearConfig::new(0.01)), Err(capwave::Error::StepTooLarge { .. })));
}
