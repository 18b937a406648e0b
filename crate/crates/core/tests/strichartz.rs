use std::f64::consts::PI;

use capwave::evolution::{evolve, initialize, EvolveConfig, ModelVariant};
use capwave::spectral::{Grid, PeriodicGrid, RealField};
use capwave::strichartz::*;
use capwave::vortex_sheet::Physics;
use capwave::Error;
use proptest::prelude::*;

fn grid(n: usize, length: f64) -> Grid {
    PeriodicGrid::new(n, length).unwrap()
}

fn low_modes(g: &Grid, eps: f64) -> (RealField, RealField) {
    let u0 = RealField::from_fn(g, |a| eps * (a.sin() + 0.5 * (2.0 * a).cos()));
    let u1 = RealField::from_fn(g, |a| eps * a.cos());
    (u0, u1)
}

proptest! {
    #[test]
    fn pairs_satisfy_the_relation(p in 4.0f64..200.0) {
        let pair = AdmissiblePair::from_p(p).unwrap();
        prop_assert!(pair.defect() <= ADMISSIBILITY_TOLERANCE);
        prop_assert!(AdmissiblePair::new(pair.p, pair.q).is_ok());
    }

    #[test]
    fn sampled_pairs_are_admissible(count in 1usize..40) {
        let pairs = admissible_pairs(count).unwrap();
        prop_assert_eq!(pairs.len(), count);
        prop_assert!(pairs.iter().all(|p| p.defect() <= ADMISSIBILITY_TOLERANCE));
        prop_assert!(pairs[0].is_endpoint());
    }
}

#[test]
fn semiclassical_ratios_are_linear_and_window_stable() {
    let g = grid(2048, 8.0 * PI);
    let j = 6;
    let u0 = band_data(&g, j, BandData::Packet { width: 1.0 }).unwrap();
    let h = 2f64.powf(-0.5 * j as f64);
    // Five semiclassical windows, 64 intervals each.
    let samples = Samples::free_flow(&u0, &RealField::zeros(&g), Physics::default(), 5.0 * h, 321).unwrap();
    let mut pairs = standard_pairs().to_vec();
    pairs.push(AdmissiblePair::from_p(4.0).unwrap());
    let at = |smp: &Samples, start: f64| strichartz_suite(smp, 1.0, &pairs, SuiteMode::Semiclassical { j, t_scale: 1.0, start }).unwrap();
    let base = at(&samples, 0.0);
    let doubled = at(&samples.scale(2.0), 0.0);
    for (a, b) in base.iter().zip(&doubled) {
        assert!(a.ratio.is_finite() && a.ratio > 0.0);
        assert!((b.ratio / a.ratio - 1.0).abs() <= 1e-10, "{} {} vs {}", a.pair, a.ratio, b.ratio);
        assert_eq!(a.samples, 65);
    }
    assert!(base[3].endpoint);
    for k in 1..=4 {
        for (a, b) in base.iter().zip(at(&samples, k as f64 * h)) {
            let r = b.ratio / a.ratio;
            assert!((0.5..=2.0).contains(&r), "shift {k}: {} ratio {r}", a.pair);
        }
    }
}

#[test]
fn semiclassical_mode_checks_band_and_window() {
    let g = grid(1024, 4.0 * PI);
    let u0 = band_data(&g, 5, BandData::Packet { width: 1.0 }).unwrap();
    let samples = Samples::free_flow(&u0, &RealField::zeros(&g), Physics::default(), 0.25, 33).unwrap();
    let pairs = standard_pairs();
    let wrong_band = strichartz_suite(&samples, 1.0, &pairs, SuiteMode::Semiclassical { j: 3, t_scale: 1.0, start: 0.0 });
    assert!(matches!(wrong_band, Err(Error::WindowMismatch(_))));
    let too_long = strichartz_suite(&samples, 1.0, &pairs, SuiteMode::Semiclassical { j: 5, t_scale: 2.0, start: 0.0 });
    assert!(matches!(too_long, Err(Error::WindowMismatch(_))));
    let endpoint = [AdmissiblePair::from_p(4.0).unwrap()];
    assert!(strichartz_suite(&samples, 1.0, &endpoint, SuiteMode::Fixed { band: None }).is_err());
}

#[test]
fn fixed_mode_subinterval_reconstruction() {
    let g = grid(2048, 8.0 * PI);
    let j = 6;
    let u0 = band_data(&g, j, BandData::Packet { width: 1.0 }).unwrap();
    let samples = Samples::free_flow(&u0, &RealField::zeros(&g), Physics::default(), 1.0, 401).unwrap();
    for r in strichartz_suite(&samples, 1.0, &standard_pairs(), SuiteMode::Fixed { band: Some(j) }).unwrap() {
        let sub = r.subintervals.unwrap();
        assert_eq!(sub.windows, 8);
        // On band j the two derivative weights differ by about 2^{−j/(2p)}.
        let rebuilt = sub.summed * 2f64.powf(-(j as f64) / (2.0 * r.pair.p));
        assert!((rebuilt / r.norm - 1.0).abs() < 0.1, "{}: {rebuilt} vs {}", r.pair, r.norm);
    }
}

#[test]
fn fixed_mode_cross_band_loss() {
    let g = grid(2048, 8.0 * PI);
    let sweep = strichartz_band_sweep(
        &g,
        &[4, 5, 6, 7],
        BandData::Packet { width: 1.0 },
        1.0,
        &standard_pairs(),
        1.0,
        201,
        Physics::default(),
    )
    .unwrap();
    for f in &sweep.fits {
        assert!(f.fit.slope <= f.predicted_loss + 0.1, "{}: slope {}", f.pair, f.fit.slope);
    }
    assert!(sweep.rows.iter().all(|r| r.fixed_ratio.is_finite() && r.semiclassical_ratio.is_finite()));
}

#[test]
fn free_flow_local_smoothing_sweep() {
    let g = grid(4096, 16.0 * PI);
    let bands = [4, 5, 6, 7];
    let packets = smoothing_sweep(&g, &bands, BandData::Packet { width: 1.0 }, 1.0, 1.0, 1.0, 201, Physics::default()).unwrap();
    assert!(packets.weighted_variation <= 2.0, "variation {}", packets.weighted_variation);
    assert!((packets.unweighted_fit.slope - 0.25).abs() <= 0.05, "slope {}", packets.unweighted_fit.slope);
    let modes = smoothing_sweep(&g, &bands, BandData::SingleMode, 1.0, 1.0, 1.0, 201, Physics::default()).unwrap();
    assert!(modes.weighted_variation <= 2.0);
    assert!((modes.unweighted_fit.slope - 0.25).abs() <= 0.05);
    // A single mode is not localized, so its weighted ratio keeps growing like 2^{j/4}.
    assert!(modes.weighted_variation > 1.5 * packets.weighted_variation);
}

#[test]
fn nonlinear_local_smoothing_is_finite() {
    let g = grid(256, 2.0 * PI);
    let (u0, u1) = low_modes(&g, 0.01);
    let (state, _) = initialize(&u0, &u1, Physics::default(), ModelVariant::Truncated).unwrap();
    let mut cfg = EvolveConfig::new(0.5, 1e-3, ModelVariant::Truncated);
    cfg.snapshot_stride = 10;
    let tr = evolve(&state, &cfg, &mut []).unwrap();
    let samples = Samples::from_evolution(&tr).unwrap();
    let probe = local_smoothing_suite(&samples, 1.0, 1.0, None).unwrap();
    assert!(probe.ratio.is_finite() && probe.ratio > 0.0);
    assert!(probe.value <= probe.unweighted * (0.5f64).sqrt() * 1.0001);
}

#[test]
fn nonlinear_strichartz_drift_is_order_epsilon() {
    let g = grid(256, 2.0 * PI);
    let pairs = standard_pairs();
    let ratios = |eps: f64, variant: ModelVariant| -> Vec<f64> {
        let (u0, u1) = low_modes(&g, eps);
        let (state, _) = initialize(&u0, &u1, Physics::default(), variant).unwrap();
        let mut cfg = EvolveConfig::new(0.5, 1e-3, variant);
        cfg.snapshot_stride = 10;
        let tr = evolve(&state, &cfg, &mut []).unwrap();
        let samples = Samples::from_evolution(&tr).unwrap();
        strichartz_suite(&samples, 1.0, &pairs, SuiteMode::Fixed { band: None }).unwrap().iter().map(|r| r.ratio).collect()
    };
    let linear = ratios(1.0, ModelVariant::LinearFree);
    for eps in [0.005, 0.01] {
        for (a, b) in ratios(eps, ModelVariant::Truncated).iter().zip(&linear) {
            assert!((a / b - 1.0).abs() <= 2.0 * eps, "eps {eps}: {a} vs {b}");
        }
    }
}

#[test]
fn scaling_identity() {
    let g = grid(256, 2.0 * PI);
    let pairs = standard_pairs();
    let cfg = |lambda, variant| ScalingConfig { lambda, variant, t_final: 0.5, dt: 1e-3, intervals: 50, s: 1.0 };
    let (u0, u1) = low_modes(&g, 1.0);
    let r = scaling_diagnostics(&u0, &u1, Physics::default(), &cfg(1, ModelVariant::LinearFree), &pairs).unwrap();
    assert!(r.max_relative_l2 < 1e-13);
    assert!(r.ratios.iter().all(|x| x.exponent.is_none() && (x.rescaled / x.base - 1.0).abs() < 1e-12));

    let r = scaling_diagnostics(&u0, &u1, Physics::default(), &cfg(2, ModelVariant::LinearFree), &pairs).unwrap();
    assert!(r.max_relative_l2 <= 1e-9);
    for x in &r.ratios {
        assert!((x.exponent.unwrap() - x.predicted_exponent).abs() < 1e-9, "{x:?}");
    }

    let (u0, u1) = low_modes(&g, 0.005);
    let r = scaling_diagnostics(&u0, &u1, Physics::default(), &cfg(2, ModelVariant::Truncated), &pairs).unwrap();
    assert!(r.max_relative_l2 <= 1e-5, "truncated mismatch {}", r.max_relative_l2);
    for x in &r.ratios {
        assert!((x.exponent.unwrap() - x.predicted_exponent).abs() < 1e-6, "{x:?}");
    }
}

#[test]
fn scaling_rejects_unresolved_or_gravity() {
    let g = grid(64, 2.0 * PI);
    let u0 = RealField::from_fn(&g, |a| 0.01 * (15.0 * a).cos());
    let u1 = RealField::zeros(&g);
    let cfg = ScalingConfig { lambda: 2, variant: ModelVariant::Truncated, t_final: 0.1, dt: 1e-3, intervals: 10, s: 1.0 };
    let err = scaling_diagnostics(&u0, &u1, Physics::default(), &cfg, &standard_pairs()).unwrap_err();
    assert!(matches!(err, Error::Resolution { .. }));
    let gravity = Physics { s: 2.0, g: 1.0 };
    assert!(scaling_diagnostics(&u0, &u1, gravity, &ScalingConfig { lambda: 1, ..cfg }, &standard_pairs()).is_err());
}

#[test]
fn diagram_intercepts_are_exact() {
    let fig1 = admissibility_diagram(DiagramKind::Fig1);
    let intercepts: Vec<Ratio> = fig1.iter().map(|l| l.p_intercept()).collect();
    assert!(intercepts.contains(&Ratio::new(1, 5)) && intercepts.contains(&Ratio::new(2, 5)));
    assert!(fig1.iter().all(|l| l.q_intercept() == Ratio::new(1, 2) || l.q_intercept() == Ratio::new(1, 1)));
    for kind in [DiagramKind::Fig1a, DiagramKind::Fig3] {
        let lines = admissibility_diagram(kind);
        assert_eq!(lines[0].p_intercept(), Ratio::new(1, 4));
        assert_eq!(lines[1].p_intercept(), Ratio::new(1, 2));
        assert_eq!(lines[2].p_intercept(), Ratio::new(1, 1));
    }
}
