use crate::config::Kind;

const COMMON: &str = "\
common keys:
  name        string, optional        run name (default: config file stem)
  grid        {n, length}             N a power of two >= 4, L > 0
  physics     {s, g}                  default {s: 2, g: 0}
  seed        integer                 seed of the `random` data family (default 0)
  output      path, optional          output directory relative to the config
  assertions  [{observable, min?, max?}]  exit 1 unless every bound holds
data families (u0, u1):
  {family: zero} | {family: mode, wavenumber, amplitude, phase?}
  {family: packet, amplitude, width, wavenumber, center?}
  {family: random, modes, decay, amplitude} | {family: spectrum, path}
coefficients V(t, alpha):
  {kind: zero} | {kind: constant, value} | {kind: sine, amplitude, wavenumber?}
  {kind: modulated, amplitude, wavenumber?, frequency?, time_samples?}
band data: {family: packet, width} | {family: single_mode}
unknown keys are rejected everywhere.";

pub fn summary(kind: Kind) -> &'static str {
    match kind {
        Kind::Simulate => "nonlinear or free evolution of (u, v, theta) with energy history",
        Kind::Linear => "variable-coefficient linear solve with energy audit and residual",
        Kind::Parametrix => "band-wise parametrix against the direct linear solver",
        Kind::Dispersion => "sup of the band kernel against time and the band prefactor",
        Kind::Strichartz => "fixed-time and semiclassical Strichartz ratios, optional scaling check",
        Kind::Smoothing => "weighted local smoothing ratios across bands",
        Kind::Energy => "energy drift, coupling cancellation and time reversal",
        Kind::Diagram => "admissibility diagram line data with exact rational intercepts",
    }
}

fn schema(kind: Kind) -> &'static str {
    match kind {
        Kind::Simulate => "\
experiment:
  kind             \"simulate\"
  u0, u1           data family
  variant          \"full\" | \"truncated\" | \"linear-free\"
  t_final, dt      positive numbers (dt is shrunk to divide t_final)
  snapshot_stride  integer >= 1 (default 1)
  energy_order     integer >= 1 (default 1)
  reverse          bool (default false)
observables: init_residual, steps, dt, energy_drift, dispersive_energy_drift (sum of the k >= 1 terms),
             gronwall_c, final_time, final_u_l2, reversal_error
artifacts: energy.csv, snapshots.csv, energy.svg",
        Kind::Linear => "\
experiment:
  kind             \"linear\"
  u0, u1           data family
  coefficient      coefficient (default zero)
  forcing          {kind: zero} | {kind: mode, wavenumber, amplitude, frequency} | {kind: samples, t0, dt, values}
  t_final, dt      positive numbers
  s                energy order: integer >= 0 or in [-3/2, 0) (default 1)
  snapshot_stride  integer >= 1 (default 1)
observables: steps, energy_drift, growth_rate, gain_ratio, residual_l2, residual_relative
artifacts: energy.csv, energy.svg",
        Kind::Parametrix => "\
experiment:
  kind        \"parametrix\"
  coefficient coefficient (default zero)
  bands       [j, ...]
  band_data   band data (default packet of width 1)
  velocity    u1 = velocity * 2^(3j/2) * H u0 (default 0)
  phase       {t_scale, steps, xi_per_octave, launch_points, tolerance} (defaults built in)
  samples     sample intervals of the fidelity series (default 8)
observables: fidelity_j<j>, residual_j<j>, leakage_j<j>, fidelity_slope, residual_slope
artifacts: parametrix.csv, fidelity.csv, fidelity.svg",
        Kind::Dispersion => "\
experiment:
  kind          \"dispersion\"
  coefficient   coefficient (default zero)
  bands         [j, ...]
  sign          \"plus\" | \"minus\" (default plus)
  window_start  fraction of the horizon 2^(-j/2) T, in [0.05, 1) (default 0.05)
  times         log-spaced probe times (default 8)
  phase         phase construction settings
  kernel        {alpha, search_points, per_octave, tolerance, max_doublings}
observables: t_slope_j<j>, prefactor_j<j>, prediction_error_j<j>, prefactor_slope
artifacts: kernel.csv, bands.csv, kernel.svg",
        Kind::Strichartz => "\
admissibility: 2/p + 1/q = 1/2 with p >= 4; the endpoint (4, inf) only in semiclassical windows
experiment:
  kind       \"strichartz\"
  bands      [j, ...]
  band_data  band data (default packet of width 1)
  s          regularity (default 1)
  pairs      exponents p, q follows from the relation (default [5, 6, 8])
  t_final    fixed-time window [0, T] (default 1); semiclassical windows are [0, 2^(-j/2) T]
  samples    time samples per window (default 201)
  scaling    optional {grid?, u0, u1, lambda, variant, t_final, dt, intervals, s}
observables: fixed_slope_p<p>, loss_margin_p<p>, semiclassical_max,
             scaling_max_relative_l2, scaling_final_relative_l2, scaling_exponent_defect
artifacts: strichartz.csv, fits.csv, scaling.csv, strichartz.svg",
        Kind::Smoothing => "\
experiment:
  kind       \"smoothing\"
  bands      [j, ...]
  band_data  band data (default packet of width 1)
  s          regularity (default 1)
  rho        weight exponent > 1/2 (default 1)
  t_final    window [0, T] (default 1)
  samples    time samples (default 201)
observables: weighted_ratio_j<j>, unweighted_ratio_j<j>, weighted_variation, unweighted_slope
artifacts: smoothing.csv, smoothing.svg",
        Kind::Energy => "\
experiment:
  kind         \"energy\"
  u0, u1       data family
  variant      \"full\" | \"truncated\" | \"linear-free\"
  t_final, dt  positive numbers
  s            energy order, integer >= 1 (default 1)
  reverse      bool (default true)
observables: coupling_cancellation, equivalence_ratio, energy_drift, gronwall_c, reversal_error
artifacts: coupling.csv, energy.csv, energy.svg",
        Kind::Diagram => "\
experiment:
  kind    \"diagram\"
  figure  \"fig1a\" | \"fig1\" | \"fig3\"
observables: p_intercept_<line>, q_intercept_<line>
artifacts: diagram.csv (exact rationals), diagram.svg",
    }
}

pub fn list() -> String {
    Kind::ALL.iter().map(|k| format!("{:<11} {}\n", k.name(), summary(*k))).collect()
}

pub fn describe(kind: Kind) -> String {
    format!("{}: {}\n\n{}\n\n{}\n", kind.name(), summary(kind), schema(kind), COMMON)
}
