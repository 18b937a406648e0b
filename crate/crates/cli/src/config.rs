use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use capwave::evolution::ModelVariant;
use capwave::linear::{CoefficientField, Forcing};
use capwave::parametrix::{KernelConfig, PhaseConfig, Sign};
use capwave::spectral::{Grid, GridSpec, RealField, C64};
use capwave::strichartz::{AdmissiblePair, BandData, DiagramKind, ScalingConfig};
use capwave::vortex_sheet::Physics;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Run name; defaults to the config file stem.
    #[serde(default)]
    pub name: Option<String>,
    pub grid: GridSpec,
    #[serde(default)]
    pub physics: Physics,
    /// Seed for the `random` data family.
    #[serde(default)]
    pub seed: u64,
    /// Output directory, relative to the config file.
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub experiment: Experiment,
    #[serde(default)]
    pub assertions: Vec<Assertion>,
}

/// Bounds on one named observable of the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertion {
    pub observable: String,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Simulate(Simulate),
    Linear(Linear),
    Parametrix(ParametrixRun),
    Dispersion(Dispersion),
    Strichartz(Strichartz),
    Smoothing(Smoothing),
    Energy(Energy),
    Diagram(Diagram),
}

impl Experiment {
    pub fn kind(&self) -> Kind {
        match self {
            Experiment::Simulate(_) => Kind::Simulate,
            Experiment::Linear(_) => Kind::Linear,
            Experiment::Parametrix(_) => Kind::Parametrix,
            Experiment::Dispersion(_) => Kind::Dispersion,
            Experiment::Strichartz(_) => Kind::Strichartz,
            Experiment::Smoothing(_) => Kind::Smoothing,
            Experiment::Energy(_) => Kind::Energy,
            Experiment::Diagram(_) => Kind::Diagram,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Simulate,
    Linear,
    Parametrix,
    Dispersion,
    Strichartz,
    Smoothing,
    Energy,
    Diagram,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::Simulate,
        Kind::Linear,
        Kind::Parametrix,
        Kind::Dispersion,
        Kind::Strichartz,
        Kind::Smoothing,
        Kind::Energy,
        Kind::Diagram,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::Linear => "linear",
            Kind::Parametrix => "parametrix",
            Kind::Dispersion => "dispersion",
            Kind::Strichartz => "strichartz",
            Kind::Smoothing => "smoothing",
            Kind::Energy => "energy",
            Kind::Diagram => "diagram",
        }
    }

    pub fn parse(name: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == name)
    }
}

fn default_stride() -> usize {
    1
}

fn default_one_u32() -> u32 {
    1
}

fn default_one() -> f64 {
    1.0
}

fn default_samples() -> usize {
    201
}

fn default_fidelity_samples() -> usize {
    8
}

fn default_times() -> usize {
    8
}

fn default_window_start() -> f64 {
    0.05
}

fn default_pairs() -> Vec<f64> {
    vec![5.0, 6.0, 8.0]
}

fn default_band_data() -> BandData {
    BandData::Packet { width: 1.0 }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Simulate {
    pub u0: DataSpec,
    pub u1: DataSpec,
    pub variant: ModelVariant,
    pub t_final: f64,
    pub dt: f64,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    /// Energy order recorded at every step.
    #[serde(default = "default_one_u32")]
    pub energy_order: u32,
    /// Integrate back to the start and report the round-trip error.
    #[serde(default)]
    pub reverse: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linear {
    pub u0: DataSpec,
    pub u1: DataSpec,
    #[serde(default)]
    pub coefficient: CoefficientSpec,
    #[serde(default = "zero_forcing")]
    pub forcing: Forcing,
    pub t_final: f64,
    pub dt: f64,
    /// Energy order: a nonnegative integer or a value in `[-3/2, 0)`.
    #[serde(default = "default_one")]
    pub s: f64,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
}

fn zero_forcing() -> Forcing {
    Forcing::Zero
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametrixRun {
    #[serde(default)]
    pub coefficient: CoefficientSpec,
    pub bands: Vec<i32>,
    #[serde(default = "default_band_data")]
    pub band_data: BandData,
    /// `u₁ = velocity · 2^{3j/2} · H u₀`.
    #[serde(default)]
    pub velocity: f64,
    #[serde(default)]
    pub phase: PhaseConfig,
    /// Sample intervals of the fidelity and residual series.
    #[serde(default = "default_fidelity_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dispersion {
    #[serde(default)]
    pub coefficient: CoefficientSpec,
    pub bands: Vec<i32>,
    #[serde(default = "plus")]
    pub sign: Sign,
    /// Window start as a fraction of the semiclassical horizon.
    #[serde(default = "default_window_start")]
    pub window_start: f64,
    #[serde(default = "default_times")]
    pub times: usize,
    #[serde(default)]
    pub phase: PhaseConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
}

fn plus() -> Sign {
    Sign::Plus
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Strichartz {
    pub bands: Vec<i32>,
    #[serde(default = "default_band_data")]
    pub band_data: BandData,
    #[serde(default = "default_one")]
    pub s: f64,
    /// Exponents `p ≥ 4`; `q` follows from `2/p + 1/q = 1/2`.
    #[serde(default = "default_pairs")]
    pub pairs: Vec<f64>,
    #[serde(default = "default_one")]
    pub t_final: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub scaling: Option<ScalingRun>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingRun {
    /// Grid of the scaling runs; defaults to the experiment grid.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    pub u0: DataSpec,
    pub u1: DataSpec,
    pub lambda: u32,
    pub variant: ModelVariant,
    pub t_final: f64,
    pub dt: f64,
    pub intervals: usize,
    #[serde(default = "default_one")]
    pub s: f64,
}

impl ScalingRun {
    pub fn config(&self) -> ScalingConfig {
        ScalingConfig {
            lambda: self.lambda,
            variant: self.variant,
            t_final: self.t_final,
            dt: self.dt,
            intervals: self.intervals,
            s: self.s,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Smoothing {
    pub bands: Vec<i32>,
    #[serde(default = "default_band_data")]
    pub band_data: BandData,
    #[serde(default = "default_one")]
    pub s: f64,
    #[serde(default = "default_one")]
    pub rho: f64,
    #[serde(default = "default_one")]
    pub t_final: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Energy {
    pub u0: DataSpec,
    pub u1: DataSpec,
    pub variant: ModelVariant,
    pub t_final: f64,
    pub dt: f64,
    #[serde(default = "default_one_u32")]
    pub s: u32,
    #[serde(default = "default_true")]
    pub reverse: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagram {
    pub figure: DiagramKind,
}

/// Closed-form data families and spectrum files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    Zero,
    /// `amplitude · cos(wavenumber · α + phase)`.
    Mode {
        wavenumber: f64,
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `amplitude · exp(−((α − center)/width)²) · cos(wavenumber · (α − center))`; center defaults to `L/2`.
    Packet {
        amplitude: f64,
        width: f64,
        wavenumber: f64,
        #[serde(default)]
        center: Option<f64>,
    },
    /// `Σ_{m=1}^{modes} m^{−decay}(a_m cos + b_m sin)` with seeded uniform `a_m, b_m`, scaled to sup norm `amplitude`.
    Random { modes: usize, decay: f64, amplitude: f64 },
    /// JSON array `[[re, im], ...]` of one-sided coefficients `f̂_0, f̂_1, ...`; path relative to the config.
    Spectrum { path: PathBuf },
}

/// `V(t, α)` of the linearized operator.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    #[default]
    Zero,
    Constant { value: f64 },
    /// `amplitude · sin(wavenumber · α)`.
    Sine {
        amplitude: f64,
        #[serde(default = "default_one")]
        wavenumber: f64,
    },
    /// `amplitude · sin(frequency · t) · sin(wavenumber · α)`, sampled at `time_samples + 1` times.
    Modulated {
        amplitude: f64,
        #[serde(default = "default_one")]
        wavenumber: f64,
        #[serde(default = "default_one")]
        frequency: f64,
        #[serde(default = "default_time_samples")]
        time_samples: usize,
    },
}

fn default_time_samples() -> usize {
    64
}

fn check_periodic(grid: &Grid, wavenumber: f64, what: &str) -> Result<(), CliError> {
    let m = wavenumber * grid.length() / TAU;
    if !wavenumber.is_finite() || (m - m.round()).abs() > 1e-9 {
        return Err(CliError::Config(format!("{what} wavenumber {wavenumber} is not periodic on a domain of length {}", grid.length())));
    }
    Ok(())
}

impl DataSpec {
    /// `stream` separates the random draws of `u₀` and `u₁`.
    pub fn build(&self, grid: &Grid, seed: u64, stream: u64, base: &Path) -> Result<RealField, CliError> {
        match self {
            DataSpec::Zero => Ok(RealField::zeros(grid)),
            DataSpec::Mode { wavenumber, amplitude, phase } => {
                check_periodic(grid, *wavenumber, "mode")?;
                Ok(RealField::from_fn(grid, |a| amplitude * (wavenumber * a + phase).cos()))
            }
            DataSpec::Packet { amplitude, width, wavenumber, center } => {
                if !(*width > 0.0) {
                    return Err(CliError::Config(format!("packet width must be positive, got {width}")));
                }
                let c = center.unwrap_or(0.5 * grid.length());
                let l = grid.length();
                Ok(RealField::from_fn(grid, |a| {
                    // Nearest periodic image of the center.
                    let d = (a - c + 0.5 * l).rem_euclid(l) - 0.5 * l;
                    amplitude * (-(d / width).powi(2)).exp() * (wavenumber * d).cos()
                }))
            }
            DataSpec::Random { modes, decay, amplitude } => {
                if *modes == 0 || *modes >= grid.n() / 2 {
                    return Err(CliError::Config(format!("random data needs 1 <= modes < N/2, got {modes}")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(stream);
                let coeffs: Vec<(f64, f64)> = (1..=*modes)
                    .map(|m| {
                        let w = (m as f64).powf(-decay);
                        (w * rng.gen_range(-1.0..1.0), w * rng.gen_range(-1.0..1.0))
                    })
                    .collect();
                let k = TAU / grid.length();
                let f = RealField::from_fn(grid, |a| {
                    coeffs.iter().enumerate().map(|(i, (c, s))| {
                        let x = (i + 1) as f64 * k * a;
                        c * x.cos() + s * x.sin()
                    })
                    .sum()
                });
                let sup = f.max_abs();
                Ok(if sup > 0.0 { f.scale(amplitude / sup) } else { f })
            }
            DataSpec::Spectrum { path } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| CliError::Config(format!("cannot read spectrum file {}: {e}", full.display())))?;
                let one_sided: Vec<[f64; 2]> = serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("spectrum file {}: {e}", full.display())))?;
                let n = grid.n();
                if one_sided.len() > n / 2 + 1 {
                    return Err(CliError::Config(format!("spectrum has {} modes, grid resolves {}", one_sided.len(), n / 2 + 1)));
                }
                let mut spec = vec![C64::new(0.0, 0.0); n];
                for (m, &[re, im]) in one_sided.iter().enumerate() {
                    let c = C64::new(re, im);
                    if m == 0 || m == n / 2 {
                        spec[m] = C64::new(re, 0.0);
                    } else {
                        spec[m] = c;
                        spec[n - m] = c.conj();
                    }
                }
                Ok(RealField::from_spectrum(grid, &spec)?)
            }
        }
    }
}

impl CoefficientSpec {
    pub fn build(&self, grid: &Grid, t_final: f64) -> Result<CoefficientField, CliError> {
        match self {
            CoefficientSpec::Zero => Ok(CoefficientField::zero(grid)),
            CoefficientSpec::Constant { value } => Ok(CoefficientField::constant(grid, RealField::from_fn(grid, |_| *value))),
            CoefficientSpec::Sine { amplitude, wavenumber } => {
                check_periodic(grid, *wavenumber, "coefficient")?;
                Ok(CoefficientField::constant(grid, RealField::from_fn(grid, |a| amplitude * (wavenumber * a).sin())))
            }
            CoefficientSpec::Modulated { amplitude, wavenumber, frequency, time_samples } => {
                check_periodic(grid, *wavenumber, "coefficient")?;
                Ok(CoefficientField::from_fn(grid, 0.0, t_final, *time_samples, |t, a| {
                    amplitude * (frequency * t).sin() * (wavenumber * a).sin()
                })?)
            }
        }
    }
}

pub fn pairs_from(ps: &[f64]) -> Result<Vec<AdmissiblePair>, CliError> {
    if ps.is_empty() {
        return Err(CliError::Config("need at least one exponent p".into()));
    }
    ps.iter().map(|&p| AdmissiblePair::from_p(p).map_err(CliError::from)).collect()
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that do not need the numerics.
    pub fn validate(&self) -> Result<(), CliError> {
        self.grid.build()?;
        self.physics.validate()?;
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name} must be positive, got {x}")))
            }
        };
        let bands = |b: &[i32]| {
            if b.is_empty() {
                Err(CliError::Config("need at least one band".into()))
            } else {
                Ok(())
            }
        };
        match &self.experiment {
            Experiment::Simulate(e) => {
                positive("t_final", e.t_final)?;
                positive("dt", e.dt)?;
                if e.energy_order == 0 {
                    return Err(CliError::Config("energy_order must be >= 1".into()));
                }
            }
            Experiment::Linear(e) => {
                positive("t_final", e.t_final)?;
                positive("dt", e.dt)?;
            }
            Experiment::Parametrix(e) => bands(&e.bands)?,
            Experiment::Dispersion(e) => {
                bands(&e.bands)?;
                if !(e.window_start >= 0.05 && e.window_start < 1.0) {
                    return Err(CliError::Config(format!("window_start must lie in [0.05, 1), got {}", e.window_start)));
                }
            }
            Experiment::Strichartz(e) => {
                bands(&e.bands)?;
                pairs_from(&e.pairs)?;
                positive("t_final", e.t_final)?;
                if let Some(g) = e.scaling.as_ref().and_then(|s| s.grid) {
                    g.build()?;
                }
            }
            Experiment::Smoothing(e) => {
                bands(&e.bands)?;
                positive("t_final", e.t_final)?;
            }
            Experiment::Energy(e) => {
                positive("t_final", e.t_final)?;
                positive("dt", e.dt)?;
                if e.s == 0 {
                    return Err(CliError::Config("energy order s must be >= 1".into()));
                }
            }
            Experiment::Diagram(_) => {}
        }
        for a in &self.assertions {
            if a.min.is_none() && a.max.is_none() {
                return Err(CliError::Config(format!("assertion on `{}` has neither min nor max", a.observable)));
            }
        }
        Ok(())
    }
}
