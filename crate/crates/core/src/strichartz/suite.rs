use serde::{Deserialize, Serialize};

use super::pairs::AdmissiblePair;
use super::samples::Samples;
use crate::error::{Error, Result};
use crate::parametrix::band_leakage;
use crate::spectral::{mixed_norm, sobolev_norm, Band, DyadicPartition, Grid, MixedNormSpec, RealField};
use crate::util::{fit_line, LinearFit};
use crate::vortex_sheet::Physics;

/// Largest energy fraction of the data allowed outside the enlarged band in semiclassical mode.
pub const BAND_LEAKAGE_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SuiteMode {
    /// Whole sample window with derivative order `s − 1/p`. With a band, the window is also
    /// split into `≈2^{j/2}` pieces whose semiclassical norms are summed.
    Fixed { band: Option<i32> },
    /// Window `[start, start + 2^{−j/2}T]` with derivative order `s − 1/(2p)`.
    Semiclassical { j: i32, t_scale: f64, start: f64 },
}

/// `(Σ_k N_k^p)^{1/p}` over consecutive windows, `N_k` the semiclassical norm on window `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubintervalSum {
    pub windows: usize,
    pub norms: Vec<f64>,
    pub summed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrichartzReport {
    pub pair: AdmissiblePair,
    pub mode: SuiteMode,
    pub s: f64,
    pub derivative_order: f64,
    pub window: (f64, f64),
    pub samples: usize,
    /// `‖D^{order}u‖_{L^p_tL^q_α}`.
    pub norm: f64,
    /// `‖u₀‖_{H^s} + ‖u₁‖_{H^{s−3/2}}`.
    pub data_norm: f64,
    pub ratio: f64,
    pub endpoint: bool,
    pub subintervals: Option<SubintervalSum>,
}

pub fn data_norm(u0: &RealField, u1: &RealField, s: f64) -> f64 {
    sobolev_norm(u0, s) + sobolev_norm(u1, s - 1.5)
}

fn ratio(norm: f64, data: f64) -> f64 {
    if data > 0.0 {
        norm / data
    } else if norm == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn norm_on(samples: &Samples, range: (usize, usize), pair: AdmissiblePair, order: f64) -> Result<f64> {
    let (i, j) = range;
    let spec = MixedNormSpec::new(pair.p, pair.q, order, (samples.times[i], samples.times[j]))?;
    mixed_norm(&samples.u[i..=j], &spec)
}

fn check_band(samples: &Samples, j: i32) -> Result<()> {
    for (name, f) in [("u0", &samples.u0), ("u1", &samples.u1)] {
        let leak = band_leakage(f, j);
        if f.max_abs() > 0.0 && leak > BAND_LEAKAGE_LIMIT {
            return Err(Error::WindowMismatch(format!("{name} leaks {leak:.2e} of its energy outside band {j}")));
        }
    }
    Ok(())
}

/// Strichartz norms and their ratios to the data norm for each pair.
pub fn strichartz_suite(samples: &Samples, s: f64, pairs: &[AdmissiblePair], mode: SuiteMode) -> Result<Vec<StrichartzReport>> {
    let data = data_norm(&samples.u0, &samples.u1, s);
    let last = samples.times.len() - 1;
    let range = match mode {
        SuiteMode::Fixed { .. } => (0, last),
        SuiteMode::Semiclassical { j, t_scale, start } => {
            if !(t_scale > 0.0) {
                return Err(Error::InvalidInput(format!("t_scale must be positive, got {t_scale}")));
            }
            check_band(samples, j)?;
            samples.index_range(start, start + t_scale * 2f64.powf(-0.5 * j as f64))?
        }
    };
    let mut out = Vec::with_capacity(pairs.len());
    for &pair in pairs {
        if pair.defect() > super::pairs::ADMISSIBILITY_TOLERANCE {
            return Err(Error::InvalidInput(format!("pair {pair} is not admissible")));
        }
        let (order, subintervals) = match mode {
            SuiteMode::Fixed { band } => {
                if pair.is_endpoint() {
                    return Err(Error::InvalidInput("the endpoint q = ∞ is excluded from fixed-time suites".into()));
                }
                let sub = match band {
                    Some(j) => Some(subinterval_sum(samples, pair, s, j)?),
                    None => None,
                };
                (s - 1.0 / pair.p, sub)
            }
            SuiteMode::Semiclassical { .. } => (s - 0.5 / pair.p, None),
        };
        let norm = norm_on(samples, range, pair, order)?;
        out.push(StrichartzReport {
            pair,
            mode,
            s,
            derivative_order: order,
            window: (samples.times[range.0], samples.times[range.1]),
            samples: range.1 - range.0 + 1,
            norm,
            data_norm: data,
            ratio: ratio(norm, data),
            endpoint: pair.is_endpoint(),
            subintervals,
        });
    }
    Ok(out)
}

fn subinterval_sum(samples: &Samples, pair: AdmissiblePair, s: f64, j: i32) -> Result<SubintervalSum> {
    let last = samples.times.len() - 1;
    let windows = (2f64.powf(0.5 * j as f64).round() as usize).max(1);
    if last < windows {
        return Err(Error::WindowMismatch(format!("{} samples cannot be split into {windows} windows", last + 1)));
    }
    let cuts: Vec<usize> = (0..=windows).map(|k| (k as f64 * last as f64 / windows as f64).round() as usize).collect();
    let norms = cuts
        .windows(2)
        .map(|c| norm_on(samples, (c[0], c[1]), pair, s - 0.5 / pair.p))
        .collect::<Result<Vec<_>>>()?;
    let summed = norms.iter().map(|n| n.powf(pair.p)).sum::<f64>().powf(1.0 / pair.p);
    Ok(SubintervalSum { windows, norms, summed })
}

/// Band-localized data families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum BandData {
    /// `cos(2^j α)`; `2^j` must be a grid wavenumber.
    SingleMode,
    /// `exp(−(d/width)²)cos(2^j d)` around the domain center, projected onto band `j`.
    Packet { width: f64 },
}

/// `u₀` of the family at band `j`.
pub fn band_data(grid: &Grid, j: i32, family: BandData) -> Result<RealField> {
    let k = 2f64.powi(j);
    let needed = 2f64.powf(j as f64 + 0.75);
    if needed > grid.xi_max() {
        return Err(Error::Resolution { band: j, needed, resolved: grid.xi_max() });
    }
    match family {
        BandData::SingleMode => {
            let m = k / grid.dk();
            if (m - m.round()).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!("2^{j} is not a wavenumber of a grid of length {}", grid.length())));
            }
            Ok(RealField::from_fn(grid, |a| (k * a).cos()))
        }
        BandData::Packet { width } => {
            if !(width > 0.0) {
                return Err(Error::InvalidInput(format!("packet width must be positive, got {width}")));
            }
            let c = 0.5 * grid.length();
            let raw = RealField::from_fn(grid, |a| (-((a - c) / width).powi(2)).exp() * (k * (a - c)).cos());
            DyadicPartition::new(1.0, grid)?.project(&raw, Band::Dyadic(j))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSweepRow {
    pub j: i32,
    pub pair: AdmissiblePair,
    pub fixed_ratio: f64,
    pub semiclassical_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFit {
    pub pair: AdmissiblePair,
    /// `log₂` fixed-mode ratio against `j`.
    pub fit: LinearFit,
    /// The summation loss `1/(2p)`.
    pub predicted_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSweep {
    pub rows: Vec<BandSweepRow>,
    pub fits: Vec<PairFit>,
}

/// Free flow of `(band_data, 0)` per band: fixed-mode ratios on `[0, t_final]` and
/// semiclassical ratios on `[0, 2^{−j/2}t_final]`, each with `count` samples.
pub fn strichartz_band_sweep(
    grid: &Grid,
    bands: &[i32],
    family: BandData,
    s: f64,
    pairs: &[AdmissiblePair],
    t_final: f64,
    count: usize,
    physics: Physics,
) -> Result<BandSweep> {
    let mut rows = Vec::new();
    for &j in bands {
        let u0 = band_data(grid, j, family)?;
        let u1 = RealField::zeros(grid);
        let fixed = Samples::free_flow(&u0, &u1, physics, t_final, count)?;
        let fixed = strichartz_suite(&fixed, s, pairs, SuiteMode::Fixed { band: None })?;
        let h = t_final * 2f64.powf(-0.5 * j as f64);
        let semi = Samples::free_flow(&u0, &u1, physics, h, count)?;
        let semi = strichartz_suite(&semi, s, pairs, SuiteMode::Semiclassical { j, t_scale: t_final, start: 0.0 })?;
        for (f, sc) in fixed.iter().zip(&semi) {
            rows.push(BandSweepRow { j, pair: f.pair, fixed_ratio: f.ratio, semiclassical_ratio: sc.ratio });
        }
    }
    let fits = pairs
        .iter()
        .map(|&pair| {
            let (xs, ys): (Vec<f64>, Vec<f64>) =
                rows.iter().filter(|r| r.pair == pair).map(|r| (r.j as f64, r.fixed_ratio.log2())).unzip();
            PairFit { pair, fit: fit_line(&xs, &ys), predicted_loss: 0.5 / pair.p }
        })
        .collect();
    Ok(BandSweep { rows, fits })
}
