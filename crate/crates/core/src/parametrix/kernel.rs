use serde::{Deserialize, Serialize};

use super::phase::{chi2, chi2_tilde, PhaseFunction};
use crate::error::{Error, Result};
use crate::spectral::C64;
use crate::util::{fit_loglog, geometric_mean, LinearFit};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    /// Fixed spatial point `α`.
    pub alpha: f64,
    /// Points in the sup search grid (`β` for `K`, `α'` for `F F*`).
    pub search_points: usize,
    /// Initial quadrature nodes per octave of `ξ`.
    pub per_octave: usize,
    /// Relative change between successive doublings accepted as converged.
    pub tolerance: f64,
    pub max_doublings: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { alpha: 0.0, search_points: 512, per_octave: 64, tolerance: 1e-7, max_doublings: 8 }
    }
}

/// Critical frequency `ξ_c = (4/9)((β − α)/t)²` of `(α − β)ξ + tξ^{3/2}`.
pub fn xi_critical(t: f64, alpha: f64, beta: f64) -> f64 {
    4.0 / 9.0 * ((beta - alpha) / t).powi(2)
}

/// Stationary-phase magnitude `(2π/φ_ξξ(ξ_c))^{1/2}χ̃₂(2^{−j}ξ_c)` with `φ_ξξ = (3/4)tξ_c^{−1/2}`.
pub fn stationary_prediction(t: f64, alpha: f64, beta: f64, j: i32) -> f64 {
    let xc = xi_critical(t, alpha, beta);
    let curv = 0.75 * t / xc.sqrt();
    (std::f64::consts::TAU / curv).sqrt() * chi2_tilde(xc / 2f64.powi(j))
}

/// `ϑ(t, α_b, ·)` at the tensor `ξ` nodes for each `α_b`.
fn theta_lines(phase: &PhaseFunction, t: f64, alphas: &[f64]) -> Result<Vec<Vec<f64>>> {
    let slice = phase.slice(t)?;
    let g = phase.grid();
    let nxi = phase.xis().len();
    let mut lines = vec![vec![0.0; nxi]; alphas.len()];
    for ix in 0..nxi {
        let vals = g.interpolate(slice.row(ix)[0], alphas);
        for (line, v) in lines.iter_mut().zip(vals) {
            line[ix] = v;
        }
    }
    Ok(lines)
}

/// Per-node data shared by all search points: `ξ`, `ξ^{3/2}`, `χ₂` and the `log ξ` stencil.
struct Node {
    xi: f64,
    w32: f64,
    chi: f64,
    start: usize,
    lw: Vec<f64>,
}

fn node(phase: &PhaseFunction, xi: f64) -> Node {
    let chi = chi2(xi / 2f64.powi(phase.j));
    let (start, lw) = if chi > 0.0 { phase.xi_weights(xi) } else { (0, Vec::new()) };
    Node { xi, w32: xi.powf(1.5), chi, start, lw }
}

fn interp(n: &Node, line: &[f64]) -> f64 {
    n.lw.iter().enumerate().map(|(k, w)| w * line[n.start + k]).sum()
}

/// Trapezoid rule in `s = log ξ` over the support of `χ̃₂^j`, doubled until successive
/// results agree to `tolerance` (relative to the largest magnitude). `level` returns
/// `Σ_nodes weight·e^{iΦ_b}` for each search point `b`.
fn adaptive<F>(phase: &PhaseFunction, cfg: &KernelConfig, mut level: F) -> Result<(Vec<C64>, usize)>
where
    F: FnMut(&[Node]) -> Vec<C64>,
{
    let e = 2f64.powf(0.25);
    let (a, b) = ((2f64.powi(phase.j - 2) / e).ln(), (2f64.powi(phase.j + 2) * e).ln());
    let octaves = (b - a) / std::f64::consts::LN_2;
    let mut n = (octaves * cfg.per_octave as f64).ceil() as usize;
    let mut h = (b - a) / n as f64;
    let nodes: Vec<Node> = (1..n).map(|i| node(phase, (a + i as f64 * h).exp())).collect();
    let mut sum = level(&nodes);
    let mut current: Vec<C64> = sum.iter().map(|s| s * h).collect();
    let mut change = f64::INFINITY;
    for _ in 0..cfg.max_doublings {
        let mids: Vec<Node> = (0..n).map(|i| node(phase, (a + (i as f64 + 0.5) * h).exp())).collect();
        let add = level(&mids);
        for (s, x) in sum.iter_mut().zip(add) {
            *s += x;
        }
        n *= 2;
        h *= 0.5;
        let next: Vec<C64> = sum.iter().map(|s| s * h).collect();
        let top = next.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        change = next.iter().zip(&current).fold(0.0f64, |m, (x, y)| m.max((x - y).norm())) / top.max(f64::MIN_POSITIVE);
        current = next;
        if change <= cfg.tolerance {
            return Ok((current, n - 1));
        }
    }
    Err(Error::Quadrature { change })
}

/// `K(t, α, β) = ∫ e^{i(φ̃(t,α,ξ) − βξ)} χ̃₂^j(ξ) dξ` over `ξ > 0`, with the glued phase
/// `φ̃ = αξ ± ξ^{3/2}(t + χ₂^j(ξ)ϑ(t, α, ξ))`. Returns the values and the final node count.
pub fn kernel_values(phase: &PhaseFunction, t: f64, betas: &[f64], cfg: &KernelConfig) -> Result<(Vec<C64>, usize)> {
    let sg = phase.sign.factor();
    let line = theta_lines(phase, t, &[cfg.alpha])?.swap_remove(0);
    let j = phase.j;
    adaptive(phase, cfg, |nodes| {
        let c: Vec<(f64, C64)> = nodes
            .iter()
            .map(|nd| {
                let th = if nd.chi > 0.0 { nd.chi * interp(nd, &line) } else { 0.0 };
                let ph = cfg.alpha * nd.xi + sg * nd.w32 * (t + th);
                let w = chi2_tilde(nd.xi / 2f64.powi(j)) * nd.xi;
                (nd.xi, C64::from_polar(w, ph))
            })
            .collect();
        betas.iter().map(|&b| c.iter().map(|&(xi, ci)| ci * C64::from_polar(1.0, -b * xi)).sum()).collect()
    })
}

/// Maximum of `|values|` over a search grid, refined once around the best point.
fn sup_search<F>(lo: f64, hi: f64, points: usize, mut eval: F) -> Result<(f64, f64, usize)>
where
    F: FnMut(&[f64]) -> Result<(Vec<C64>, usize)>,
{
    let pts: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
    let (vals, nodes) = eval(&pts)?;
    let (ib, _) = vals.iter().enumerate().fold((0, -1.0), |acc, (i, v)| if v.norm() > acc.1 { (i, v.norm()) } else { acc });
    let step = (hi - lo) / (points - 1) as f64;
    let fine: Vec<f64> = (0..=16).map(|k| pts[ib] - step + step * k as f64 / 8.0).collect();
    let (fv, n2) = eval(&fine)?;
    let mut best = (vals[ib].norm(), pts[ib]);
    for (x, v) in fine.iter().zip(&fv) {
        if v.norm() > best.0 {
            best = (v.norm(), *x);
        }
    }
    Ok((best.0, best.1, nodes.max(n2)))
}

/// Search interval of the stationary point `x = x0 + σ·(3/2)·τ·ξ^{1/2}` over the `χ̃₂` support.
fn stationary_range(j: i32, sign: f64, x0: f64, tau: f64) -> (f64, f64) {
    let e = 2f64.powf(0.25);
    let (xa, xb) = (2f64.powi(j - 2) / e, 2f64.powi(j + 2) * e);
    let ends = [x0 + sign * 1.5 * tau * xa.sqrt(), x0 + sign * 1.5 * tau * xb.sqrt()];
    let (lo, hi) = (ends[0].min(ends[1]), ends[0].max(ends[1]));
    let margin = 0.1 * (hi - lo) + 8.0 * std::f64::consts::TAU / xb;
    (lo - margin, hi + margin)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub t: f64,
    /// `sup_β |K(t, α, β)|`.
    pub sup: f64,
    pub beta_at_sup: f64,
    /// Stationary-phase magnitude at `beta_at_sup`.
    pub predicted: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionKernelProbe {
    pub j: i32,
    pub alpha: f64,
    pub samples: Vec<KernelSample>,
    /// Fit of `log₂ sup|K|` against `log₂ t`.
    pub t_fit: LinearFit,
    /// Geometric mean of `sup|K|·t^{1/2}` over the window.
    pub prefactor: f64,
}

/// `sup_β |K|` at one time.
pub fn kernel_sup(phase: &PhaseFunction, t: f64, cfg: &KernelConfig) -> Result<KernelSample> {
    let (lo, hi) = stationary_range(phase.j, phase.sign.factor(), cfg.alpha, t);
    let (sup, beta, nodes) = sup_search(lo, hi, cfg.search_points.max(3), |b| kernel_values(phase, t, b, cfg))?;
    Ok(KernelSample { t, sup, beta_at_sup: beta, predicted: stationary_prediction(t, cfg.alpha, beta, phase.j), nodes })
}

/// Kernel magnitudes at `n_times` log-spaced times of `window`, which must lie in
/// `[0.05·2^{−j/2}T, 2^{−j/2}T]`.
pub fn kernel_probe(phase: &PhaseFunction, window: (f64, f64), n_times: usize, cfg: &KernelConfig) -> Result<DispersionKernelProbe> {
    let h = phase.horizon();
    let (t0, t1) = window;
    if !(t0 >= 0.05 * h * (1.0 - 1e-12) && t1 <= h * (1.0 + 1e-12) && t0 < t1) || n_times < 2 {
        return Err(Error::InvalidInput(format!("probe window [{t0}, {t1}] must lie in [0.05·{h}, {h}] with ≥ 2 times")));
    }
    let times: Vec<f64> = (0..n_times).map(|i| t0 * (t1 / t0).powf(i as f64 / (n_times - 1) as f64)).collect();
    let samples = times.iter().map(|&t| kernel_sup(phase, t.min(h), cfg)).collect::<Result<Vec<_>>>()?;
    let sups: Vec<f64> = samples.iter().map(|s| s.sup).collect();
    let t_fit = fit_loglog(&times, &sups, 2.0);
    let prefactor = geometric_mean(&samples.iter().map(|s| s.sup * s.t.sqrt()).collect::<Vec<_>>());
    Ok(DispersionKernelProbe { j: phase.j, alpha: cfg.alpha, samples, t_fit, prefactor })
}

/// Fit of `log₂(prefactor)` against `j` across bands (slope ≈ 1/4 for the `2^{j/4}` loss).
pub fn prefactor_fit(probes: &[DispersionKernelProbe]) -> LinearFit {
    let js: Vec<f64> = probes.iter().map(|p| 2f64.powi(p.j)).collect();
    let ps: Vec<f64> = probes.iter().map(|p| p.prefactor).collect();
    fit_loglog(&js, &ps, 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FfStarSample {
    pub t: f64,
    pub t_prime: f64,
    /// `sup_{α'} |K₁(α, α')|`.
    pub sup: f64,
    pub alpha_prime_at_sup: f64,
    pub nodes: usize,
}

/// `sup_{α'} |K₁(α, α')|` for the kernel `∫ e^{i(φ̃(t',α,ξ) − φ̃(t,α',ξ))} (χ̃₂^j)² dξ` of `F(t')F*(t)`.
pub fn ff_star_probe(phase: &PhaseFunction, t: f64, t_prime: f64, cfg: &KernelConfig) -> Result<FfStarSample> {
    let sg = phase.sign.factor();
    let j = phase.j;
    let a = cfg.alpha;
    let fixed = theta_lines(phase, t_prime, &[a])?.swap_remove(0);
    let (lo, hi) = stationary_range(j, sg, a, t_prime - t);
    let eval = |alphas: &[f64]| -> Result<(Vec<C64>, usize)> {
        let lines = theta_lines(phase, t, alphas)?;
        adaptive(phase, cfg, |nodes| {
            let mut out = vec![C64::new(0.0, 0.0); alphas.len()];
            for nd in nodes {
                let w = chi2_tilde(nd.xi / 2f64.powi(j)).powi(2) * nd.xi;
                if w == 0.0 {
                    continue;
                }
                let th0 = if nd.chi > 0.0 { interp(nd, &fixed) } else { 0.0 };
                for (o, (&ap, line)) in out.iter_mut().zip(alphas.iter().zip(&lines)) {
                    let th = if nd.chi > 0.0 { nd.chi * (th0 - interp(nd, line)) } else { 0.0 };
                    let ph = (a - ap) * nd.xi + sg * nd.w32 * (t_prime - t + th);
                    *o += C64::from_polar(w, ph);
                }
            }
            out
        })
    };
    let (sup, ap, nodes) = sup_search(lo, hi, cfg.search_points.max(3), eval)?;
    Ok(FfStarSample { t, t_prime, sup, alpha_prime_at_sup: ap, nodes })
}

/// `F F*` magnitudes at `t' = t_ref + τ` and the fit of `log₂ sup` against `log₂ |τ|`.
pub fn ff_star_fit(phase: &PhaseFunction, t_ref: f64, taus: &[f64], cfg: &KernelConfig) -> Result<(Vec<FfStarSample>, LinearFit)> {
    let samples = taus.iter().map(|&tau| ff_star_probe(phase, t_ref, t_ref + tau, cfg)).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = taus.iter().map(|t| t.abs()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.sup).collect();
    Ok((samples, fit_loglog(&xs, &ys, 2.0)))
}
