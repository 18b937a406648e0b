//! Small numerical helpers shared across modules: least-squares line fits,
//! uniform-grid Lagrange interpolation and finite-difference stencils.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r2 = if sxx > 0.0 && syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    LinearFit { slope, intercept: my - slope * mx, r2 }
}

/// Fit of `log_base(y)` against `log_base(x)`.
pub fn fit_loglog(xs: &[f64], ys: &[f64], base: f64) -> LinearFit {
    let lb = base.ln();
    let lx: Vec<f64> = xs.iter().map(|x| x.ln() / lb).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln() / lb).collect();
    fit_line(&lx, &ly)
}

/// Lagrange interpolation through `points` consecutive samples of a uniform
/// sequence `values[i] = f(x0 + i h)`, using the stencil nearest to `x`.
pub fn lagrange_uniform(values: &[f64], x0: f64, h: f64, x: f64, points: usize) -> f64 {
    let n = values.len();
    let points = points.min(n);
    let s = (x - x0) / h;
    let start = (s.floor() as isize - (points as isize - 1) / 2).clamp(0, (n - points) as isize) as usize;
    let mut acc = 0.0;
    for i in 0..points {
        let xi = (start + i) as f64;
        let mut w = 1.0;
        for k in 0..points {
            if k != i {
                let xk = (start + k) as f64;
                w *= (s - xk) / (xi - xk);
            }
        }
        acc += w * values[start + i];
    }
    acc
}

/// Start index and weights of the stencil [`lagrange_uniform`] uses at `x`.
pub fn lagrange_weights(n: usize, x0: f64, h: f64, x: f64, points: usize) -> (usize, Vec<f64>) {
    let points = points.min(n);
    let s = (x - x0) / h;
    let start = (s.floor() as isize - (points as isize - 1) / 2).clamp(0, (n - points) as isize) as usize;
    let w = (0..points)
        .map(|i| {
            let xi = (start + i) as f64;
            (0..points)
                .filter(|&k| k != i)
                .map(|k| {
                    let xk = (start + k) as f64;
                    (s - xk) / (xi - xk)
                })
                .product()
        })
        .collect();
    (start, w)
}

/// Lagrange interpolation through arbitrary distinct nodes `xs` with values `ys`.
pub fn lagrange_nonuniform(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
        let mut w = 1.0;
        for (k, &xk) in xs.iter().enumerate() {
            if k != i {
                w *= (x - xk) / (xi - xk);
            }
        }
        acc += w * yi;
    }
    acc
}

/// Finite-difference weights at `z` on nodes `xs` for derivatives `0..=m`
/// (Fornberg's recursion). `w[d][i]` multiplies `f(xs[i])` in the `d`-th derivative.
pub fn fd_weights(z: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Start index of the `points`-wide stencil of a uniform sequence of length `n` nearest to `x`.
pub fn stencil_start(n: usize, x0: f64, h: f64, x: f64, points: usize) -> usize {
    let points = points.min(n);
    let s = (x - x0) / h;
    (s.floor() as isize - (points as isize - 1) / 2).clamp(0, (n - points) as isize) as usize
}

/// Fourth-order first derivative of uniformly spaced samples at index `i`:
/// centered in the interior, one-sided near the ends.
pub fn d1_fourth_order(values: &[f64], h: f64, i: usize) -> f64 {
    let n = values.len();
    assert!(n >= 5, "need at least five samples");
    let f = |k: usize| values[k];
    if i >= 2 && i + 2 < n {
        (f(i - 2) - 8.0 * f(i - 1) + 8.0 * f(i + 1) - f(i + 2)) / (12.0 * h)
    } else if i < 2 {
        // forward/skewed stencils on the first five nodes
        let c: [[f64; 5]; 2] = [
            [-25.0, 48.0, -36.0, 16.0, -3.0],
            [-3.0, -10.0, 18.0, -6.0, 1.0],
        ];
        (0..5).map(|k| c[i][k] * f(k)).sum::<f64>() / (12.0 * h)
    } else {
        let j = n - 1 - i;
        let c: [[f64; 5]; 2] = [
            [-25.0, 48.0, -36.0, 16.0, -3.0],
            [-3.0, -10.0, 18.0, -6.0, 1.0],
        ];
        -(0..5).map(|k| c[j][k] * f(n - 1 - k)).sum::<f64>() / (12.0 * h)
    }
}

/// Fourth-order second derivative of uniformly spaced samples at index `i`.
pub fn d2_fourth_order(values: &[f64], h: f64, i: usize) -> f64 {
    let n = values.len();
    assert!(n >= 6, "need at least six samples");
    let f = |k: usize| values[k];
    if i >= 2 && i + 2 < n {
        (-f(i - 2) + 16.0 * f(i - 1) - 30.0 * f(i) + 16.0 * f(i + 1) - f(i + 2)) / (12.0 * h * h)
    } else {
        // one-sided six-point stencils
        let c: [[f64; 6]; 2] = [
            [45.0, -154.0, 214.0, -156.0, 61.0, -10.0],
            [10.0, -15.0, -4.0, 14.0, -6.0, 1.0],
        ];
        let (j, rev) = if i < 2 { (i, false) } else { (n - 1 - i, true) };
        let idx = |k: usize| if rev { n - 1 - k } else { k };
        (0..6).map(|k| c[j][k] * f(idx(k))).sum::<f64>() / (12.0 * h * h)
    }
}

pub fn geometric_mean(values: &[f64]) -> f64 {
    (values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let fit = fit_line(&xs, &ys);
        assert!((fit.slope - 2.5).abs() < 1e-14 && (fit.intercept + 1.0).abs() < 1e-14);
    }

    #[test]
    fn loglog_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        assert!((fit_loglog(&xs, &ys, 2.0).slope + 0.5).abs() < 1e-14);
    }

    #[test]
    fn lagrange_reproduces_polynomials() {
        let vals: Vec<f64> = (0..10).map(|i| { let x = i as f64 * 0.5; x * x * x - x }).collect();
        let x = 2.3;
        let v = lagrange_uniform(&vals, 0.0, 0.5, x, 4);
        assert!((v - (x * x * x - x)).abs() < 1e-12);
        let (start, w) = lagrange_weights(vals.len(), 0.0, 0.5, x, 4);
        let v2: f64 = w.iter().enumerate().map(|(k, w)| w * vals[start + k]).sum();
        assert!((v - v2).abs() < 1e-14);
    }

    #[test]
    fn fornberg_matches_polynomial_derivatives() {
        let xs = [0.0, 0.3, 0.7, 1.2, 1.5, 2.1];
        let f = |x: f64| x.powi(5) - x * x;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let w = fd_weights(0.9, &xs, 2);
        let d = |k: usize| w[k].iter().zip(&ys).map(|(a, b)| a * b).sum::<f64>();
        assert!((d(0) - f(0.9)).abs() < 1e-12);
        assert!((d(1) - (5.0 * 0.9f64.powi(4) - 1.8)).abs() < 1e-10);
        assert!((d(2) - (20.0 * 0.9f64.powi(3) - 2.0)).abs() < 1e-9);
        assert!((lagrange_nonuniform(&xs, &ys, 0.9) - f(0.9)).abs() < 1e-12);
    }

    #[test]
    fn stencils_exact_on_quartics() {
        let h = 0.1;
        let f = |x: f64| x.powi(4) - 2.0 * x.powi(3) + x;
        let df = |x: f64| 4.0 * x.powi(3) - 6.0 * x.powi(2) + 1.0;
        let d2f = |x: f64| 12.0 * x.powi(2) - 12.0 * x;
        let vals: Vec<f64> = (0..9).map(|i| f(i as f64 * h)).collect();
        for i in 0..9 {
            let x = i as f64 * h;
            assert!((d1_fourth_order(&vals, h, i) - df(x)).abs() < 1e-9, "d1 at {i}");
            assert!((d2_fourth_order(&vals, h, i) - d2f(x)).abs() < 1e-7, "d2 at {i}");
        }
    }
}
