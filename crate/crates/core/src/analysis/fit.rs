use serde::{Deserialize, Serialize};

use super::linalg;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitModel {
    /// `A · x^γ`, fitted as a line in log-log space.
    PowerLaw,
    /// `A · e^{−λx} + c`.
    ExpPlateau,
    /// `a + b · x`.
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub value: f64,
    /// One standard error.
    pub err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub params: Vec<Param>,
    /// Euclidean norm of the residuals in the space the fit was done in.
    pub residual_norm: f64,
    /// Inclusive `x` range the fit used.
    pub window: (f64, f64),
    pub n_points: usize,
    pub r_squared: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Value of a parameter; panics on an unknown name.
    pub fn value(&self, name: &str) -> f64 {
        self.param(name).unwrap_or_else(|| panic!("no parameter {name}")).value
    }

    pub fn err(&self, name: &str) -> f64 {
        self.param(name).unwrap_or_else(|| panic!("no parameter {name}")).err
    }
}

fn param(name: &str, value: f64, err: f64) -> Param {
    Param { name: name.to_string(), value, err }
}

fn windowed(xs: &[f64], ys: &[f64], window: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    if xs.len() != ys.len() {
        return Err(Error::Fit(format!("{} x values but {} y values", xs.len(), ys.len())));
    }
    Ok(xs.iter().zip(ys).filter(|(x, _)| **x >= window.0 && **x <= window.1).map(|(x, y)| (*x, *y)).unzip())
}

fn full_window(xs: &[f64]) -> (f64, f64) {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Ordinary least squares `y = a + b·x` on all points.
pub fn fit_linear(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::Fit("x and y lengths differ".into()));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all x values coincide".into()));
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    let s2 = rss / (nf - 2.0);
    let err_b = (s2 / sxx).sqrt();
    let err_a = (s2 * (1.0 / nf + mx * mx / sxx)).sqrt();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - rss / syy };
    Ok(FitResult {
        model: FitModel::Linear,
        params: vec![param("a", a, err_a), param("b", b, err_b)],
        residual_norm: rss.sqrt(),
        window: full_window(xs),
        n_points: n,
        r_squared: Some(r_squared),
        converged: true,
        iterations: 1,
    })
}

/// Default power-law window `δ ∈ [2, L/4]`.
pub fn default_power_window(l: usize) -> (f64, f64) {
    (2.0, (l / 4) as f64)
}

/// Fits `A · x^γ` by least squares on `(ln x, ln y)`. Parameters `A`
/// and `gamma`.
pub fn fit_power_law(xs: &[f64], ys: &[f64], window: (f64, f64)) -> Result<FitResult> {
    let (wx, wy) = windowed(xs, ys, window)?;
    if wx.len() < 3 {
        return Err(Error::Fit(format!("power law needs 3 points in window, got {}", wx.len())));
    }
    if let Some(bad) = wx.iter().zip(&wy).find(|(x, y)| **x <= 0.0 || **y <= 0.0) {
        return Err(Error::Fit(format!("non-positive point ({}, {}) in window", bad.0, bad.1)));
    }
    let lx: Vec<f64> = wx.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = wy.iter().map(|y| y.ln()).collect();
    let lin = fit_linear(&lx, &ly)?;
    let ln_a = lin.value("a");
    let amp = ln_a.exp();
    Ok(FitResult {
        model: FitModel::PowerLaw,
        params: vec![param("A", amp, amp * lin.err("a")), param("gamma", lin.value("b"), lin.err("b"))],
        window,
        ..lin
    })
}

const LM_MAX_ITER: usize = 500;
const LM_TOL: f64 = 1e-10;

/// Fits `A · e^{−λx} + c` by Levenberg–Marquardt. Parameters `A`,
/// `lambda`, `c`. If the iteration budget runs out the best point so far is
/// returned with `converged = false`.
pub fn fit_exp_plateau(xs: &[f64], ys: &[f64], window: (f64, f64)) -> Result<FitResult> {
    let (wx, wy) = windowed(xs, ys, window)?;
    let n = wx.len();
    if n < 4 {
        return Err(Error::Fit(format!("exponential plateau needs 4 points in window, got {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| wx[i].total_cmp(&wx[j]));
    let (x0, y0) = (wx[order[0]], wy[order[0]]);
    let (x1, y1) = (wx[order[1]], wy[order[1]]);
    // Tail mean over the upper third of the window.
    let tail: Vec<f64> = order[n - n.div_ceil(3)..].iter().map(|&i| wy[i]).collect();
    let c0 = tail.iter().sum::<f64>() / tail.len() as f64;
    let a0 = y0 - c0;
    let lam0 = {
        let (r0, r1) = (y0 - c0, y1 - c0);
        let l = if r0 * r1 > 0.0 { (r0 / r1).ln() / (x1 - x0) } else { f64::NAN };
        if l.is_finite() && l > 0.0 {
            l
        } else {
            1.0
        }
    };

    let model = |t: &[f64; 3], x: f64| t[0] * (-t[1] * x).exp() + t[2];
    let rss_of = |t: &[f64; 3]| -> f64 { wx.iter().zip(&wy).map(|(&x, &y)| (y - model(t, x)).powi(2)).sum() };
    let normal = |t: &[f64; 3]| -> ([[f64; 3]; 3], [f64; 3]) {
        let mut h = [[0.0; 3]; 3];
        let mut g = [0.0; 3];
        for (&x, &y) in wx.iter().zip(&wy) {
            let e = (-t[1] * x).exp();
            let j = [e, -t[0] * x * e, 1.0];
            let r = y - model(t, x);
            for a in 0..3 {
                g[a] += j[a] * r;
                for b in 0..3 {
                    h[a][b] += j[a] * j[b];
                }
            }
        }
        (h, g)
    };

    let mut theta = [a0, lam0, c0];
    let mut rss = rss_of(&theta);
    let mut mu = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < LM_MAX_ITER {
        iterations += 1;
        if rss <= 1e-30 {
            converged = true;
            break;
        }
        let (h, g) = normal(&theta);
        let diag_max = (0..3).map(|k| h[k][k]).fold(0.0f64, f64::max);
        let mut improved = false;
        while mu < 1e16 {
            let mut damped = h;
            for (k, row) in damped.iter_mut().enumerate() {
                row[k] += mu * (h[k][k] + 1e-12 * diag_max.max(1e-300));
            }
            let Some(step) = linalg::solve(damped, g) else {
                mu *= 10.0;
                continue;
            };
            let trial = [theta[0] + step[0], theta[1] + step[1], theta[2] + step[2]];
            let trial_rss = rss_of(&trial);
            if trial_rss.is_finite() && trial_rss < rss {
                let drop = rss - trial_rss;
                theta = trial;
                rss = trial_rss;
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                if drop <= LM_TOL * rss.max(1e-300) {
                    converged = true;
                }
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            // No downhill step at any damping: stationary point.
            converged = true;
        }
        if converged {
            break;
        }
    }

    let (h, _) = normal(&theta);
    let s2 = rss / (n as f64 - 3.0);
    let var = linalg::inverse_diagonal(h).unwrap_or([f64::NAN; 3]);
    let err = |k: usize| (s2 * var[k]).max(0.0).sqrt();
    Ok(FitResult {
        model: FitModel::ExpPlateau,
        params: vec![param("A", theta[0], err(0)), param("lambda", theta[1], err(1)), param("c", theta[2], err(2))],
        residual_norm: rss.sqrt(),
        window,
        n_points: n,
        r_squared: None,
        converged,
        iterations,
    })
}

/// Linear fit of `S/L` against `ln L`. Parameters `a` (intercept) and
/// `b` (slope); `r_squared` is set.
pub fn fit_log_area_law(sizes: &[f64], entropies: &[f64]) -> Result<FitResult> {
    if sizes.len() != entropies.len() {
        return Err(Error::Fit("sizes and entropies differ in length".into()));
    }
    if sizes.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 sizes, got {}", sizes.len())));
    }
    let xs: Vec<f64> = sizes.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = sizes.iter().zip(entropies).map(|(l, s)| s / l).collect();
    fit_linear(&xs, &ys)
}
