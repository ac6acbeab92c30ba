//! Finite-size scaling collapse of `value = L^{−γ̄} g((p − p_c) L^{1/ν})`.
//!
//! For trial exponents each point is rescaled to `x = (p − p_c) L^{1/ν}`,
//! `y = value · L^{γ̄}` (errors scale with `y`). Every point is compared
//! with the piecewise-linear interpolation of each other size's rescaled
//! curve at its `x`, when that `x` lies inside the other curve's range:
//!
//! ```text
//! objective = (1/N_pairs) Σ (y_i − y_L'(x_i))² / (σ_i² + σ_L'(x_i)²)
//! ```
//!
//! The optimum is a coarse grid scan followed by Nelder–Mead refinement;
//! each exponent's uncertainty is the half-width of the interval, along
//! that axis through the optimum, where the objective stays below twice
//! its minimum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapsePoint {
    pub l: usize,
    pub p: f64,
    pub value: f64,
    pub err: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseConfig {
    pub p_c: f64,
    /// Only points with `|p − p_c| ≤ window` enter the objective.
    pub window: f64,
    pub gamma_range: (f64, f64),
    pub nu_range: (f64, f64),
    /// Grid points per axis for the coarse scan.
    pub grid: usize,
    /// Relative floor on point errors, so noise-free data stays finite.
    pub rel_err_floor: f64,
}

impl Default for CollapseConfig {
    fn default() -> Self {
        Self { p_c: 0.5, window: 0.15, gamma_range: (0.2, 3.0), nu_range: (0.3, 2.5), grid: 57, rel_err_floor: 1e-3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub gamma: f64,
    pub nu: f64,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseResult {
    pub gamma_bar: f64,
    pub nu: f64,
    pub gamma_err: f64,
    pub nu_err: f64,
    /// Objective at the optimum.
    pub quality: f64,
    pub config: CollapseConfig,
    /// Every evaluated trial, grid scan first.
    pub trace: Vec<Trial>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaledPoint {
    pub l: usize,
    pub x: f64,
    pub y: f64,
    pub err: f64,
}

/// Rescaled point cloud for given exponents, in input order.
pub fn rescale(points: &[CollapsePoint], gamma: f64, nu: f64, p_c: f64) -> Vec<RescaledPoint> {
    points
        .iter()
        .map(|pt| {
            let lf = pt.l as f64;
            let s = lf.powf(gamma);
            RescaledPoint { l: pt.l, x: (pt.p - p_c) * lf.powf(1.0 / nu), y: pt.value * s, err: pt.err * s }
        })
        .collect()
}

/// Per-point contributions to the objective.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveParts {
    pub sum: f64,
    pub count: usize,
    /// `(sum, count)` contributed by each input point, in input order.
    pub per_point: Vec<(f64, usize)>,
}

fn curves(r: &[RescaledPoint]) -> Vec<(usize, Vec<RescaledPoint>)> {
    let mut sizes: Vec<usize> = r.iter().map(|p| p.l).collect();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|l| {
            let mut c: Vec<RescaledPoint> = r.iter().filter(|p| p.l == l).copied().collect();
            c.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
            (l, c)
        })
        .collect()
}

/// Linear interpolation of `(y, err)` on a sorted curve, `None` outside.
fn interpolate(curve: &[RescaledPoint], x: f64) -> Option<(f64, f64)> {
    let (first, last) = (curve.first()?, curve.last()?);
    if x < first.x || x > last.x {
        return None;
    }
    let k = curve.partition_point(|p| p.x < x);
    if k < curve.len() && curve[k].x == x {
        return Some((curve[k].y, curve[k].err));
    }
    let (a, b) = (&curve[k - 1], &curve[k]);
    let t = (x - a.x) / (b.x - a.x);
    Some((a.y + t * (b.y - a.y), a.err + t * (b.err - a.err)))
}

/// Objective broken into its terms; points outside the window are dropped.
pub fn objective_parts(points: &[CollapsePoint], gamma: f64, nu: f64, config: &CollapseConfig) -> ObjectiveParts {
    let kept: Vec<CollapsePoint> =
        points.iter().filter(|p| (p.p - config.p_c).abs() <= config.window + 1e-12).copied().collect();
    let floor = |r: &RescaledPoint| r.err.max(config.rel_err_floor * r.y.abs()).max(1e-300);
    let rescaled = rescale(&kept, gamma, nu, config.p_c);
    let curves = curves(&rescaled);
    let mut per_point = Vec::with_capacity(points.len());
    let mut k = 0;
    for p in points {
        if (p.p - config.p_c).abs() > config.window + 1e-12 {
            per_point.push((0.0, 0));
            continue;
        }
        let r = rescaled[k];
        k += 1;
        let mut sum = 0.0;
        let mut count = 0;
        for (l, curve) in &curves {
            if *l == r.l {
                continue;
            }
            if let Some((y, e)) = interpolate(curve, r.x) {
                let si = floor(&r);
                let se = e.max(config.rel_err_floor * y.abs());
                sum += (r.y - y).powi(2) / (si * si + se * se);
                count += 1;
            }
        }
        per_point.push((sum, count));
    }
    let sum = per_point.iter().map(|p| p.0).sum();
    let count = per_point.iter().map(|p| p.1).sum();
    ObjectiveParts { sum, count, per_point }
}

/// Normalized collapse objective; `+∞` when no curves overlap.
pub fn collapse_objective(points: &[CollapsePoint], gamma: f64, nu: f64, config: &CollapseConfig) -> f64 {
    let parts = objective_parts(points, gamma, nu, config);
    if parts.count == 0 {
        f64::INFINITY
    } else {
        parts.sum / parts.count as f64
    }
}

fn in_box(config: &CollapseConfig, g: f64, nu: f64) -> bool {
    (config.gamma_range.0..=config.gamma_range.1).contains(&g) && (config.nu_range.0..=config.nu_range.1).contains(&nu)
}

fn grid_scan(points: &[CollapsePoint], config: &CollapseConfig) -> Vec<Trial> {
    let n = config.grid.max(2);
    let at = |(lo, hi): (f64, f64), k: usize| lo + (hi - lo) * k as f64 / (n - 1) as f64;
    let coords: Vec<(f64, f64)> =
        (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| (at(config.gamma_range, a), at(config.nu_range, b))).collect();
    let eval = |&(gamma, nu): &(f64, f64)| Trial { gamma, nu, objective: collapse_objective(points, gamma, nu, config) };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        coords.par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        coords.iter().map(eval).collect()
    }
}

/// Two-dimensional Nelder–Mead restricted to the search box.
fn nelder_mead(
    f: &mut dyn FnMut(f64, f64) -> f64,
    start: (f64, f64),
    step: (f64, f64),
    max_iter: usize,
) -> ((f64, f64), f64) {
    let mut s: Vec<((f64, f64), f64)> = [start, (start.0 + step.0, start.1), (start.0, start.1 + step.1)]
        .into_iter()
        .map(|p| (p, f(p.0, p.1)))
        .collect();
    for _ in 0..max_iter {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = (s[2].1 - s[0].1).abs();
        if spread <= 1e-12 * s[0].1.abs().max(1e-300) && s[0].1.is_finite() {
            break;
        }
        let c = ((s[0].0 .0 + s[1].0 .0) / 2.0, (s[0].0 .1 + s[1].0 .1) / 2.0);
        let worst = s[2];
        let along = |t: f64| (c.0 + t * (worst.0 .0 - c.0), c.1 + t * (worst.0 .1 - c.1));
        let r = along(-1.0);
        let fr = f(r.0, r.1);
        if fr < s[0].1 {
            let e = along(-2.0);
            let fe = f(e.0, e.1);
            s[2] = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < s[1].1 {
            s[2] = (r, fr);
        } else {
            let k = if fr < worst.1 { along(-0.5) } else { along(0.5) };
            let fk = f(k.0, k.1);
            if fk < worst.1.min(fr) {
                s[2] = (k, fk);
            } else {
                let best = s[0].0;
                for v in s.iter_mut().skip(1) {
                    let p = ((v.0 .0 + best.0) / 2.0, (v.0 .1 + best.1) / 2.0);
                    *v = (p, f(p.0, p.1));
                }
            }
        }
    }
    s.sort_by(|a, b| a.1.total_cmp(&b.1));
    s[0]
}

/// Half-width of the interval around `center` along one axis where the
/// objective stays below `2 · min`.
fn doubling_half_width(f: &mut dyn FnMut(f64) -> f64, center: f64, range: (f64, f64), min: f64) -> f64 {
    let target = 2.0 * min.max(1e-300);
    let width = range.1 - range.0;
    let mut edge = |dir: f64| -> f64 {
        let step = width / 400.0;
        let mut inside = center;
        loop {
            let next = inside + dir * step;
            if next < range.0 || next > range.1 {
                return inside;
            }
            if f(next) > target {
                // Bisect between inside and next.
                let (mut a, mut b) = (inside, next);
                for _ in 0..40 {
                    let m = 0.5 * (a + b);
                    if f(m) > target {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                return 0.5 * (a + b);
            }
            inside = next;
        }
    };
    let hi = edge(1.0);
    let lo = edge(-1.0);
    0.5 * (hi - lo)
}

pub fn scaling_collapse(points: &[CollapsePoint], config: &CollapseConfig) -> Result<CollapseResult> {
    let mut sizes: Vec<usize> = points.iter().map(|p| p.l).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 2 {
        return Err(Error::Collapse(format!("need at least 2 system sizes, got {}", sizes.len())));
    }
    for &l in &sizes {
        let n = points.iter().filter(|p| p.l == l && (p.p - config.p_c).abs() <= config.window + 1e-12).count();
        if n < 4 {
            return Err(Error::Collapse(format!("size {l} has {n} points in the window, need 4")));
        }
    }
    if points.iter().any(|p| !(p.value.is_finite() && p.err.is_finite() && p.err >= 0.0)) {
        return Err(Error::Collapse("non-finite value or negative error".into()));
    }

    let mut trace = grid_scan(points, config);
    let best = *trace
        .iter()
        .filter(|t| t.objective.is_finite())
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .ok_or_else(|| Error::Collapse("no overlapping curves anywhere in the search box".into()))?;

    let n = config.grid.max(2) as f64 - 1.0;
    let step = ((config.gamma_range.1 - config.gamma_range.0) / n, (config.nu_range.1 - config.nu_range.0) / n);
    let mut refine_trace = Vec::new();
    let mut f = |g: f64, nu: f64| {
        let obj = if in_box(config, g, nu) { collapse_objective(points, g, nu, config) } else { f64::INFINITY };
        refine_trace.push(Trial { gamma: g, nu, objective: obj });
        obj
    };
    nelder_mead(&mut f, (best.gamma, best.nu), step, 400);
    trace.extend(refine_trace);

    let opt = *trace
        .iter()
        .filter(|t| t.objective.is_finite())
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .expect("grid minimum is finite");
    let gamma_err = doubling_half_width(
        &mut |g| collapse_objective(points, g, opt.nu, config),
        opt.gamma,
        config.gamma_range,
        opt.objective,
    );
    let nu_err = doubling_half_width(
        &mut |nu| collapse_objective(points, opt.gamma, nu, config),
        opt.nu,
        config.nu_range,
        opt.objective,
    );
    Ok(CollapseResult {
        gamma_bar: opt.gamma,
        nu: opt.nu,
        gamma_err,
        nu_err,
        quality: opt.objective,
        config: *config,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand::seq::SliceRandom;

    fn g(x: f64) -> f64 {
        0.8 / (1.0 + (1.5 * x).exp()) + 0.05
    }

    fn synthetic(gamma: f64, nu: f64, noise: f64, seed: u64) -> Vec<CollapsePoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for l in [12usize, 16, 20, 24] {
            for k in 0..=12 {
                let p = 0.35 + 0.025 * k as f64;
                let lf = l as f64;
                let v = lf.powf(-gamma) * g((p - 0.5) * lf.powf(1.0 / nu));
                let noisy = v * (1.0 + noise * (2.0 * rng.gen::<f64>() - 1.0) * 3f64.sqrt());
                out.push(CollapsePoint { l, p, value: noisy, err: noise * v });
            }
        }
        out
    }

    #[test]
    fn recovers_known_exponents() {
        let pts = synthetic(1.6, 0.77, 0.01, 1);
        let res = scaling_collapse(&pts, &CollapseConfig::default()).unwrap();
        assert!((res.gamma_bar - 1.6).abs() <= res.gamma_err && res.gamma_err < 0.3, "{} ± {}", res.gamma_bar, res.gamma_err);
        assert!((res.nu - 0.77).abs() <= res.nu_err && res.nu_err < 0.3, "{} ± {}", res.nu, res.nu_err);
        let min = res.trace.iter().map(|t| t.objective).fold(f64::INFINITY, f64::min);
        assert_eq!(res.quality, min);
    }

    #[test]
    fn optimum_beats_shifted_exponent() {
        let pts = synthetic(1.6, 0.77, 0.01, 2);
        let cfg = CollapseConfig { gamma_range: (0.2, 4.0), ..Default::default() };
        let res = scaling_collapse(&pts, &cfg).unwrap();
        assert!(res.quality < collapse_objective(&pts, res.gamma_bar + 1.0, res.nu, &cfg));
    }

    #[test]
    fn objective_ignores_point_order() {
        let cfg = CollapseConfig::default();
        let pts = synthetic(1.6, 0.77, 0.01, 3);
        let mut shuffled = pts.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(4));
        let a = collapse_objective(&pts, 1.3, 0.9, &cfg);
        let b = collapse_objective(&shuffled, 1.3, 0.9, &cfg);
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn duplicated_point_adds_its_own_terms() {
        let cfg = CollapseConfig::default();
        let pts = synthetic(1.6, 0.77, 0.01, 5);
        let base = objective_parts(&pts, 1.4, 0.8, &cfg);
        let i = 17;
        let mut dup = pts.clone();
        dup.push(pts[i]);
        let with = objective_parts(&dup, 1.4, 0.8, &cfg);
        assert_eq!(with.count, base.count + base.per_point[i].1);
        assert!((with.sum - base.sum - base.per_point[i].0).abs() <= 1e-9 * with.sum.max(1.0));
    }

    #[test]
    fn single_size_rejected() {
        let pts: Vec<CollapsePoint> = synthetic(1.6, 0.77, 0.01, 6).into_iter().filter(|p| p.l == 12).collect();
        assert!(matches!(scaling_collapse(&pts, &CollapseConfig::default()), Err(Error::Collapse(_))));
    }
}
