//! Finite-difference signatures of a ground-state path at fixed epsilon.
//!
//! Derivatives use the second-order three-point stencil on non-uniform grids
//! (one-sided at the ends), so exact data is never smoothed implicitly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryOptions {
    /// Adjacent secant slopes differing by more than this factor are flagged.
    pub jump_factor: f64,
    /// Slopes below this magnitude are treated as flat in the jump test.
    pub slope_floor: f64,
    /// Gaussian width in grid units, applied before differencing.
    pub smoothing_sigma: Option<f64>,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self {
            jump_factor: 10.0,
            slope_floor: 1e-6,
            smoothing_sigma: None,
        }
    }
}

impl TrajectoryOptions {
    pub fn sampled() -> Self {
        Self {
            smoothing_sigma: Some(1.0),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryAnalysis {
    pub lambdas: Vec<f64>,
    pub jz_gradient: Vec<f64>,
    pub arc_speed: Vec<f64>,
    pub gradient_std_error: Vec<f64>,
    pub peak_index: usize,
    pub peak_lambda: f64,
    pub peak_gradient: f64,
    /// Full width at half maximum of |d<Jz>/dlambda|, when both sides cross.
    pub peak_width: Option<f64>,
    /// Point indices where the secant slope jumps.
    pub discontinuities: Vec<usize>,
    pub smoothing_sigma: Option<f64>,
}

fn check_monotone(x: &[f64]) -> Result<()> {
    if x.len() < 3 {
        return Err(Error::Domain(format!("trajectory needs >= 3 points, got {}", x.len())));
    }
    let increasing = x[1] > x[0];
    for i in 1..x.len() {
        let ok = if increasing { x[i] > x[i - 1] } else { x[i] < x[i - 1] };
        if !ok || !x[i].is_finite() {
            return Err(Error::NonMonotone { index: i });
        }
    }
    Ok(())
}

/// Stencil weights (w_prev, w_self, w_next) for the derivative at `i`.
fn stencil(x: &[f64], i: usize) -> [(usize, f64); 3] {
    let n = x.len();
    if i == 0 {
        let h = x[1] - x[0];
        [(0, -1.0 / h), (1, 1.0 / h), (1, 0.0)]
    } else if i == n - 1 {
        let h = x[n - 1] - x[n - 2];
        [(n - 2, -1.0 / h), (n - 1, 1.0 / h), (n - 1, 0.0)]
    } else {
        let h1 = x[i] - x[i - 1];
        let h2 = x[i + 1] - x[i];
        let den = h1 * h2 * (h1 + h2);
        [(i - 1, -h2 * h2 / den), (i, (h2 * h2 - h1 * h1) / den), (i + 1, h1 * h1 / den)]
    }
}

/// Written in differences so constant data gives exactly zero.
pub fn gradient(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (y[1] - y[0]) / (x[1] - x[0])
            } else if i == n - 1 {
                (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2])
            } else {
                let h1 = x[i] - x[i - 1];
                let h2 = x[i + 1] - x[i];
                (h1 * h1 * (y[i + 1] - y[i]) + h2 * h2 * (y[i] - y[i - 1])) / (h1 * h2 * (h1 + h2))
            }
        })
        .collect()
}

fn gradient_error(x: &[f64], e: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut w = [0.0; 3];
            let st = stencil(x, i);
            // Merge repeated indices before squaring.
            let mut acc: Vec<(usize, f64)> = Vec::new();
            for &(k, wk) in &st {
                match acc.iter_mut().find(|(j, _)| *j == k) {
                    Some(slot) => slot.1 += wk,
                    None => acc.push((k, wk)),
                }
            }
            for (slot, (k, wk)) in w.iter_mut().zip(acc) {
                *slot = wk * e[k];
            }
            w.iter().map(|v| v * v).sum::<f64>().sqrt()
        })
        .collect()
}

/// Gaussian smoothing in grid units, truncated at 3 sigma and renormalized at
/// the ends; returns the smoothed series and propagated errors.
pub fn smooth(y: &[f64], e: &[f64], sigma: f64) -> (Vec<f64>, Vec<f64>) {
    if sigma <= 0.0 {
        return (y.to_vec(), e.to_vec());
    }
    let n = y.len() as i64;
    let r = (3.0 * sigma).ceil() as i64;
    let mut ys = Vec::with_capacity(y.len());
    let mut es = Vec::with_capacity(y.len());
    for i in 0..n {
        let mut wsum = 0.0;
        let mut acc = 0.0;
        let mut var = 0.0;
        for k in (i - r).max(0)..=(i + r).min(n - 1) {
            let w = (-0.5 * ((k - i) as f64 / sigma).powi(2)).exp();
            wsum += w;
            acc += w * y[k as usize];
            var += w * w * e[k as usize].powi(2);
        }
        ys.push(acc / wsum);
        es.push(var.sqrt() / wsum);
    }
    (ys, es)
}

/// `points` are (lambda, [jz, jz2, jpm2]); `jz_errors` are one-sigma errors.
pub fn trajectory_analysis(
    points: &[(f64, Point3)],
    jz_errors: Option<&[f64]>,
    opts: &TrajectoryOptions,
) -> Result<TrajectoryAnalysis> {
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    check_monotone(&x)?;
    let n = x.len();
    let zeros = vec![0.0; n];
    let err = jz_errors.unwrap_or(&zeros);
    if err.len() != n {
        return Err(Error::Domain("error vector length differs from trajectory".into()));
    }
    let mut comps: Vec<Vec<f64>> = (0..3).map(|k| points.iter().map(|p| p.1[k]).collect()).collect();
    let mut jz_err = err.to_vec();
    if let Some(sigma) = opts.smoothing_sigma {
        for (k, c) in comps.iter_mut().enumerate() {
            let (s, e) = smooth(c, if k == 0 { err } else { &zeros }, sigma);
            *c = s;
            if k == 0 {
                jz_err = e;
            }
        }
    }
    let grads: Vec<Vec<f64>> = comps.iter().map(|c| gradient(&x, c)).collect();
    let arc_speed: Vec<f64> = (0..n)
        .map(|i| (grads[0][i].powi(2) + grads[1][i].powi(2) + grads[2][i].powi(2)).sqrt())
        .collect();
    let jz_gradient = grads[0].clone();
    let gradient_std_error = gradient_error(&x, &jz_err);

    let mut peak_index = 0;
    for i in 1..n {
        if jz_gradient[i].abs() > jz_gradient[peak_index].abs() {
            peak_index = i;
        }
    }
    let peak = jz_gradient[peak_index].abs();
    let half = 0.5 * peak;
    let crossing = |range: Box<dyn Iterator<Item = usize>>, step_back: i64| -> Option<f64> {
        for i in range {
            if jz_gradient[i].abs() < half {
                let j = (i as i64 + step_back) as usize;
                let (gi, gj) = (jz_gradient[i].abs(), jz_gradient[j].abs());
                let t = (half - gi) / (gj - gi);
                return Some(x[i] + t * (x[j] - x[i]));
            }
        }
        None
    };
    let left = crossing(Box::new((0..peak_index).rev()), 1);
    let right = crossing(Box::new(peak_index + 1..n), -1);
    let peak_width = match (left, right) {
        (Some(l), Some(r)) if peak > 0.0 => Some((r - l).abs()),
        _ => None,
    };

    let slopes: Vec<f64> = (0..n - 1)
        .map(|i| (comps[0][i + 1] - comps[0][i]) / (x[i + 1] - x[i]))
        .collect();
    let mut discontinuities = Vec::new();
    for i in 1..n - 1 {
        let (a, b) = (slopes[i - 1].abs(), slopes[i].abs());
        let hi = a.max(b);
        let lo = a.min(b).max(opts.slope_floor);
        if hi > opts.slope_floor && hi / lo > opts.jump_factor {
            discontinuities.push(i);
        }
    }

    Ok(TrajectoryAnalysis {
        peak_lambda: x[peak_index],
        peak_gradient: jz_gradient[peak_index],
        lambdas: x,
        jz_gradient,
        arc_speed,
        gradient_std_error,
        peak_index,
        peak_width,
        discontinuities,
        smoothing_sigma: opts.smoothing_sigma,
    })
}
