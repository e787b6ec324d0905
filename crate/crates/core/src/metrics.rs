//! Bounded-rationality gauges: first-order-condition distances,
//! steady-state distances and smoothed learning curves.

use serde::{Deserialize, Serialize};

use crate::env::TransitionRow;
use crate::model::{marginal_utilities, wage, ModelParams, SteadyState};

/// `|ratio - 1|` for the Euler, money-demand and labor-supply conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocDistances {
    pub euler: f64,
    /// Absent when the nominal rate is exactly one.
    pub money: Option<f64>,
    pub labor: f64,
}

/// FOC distances on consecutive transitions of one episode, with the
/// realized values of the second one standing in for expectations.
pub fn foc_distances(t0: &TransitionRow, t1: &TransitionRow, p: &ModelParams) -> FocDistances {
    let euler = (p.beta * (t1.c / t0.c).powf(-p.sigma) * t0.r / t1.pi - 1.0).abs();
    let (uc, um, un) = marginal_utilities(t0.c, t0.m, t0.n, p);
    let money = if t0.r == 1.0 {
        None
    } else {
        Some((um / uc * t0.r / (t0.r - 1.0) - 1.0).abs())
    };
    let w = wage(t0.n, t0.eps_y, p);
    let labor = (-un / uc / w - 1.0).abs();
    FocDistances {
        euler,
        money,
        labor,
    }
}

/// Values compared against the steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Endpoint {
    pub pi: f64,
    pub b: f64,
    pub n: f64,
    pub m: f64,
    pub u: f64,
}

impl Endpoint {
    pub fn from_row(r: &TransitionRow) -> Self {
        Endpoint {
            pi: r.pi,
            b: r.b,
            n: r.n,
            m: r.m,
            u: r.reward,
        }
    }
}

/// Mean signed and mean absolute percent deviation of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub mean: f64,
    pub abs: f64,
}

/// Per-variable distances; `None` where the reference value is zero or
/// there were no samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsDistances {
    pub pi: Option<Deviation>,
    pub b: Option<Deviation>,
    pub n: Option<Deviation>,
    pub m: Option<Deviation>,
    pub u: Option<Deviation>,
}

fn deviation(xs: impl Iterator<Item = f64> + Clone, reference: f64) -> Option<Deviation> {
    let k = xs.clone().count();
    if k == 0 || reference == 0.0 {
        return None;
    }
    let pct = move |x: f64| 100.0 * (x - reference) / reference.abs();
    let mean = xs.clone().map(pct).sum::<f64>() / k as f64;
    let abs = xs.map(|x| pct(x).abs()).sum::<f64>() / k as f64;
    Some(Deviation { mean, abs })
}

/// Percent distances of endpoint samples from `ss`. With
/// `net_inflation` the inflation distance is measured on `pi - 1`.
pub fn ss_distances(samples: &[Endpoint], ss: &SteadyState, net_inflation: bool) -> SsDistances {
    let shift = if net_inflation { 1.0 } else { 0.0 };
    let it = samples.iter();
    SsDistances {
        pi: deviation(it.clone().map(|e| e.pi - shift), ss.pi - shift),
        b: deviation(it.clone().map(|e| e.b), ss.b),
        n: deviation(it.clone().map(|e| e.n), ss.n),
        m: deviation(it.clone().map(|e| e.m), ss.m),
        u: deviation(it.map(|e| e.u), ss.u),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub smoothed: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// `smoothed / max(smoothed)`.
    pub normalized: Vec<f64>,
}

impl LearningCurve {
    pub fn band_width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }
}

/// Centered moving average over `window` points, truncated at the ends,
/// with a band of two standard errors of each windowed mean.
pub fn learning_curve(series: &[f64], window: usize) -> LearningCurve {
    let n = series.len();
    let window = window.max(1);
    let back = (window - 1) / 2;
    let fwd = window - 1 - back;
    let mut smoothed = Vec::with_capacity(n);
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(back);
        let hi = (i + fwd + 1).min(n);
        let w = &series[lo..hi];
        let k = w.len() as f64;
        let mean = w.iter().sum::<f64>() / k;
        let var = if w.len() > 1 {
            w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        let half = 2.0 * var.sqrt() / k.sqrt();
        smoothed.push(mean);
        lower.push(mean - half);
        upper.push(mean + half);
    }
    let peak = smoothed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let normalized = smoothed
        .iter()
        .map(|&s| if peak > 0.0 { s / peak } else { 0.0 })
        .collect();
    LearningCurve {
        smoothed,
        lower,
        upper,
        normalized,
    }
}

/// Index from which `normalized` stays below `level` until the end.
pub fn settles_below(normalized: &[f64], level: f64) -> Option<usize> {
    let last_above = normalized.iter().rposition(|&v| v >= level);
    match last_above {
        None if normalized.is_empty() => None,
        None => Some(0),
        Some(i) if i + 1 < normalized.len() => Some(i + 1),
        Some(_) => None,
    }
}
