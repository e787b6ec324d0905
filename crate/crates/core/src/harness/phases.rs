use serde::{Deserialize, Serialize};

use crate::metrics::learning_curve;

/// Share of the smoothed peak that marks the random phase as over.
pub const RANDOM_LEVEL: f64 = 0.5;
/// Share of the peak below which the agent counts as rational.
pub const RATIONAL_LEVEL: f64 = 0.1;

/// Phase boundaries as indices into the cycle series. The random phase is
/// `[0, random_end)`, learning is `[random_end, learning_end)` and the
/// rest is rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Phases {
    pub random_end: Option<usize>,
    pub learning_end: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseLabel {
    Random,
    Learning,
    Rational,
}

impl PhaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseLabel::Random => "random",
            PhaseLabel::Learning => "learning",
            PhaseLabel::Rational => "rational",
        }
    }
}

impl Phases {
    /// All three phases were found, in order.
    pub fn complete(&self) -> bool {
        matches!((self.random_end, self.learning_end), (Some(a), Some(b)) if a < b)
    }

    pub fn label(&self, i: usize) -> Option<PhaseLabel> {
        let r = self.random_end?;
        if i < r {
            return Some(PhaseLabel::Random);
        }
        match self.learning_end {
            Some(l) if i >= l => Some(PhaseLabel::Rational),
            _ => Some(PhaseLabel::Learning),
        }
    }
}

/// Split a distance series into random, learning and rational phases.
///
/// The series is smoothed with a centered moving average and normalized by
/// its peak. The random phase ends at the top of the first hump after the
/// curve has passed half its peak. The rational phase starts at the first
/// point from which the curve stays under a tenth of the peak for
/// `2 * window` cycles.
pub fn classify_phases(series: &[f64], window: usize) -> Phases {
    let window = window.max(1);
    if series.len() < 2 * window || series.iter().any(|v| !v.is_finite()) {
        return Phases::default();
    }
    let curve = learning_curve(series, window);
    let sm = &curve.smoothed;
    let (lo, hi) = sm
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if hi <= 0.0 || hi - lo <= 1e-12 * hi {
        return Phases::default();
    }
    let norm = &curve.normalized;
    let n = norm.len();
    let Some(mut r) = norm.iter().position(|&v| v >= RANDOM_LEVEL) else {
        return Phases::default();
    };
    while r + 1 < n && norm[r + 1] >= norm[r] {
        r += 1;
    }
    let run = 2 * window;
    let mut learning_end = None;
    let mut streak = 0;
    for (i, &v) in norm.iter().enumerate().skip(r) {
        if v < RATIONAL_LEVEL {
            streak += 1;
            if streak >= run {
                learning_end = Some(i + 1 - run);
                break;
            }
        } else {
            streak = 0;
        }
    }
    Phases {
        random_end: Some(r),
        learning_end,
    }
}
