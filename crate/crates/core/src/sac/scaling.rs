//! Affine maps between model units and the `[-1, 1]` boxes the networks see.

use crate::env::{Action, ActionBounds, EnvState, StateBox};
use crate::model::ModelParams;

/// Observation normalizer: each component is mapped affinely so that its
/// configured range lands on `[-1, 1]`. Values outside the range are not
/// clipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObsScaler {
    pub center: [f64; EnvState::DIM],
    pub half: [f64; EnvState::DIM],
}

/// Smallest half-width used for a shock component.
const MIN_SHOCK_SD: f64 = 1e-4;

impl ObsScaler {
    /// Ranges from the initial-state box; shocks use their mean plus or
    /// minus four standard deviations.
    pub fn from_box(b: &StateBox, p: &ModelParams) -> Self {
        let shock = |sd: f64| 4.0 * sd.max(MIN_SHOCK_SD);
        let ranges = [
            (b.m.center(), b.m.half_width()),
            (b.b.center(), b.b.half_width()),
            (b.pi.center(), b.pi.half_width()),
            (b.c.center(), b.c.half_width()),
            (b.n.center(), b.n.half_width()),
            (0.0, shock(p.sd_tau)),
            (1.0, shock(p.sd_r)),
            (1.0, shock(p.sd_y)),
        ];
        let mut center = [0.0; EnvState::DIM];
        let mut half = [0.0; EnvState::DIM];
        for (i, (c, h)) in ranges.into_iter().enumerate() {
            center[i] = c;
            // a degenerate box would divide by zero; keep such components at 0
            half[i] = if h > 0.0 { h } else { 1.0 };
        }
        ObsScaler { center, half }
    }

    pub fn observe(&self, s: &EnvState) -> [f64; EnvState::DIM] {
        let raw = s.to_array();
        std::array::from_fn(|i| (raw[i] - self.center[i]) / self.half[i])
    }

    pub fn unobserve(&self, o: &[f64; EnvState::DIM]) -> EnvState {
        EnvState::from_array(std::array::from_fn(|i| {
            self.center[i] + self.half[i] * o[i]
        }))
    }
}

/// Maps squashed actions in `[-1, 1]` to the action bounds and back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionScaler {
    pub center: [f64; Action::DIM],
    pub half: [f64; Action::DIM],
    lo: [f64; Action::DIM],
    hi: [f64; Action::DIM],
}

impl ActionScaler {
    pub fn new(bounds: &ActionBounds) -> Self {
        let iv = bounds.intervals();
        ActionScaler {
            center: std::array::from_fn(|i| iv[i].center()),
            half: std::array::from_fn(|i| iv[i].half_width()),
            lo: std::array::from_fn(|i| iv[i].min),
            hi: std::array::from_fn(|i| iv[i].max),
        }
    }

    /// Squashed value to model units. The endpoints map exactly onto the
    /// bounds and rounding in the affine map can never step outside.
    pub fn to_action(&self, squashed: &[f64]) -> Action {
        Action::from_array(std::array::from_fn(|i| {
            let (lo, hi) = (self.lo[i], self.hi[i]);
            match squashed[i] {
                v if v >= 1.0 => hi,
                v if v <= -1.0 => lo,
                v => (self.center[i] + self.half[i] * v).clamp(lo, hi),
            }
        }))
    }

    pub fn to_squashed(&self, a: &Action) -> [f64; Action::DIM] {
        let raw = a.to_array();
        std::array::from_fn(|i| {
            if self.half[i] > 0.0 {
                ((raw[i] - self.center[i]) / self.half[i]).clamp(-1.0, 1.0)
            } else {
                0.0
            }
        })
    }

    /// `sum ln(half-width)`, the log-Jacobian of the rescale.
    pub fn log_scale(&self) -> f64 {
        self.half.iter().map(|h| h.ln()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::RegionBounds;

    #[test]
    fn box_center_and_corner() {
        let p = ModelParams::baseline();
        let bx = RegionBounds::amp().initial;
        let sc = ObsScaler::from_box(&bx, &p);
        let center = EnvState::from_array(std::array::from_fn(|i| sc.center[i]));
        assert!(sc.observe(&center).iter().all(|&v| v == 0.0));
        let top = EnvState::from_array(std::array::from_fn(|i| sc.center[i] + sc.half[i]));
        assert!(sc.observe(&top).iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn round_trip_is_identity() {
        let p = ModelParams::baseline();
        let sc = ObsScaler::from_box(&RegionBounds::pmp().initial, &p);
        let s = EnvState::from_array([2.3, 3.9, 1.0021, 0.999, 1.004, 3e-4, 0.9994, 1.0007]);
        let back = sc.unobserve(&sc.observe(&s)).to_array();
        for (a, b) in back.iter().zip(s.to_array()) {
            assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn squashed_range_hits_the_bounds() {
        let sc = ActionScaler::new(&RegionBounds::amp().action);
        assert_eq!(
            sc.to_action(&[1.0, 1.0, 1.0]).to_array(),
            [1.015, 4.08, 1.01]
        );
        assert_eq!(
            sc.to_action(&[-1.0, -1.0, -1.0]).to_array(),
            [1.005, 4.0, 0.99]
        );
        let a = Action {
            c_act: 1.01,
            b_act: 4.06,
            n: 0.995,
        };
        let back = sc.to_action(&sc.to_squashed(&a));
        assert!((back.b_act - a.b_act).abs() < 1e-14);
    }
}
