//! Steady states: the two inflation roots and the associated allocation.

use serde::{Deserialize, Serialize};

use super::equations::{
    clearing_output, hours_for_output, steady_money_demand, taylor_components, utility, wage,
};
use super::ModelParams;
use crate::error::{Error, Result};

/// Non-stochastic steady state at one inflation root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub pi: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub y: f64,
    pub c: f64,
    pub n: f64,
    pub m: f64,
    pub b: f64,
    pub w: f64,
    pub u: f64,
}

/// Tolerance used for knife-edge classifications.
pub const BOUNDARY_TOL: f64 = 1e-12;

const BRACKET_PAD: f64 = 1e-9;
const BISECTION_WIDTH: f64 = 1e-14;

/// Plain bisection for a sign change of `g` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `width` and returns its midpoint.
pub fn bisect(mut lo: f64, mut hi: f64, width: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
    let (mut g_lo, g_hi) = (g(lo), g(hi));
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() || !g_lo.is_finite() || !g_hi.is_finite() {
        return Err(Error::NotBracketed { lo, hi });
    }
    for _ in 0..400 {
        if hi - lo <= width {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Market-clearing output with unit technology.
pub fn steady_output(p: &ModelParams) -> f64 {
    clearing_output(1.0, p)
}

/// Residual of the steady-state Fisher relation against the Taylor rule,
/// `pi/beta - 1 - f(pi)`.
pub fn fisher_residual(pi: f64, p: &ModelParams) -> f64 {
    pi / p.beta - 1.0 - taylor_components(pi, p).0
}

/// The two steady-state inflation rates `(pi_high, pi_low)`.
///
/// `pi_high` is the target by construction; `pi_low` is found by bisection
/// strictly between `beta` and the target.
pub fn solve_steady_inflation(p: &ModelParams) -> Result<(f64, f64)> {
    let lo = p.beta + BRACKET_PAD;
    let hi = p.pi_star - BRACKET_PAD;
    if lo >= hi {
        return Err(Error::NotBracketed { lo, hi });
    }
    let pi_low = bisect(lo, hi, BISECTION_WIDTH, |pi| fisher_residual(pi, p))?;
    Ok((p.pi_star, pi_low))
}

fn fiscal_gap(p: &ModelParams) -> Result<f64> {
    let gap = 1.0 / p.beta - 1.0 - p.gamma;
    if gap.abs() < 1e-15 {
        return Err(Error::SingularFiscal(format!(
            "1/beta - 1 - gamma vanishes (gamma = {})",
            p.gamma
        )));
    }
    Ok(gap)
}

/// Full steady-state allocation at inflation `pi`.
pub fn compute_steady_state(pi: f64, p: &ModelParams) -> Result<SteadyState> {
    if !(pi > p.beta) {
        return Err(Error::Domain(format!(
            "steady state needs pi > beta, got {pi}"
        )));
    }
    let gap = fiscal_gap(p)?;
    let y = steady_output(p);
    let n = hours_for_output(y, 1.0, p);
    let m = steady_money_demand(pi, y, p)?;
    let b = (p.gamma0 + (1.0 - 1.0 / pi) * m) / gap;
    let u = utility(y, m, n, p)?;
    Ok(SteadyState {
        pi,
        r: pi / p.beta,
        y,
        c: y,
        n,
        m,
        b,
        w: wage(n, 1.0, p),
        u,
    })
}

/// Tax intercept that puts steady-state real debt at `b_target`.
pub fn calibrate_gamma0(p: &ModelParams, pi: f64, b_target: f64) -> Result<f64> {
    if !(pi > p.beta) {
        return Err(Error::Domain(format!(
            "calibration needs pi > beta, got {pi}"
        )));
    }
    let gap = fiscal_gap(p)?;
    let m = steady_money_demand(pi, steady_output(p), p)?;
    Ok(b_target * gap - (1.0 - 1.0 / pi) * m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::equations::{fiscal_tax, money_demand, taylor_rate};
    use approx::assert_relative_eq;

    #[test]
    fn output_is_one_without_curvature() {
        let mut p = ModelParams::baseline();
        p.eta = 0.0;
        assert_eq!(steady_output(&p), 1.0);
    }

    #[test]
    fn baseline_output_rounds_to_one() {
        let y = steady_output(&ModelParams::baseline());
        assert!((y - 0.99975).abs() < 1e-5);
        assert_eq!(format!("{y:.3}"), "1.000");
    }

    #[test]
    fn output_matches_bisection_oracle() {
        let mut p = ModelParams::baseline();
        p.sigma = 1.0;
        p.phi = 1.0;
        p.eta = 0.5;
        let e = p.sigma + (p.eta + p.phi) / (1.0 - p.eta);
        let oracle = bisect(1e-6, 2.0, 1e-15, |y| y.powf(e) - (1.0 - p.eta)).unwrap();
        assert_relative_eq!(steady_output(&p), oracle, max_relative = 1e-13);
        assert_relative_eq!(oracle, 0.5f64.powf(0.25), max_relative = 1e-13);
    }

    #[test]
    fn inflation_roots_for_baseline() {
        let p = ModelParams::baseline();
        let (hi, lo) = solve_steady_inflation(&p).unwrap();
        assert_eq!(hi, 1.01);
        assert!((lo - 1.0014).abs() < 5e-5);
        assert!(fisher_residual(hi, &p).abs() <= 1e-12);
        assert!(fisher_residual(lo, &p).abs() <= 1e-12);
        assert_relative_eq!(taylor_rate(lo, 1.0, &p), lo / p.beta, epsilon = 1e-12);
    }

    #[test]
    fn alternative_calibration_root() {
        let mut p = ModelParams::baseline();
        p.a = 1.5;
        p.pi_star = 1.02;
        let (_, lo) = solve_steady_inflation(&p).unwrap();
        // independent grid scan for the sign change
        let mut prev = fisher_residual(p.beta + 1e-9, &p);
        let mut found = None;
        let steps = 200_000;
        for i in 1..=steps {
            let x = p.beta + 1e-9 + (p.pi_star - 2e-9 - p.beta) * i as f64 / steps as f64;
            let g = fisher_residual(x, &p);
            if g.signum() != prev.signum() {
                found = Some(x);
                break;
            }
            prev = g;
        }
        let grid_root = found.unwrap();
        assert!((lo - grid_root).abs() < 1e-6);
        assert!(fisher_residual(lo, &p).abs() <= 1e-12);
    }

    #[test]
    fn steady_state_identities() {
        let p = ModelParams::baseline();
        let (hi, lo) = solve_steady_inflation(&p).unwrap();
        for pi in [hi, lo] {
            let ss = compute_steady_state(pi, &p).unwrap();
            assert!((ss.r - ss.pi / p.beta).abs() <= 1e-12);
            assert_eq!(ss.c, ss.y);
            let md = money_demand(ss.c, ss.r, &p).unwrap();
            assert!((md - ss.m).abs() <= 1e-12, "{md} vs {}", ss.m);
            let tau = fiscal_tax(ss.b, 0.0, &p);
            let gbc = ss.m + ss.b + tau - ss.m / ss.pi - ss.r * ss.b / ss.pi;
            assert!(gbc.abs() <= 1e-10);
        }
    }

    #[test]
    fn money_blows_up_near_beta() {
        let p = ModelParams::baseline();
        let near = compute_steady_state(p.beta + 1e-9, &p).unwrap();
        assert!(near.m > 400.0);
        let nearer = compute_steady_state(p.beta + 1e-12, &p).unwrap();
        assert!(nearer.m > 10.0 * near.m - 1e-6);
        assert!(matches!(
            compute_steady_state(p.beta, &p),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn calibration_round_trips() {
        let mut p = ModelParams::baseline();
        let (hi, lo) = solve_steady_inflation(&p).unwrap();
        for gamma in [0.0, 0.02] {
            for pi in [hi, lo] {
                p.gamma = gamma;
                p.gamma0 = calibrate_gamma0(&p, pi, 4.0).unwrap();
                let ss = compute_steady_state(pi, &p).unwrap();
                assert!((ss.b - 4.0).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn singular_fiscal_rule_is_rejected() {
        let mut p = ModelParams::baseline();
        p.gamma = 1.0 / p.beta - 1.0;
        assert!(matches!(
            compute_steady_state(1.01, &p),
            Err(Error::SingularFiscal(_))
        ));
    }

    #[test]
    fn unbracketed_root_is_reported() {
        assert!(matches!(
            bisect(0.0, 1.0, 1e-12, |x| x + 1.0),
            Err(Error::NotBracketed { .. })
        ));
    }
}
