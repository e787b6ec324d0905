//! Steady-state (mean) adaptive learning.
//!
//! Households forecast inflation and real debt by their running means. Given
//! those point forecasts, each period's temporary equilibrium follows from
//! the structural equations: the Euler equation pins the policy rate, the
//! Taylor rule then pins inflation, money demand pins real balances and the
//! budget constraint leaves real debt as the residual.

use serde::{Deserialize, Serialize};

use crate::env::{draw_shocks, Shocks};
use crate::error::{Error, Result};
use crate::model::equations::clearing_output;
use crate::model::{
    compute_steady_state, fiscal_tax, money_demand, solve_steady_inflation, taylor_inverse, Branch,
    ModelParams, SteadyState,
};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beliefs {
    pub pi_e: f64,
    pub b_e: f64,
    /// Expected consumption; output is exogenous so this stays at its
    /// non-stochastic level.
    pub c_e: f64,
}

impl Beliefs {
    pub fn at(ss: &SteadyState) -> Self {
        Beliefs {
            pi_e: ss.pi,
            b_e: ss.b,
            c_e: ss.c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gain {
    /// `1/t`
    Decreasing,
    Constant(f64),
}

pub fn gain_schedule(t: usize, kind: Gain) -> f64 {
    match kind {
        Gain::Decreasing => 1.0 / t.max(1) as f64,
        Gain::Constant(k) => k,
    }
}

/// Move beliefs towards the observation `(pi, b)` by `gain`.
pub fn update_beliefs(bel: Beliefs, obs: (f64, f64), gain: f64) -> Beliefs {
    Beliefs {
        pi_e: bel.pi_e + gain * (obs.0 - bel.pi_e),
        b_e: bel.b_e + gain * (obs.1 - bel.b_e),
        c_e: bel.c_e,
    }
}

/// Predetermined variables entering a period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lagged {
    pub m_prev: f64,
    pub b_prev: f64,
    pub r_prev: f64,
}

impl Lagged {
    pub fn at(ss: &SteadyState) -> Self {
        Lagged {
            m_prev: ss.m,
            b_prev: ss.b,
            r_prev: ss.r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporaryEquilibrium {
    pub pi: f64,
    pub b: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub c: f64,
    pub m: f64,
    pub tau: f64,
}

/// One-period outcome under point expectations. `period` only labels the
/// error.
pub fn temporary_equilibrium(
    bel: &Beliefs,
    prev: &Lagged,
    shocks: &Shocks,
    p: &ModelParams,
    period: usize,
) -> Result<TemporaryEquilibrium> {
    let infeasible = |reason: String| Error::InfeasibleBeliefs { period, reason };
    let c = clearing_output(shocks.eps_y, p);
    let r = bel.pi_e / p.beta * (bel.c_e / c).powf(p.sigma);
    let pi = taylor_inverse(r, shocks.eps_r, p)
        .ok_or_else(|| infeasible(format!("implied policy rate {r} does not exceed one")))?;
    if !(pi > p.beta) {
        return Err(infeasible(format!(
            "implied inflation {pi} is not above beta"
        )));
    }
    let m = money_demand(c, r, p).map_err(|e| infeasible(e.to_string()))?;
    let tau = fiscal_tax(prev.b_prev, shocks.eps_tau, p);
    let b = prev.m_prev / pi + prev.r_prev * prev.b_prev / pi - m - tau;
    Ok(TemporaryEquilibrium {
        pi,
        b,
        r,
        c,
        m,
        tau,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlRow {
    pub t: usize,
    pub pi: f64,
    pub b: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub c: f64,
    pub m: f64,
    pub tau: f64,
    pub pi_e: f64,
    pub b_e: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlTrajectory {
    pub rows: Vec<AlRow>,
    /// Beliefs ended close to the steady state the run was started at.
    pub converged: bool,
    /// The steady state the beliefs ended close to, if any.
    pub limit: Option<Branch>,
    /// First period at which the belief distance exceeded ten times its
    /// starting value.
    pub diverged_at: Option<usize>,
    /// Belief distance `max(|pi_e - pi|, |b_e - b|/b)` before the first
    /// period.
    pub initial_distance: f64,
    /// Period at which the run stopped early because values exploded.
    pub exploded_at: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlConfig {
    pub params: ModelParams,
    /// Steady state the economy starts at and convergence is judged against.
    pub target: Branch,
    pub horizon: usize,
    pub gain: Gain,
    pub shocks: bool,
    pub seed: u64,
}

/// Belief distance to a steady state.
pub fn belief_distance(bel: &Beliefs, ss: &SteadyState) -> f64 {
    (bel.pi_e - ss.pi)
        .abs()
        .max((bel.b_e - ss.b).abs() / ss.b.abs())
}

/// Result of a learning run that may have stopped on infeasible beliefs.
#[derive(Debug)]
pub struct AlRun {
    pub trajectory: AlTrajectory,
    pub stopped: Option<Error>,
}

const EXPLOSION: f64 = 1e12;

/// Run the learning recursion and keep whatever was simulated if beliefs
/// become infeasible.
///
/// The lagged variables start at the target steady state. Each period the
/// temporary equilibrium is computed from current beliefs, then beliefs
/// absorb the previous period's realized inflation and debt.
pub fn run_al(cfg: &AlConfig, bel0: Beliefs) -> Result<AlRun> {
    if cfg.horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    let p = cfg.params;
    let (hi, lo) = solve_steady_inflation(&p)?;
    let ss_hi = compute_steady_state(hi, &p)?;
    let ss_lo = compute_steady_state(lo, &p)?;
    let target = match cfg.target {
        Branch::High => ss_hi,
        Branch::Low => ss_lo,
    };
    let mut rng = seeded(cfg.seed);
    let mut bel = bel0;
    let mut prev = Lagged::at(&target);
    let mut obs = (target.pi, target.b);
    let d0 = belief_distance(&bel0, &target);
    let mut rows = Vec::with_capacity(cfg.horizon);
    let mut diverged_at = None;
    let mut exploded_at = None;
    let mut stopped = None;
    for t in 1..=cfg.horizon {
        let shocks = draw_shocks(&mut rng, &p, cfg.shocks);
        let te = match temporary_equilibrium(&bel, &prev, &shocks, &p, t) {
            Ok(te) => te,
            Err(e) => {
                stopped = Some(e);
                break;
            }
        };
        let gain = gain_schedule(t, cfg.gain);
        bel = update_beliefs(bel, obs, gain);
        rows.push(AlRow {
            t,
            pi: te.pi,
            b: te.b,
            r: te.r,
            c: te.c,
            m: te.m,
            tau: te.tau,
            pi_e: bel.pi_e,
            b_e: bel.b_e,
            gain,
        });
        let d = belief_distance(&bel, &target);
        if diverged_at.is_none() && d0 > 0.0 && d > 10.0 * d0 {
            diverged_at = Some(t);
        }
        if !(te.b.abs() < EXPLOSION && bel.b_e.abs() < EXPLOSION && d.is_finite()) {
            exploded_at = Some(t);
            break;
        }
        obs = (te.pi, te.b);
        prev = Lagged {
            m_prev: te.m,
            b_prev: te.b,
            r_prev: te.r,
        };
    }
    let tol = if cfg.shocks { 1e-3 } else { 1e-4 };
    let complete = stopped.is_none() && exploded_at.is_none();
    let near = |ss: &SteadyState| complete && last_decile_close(&rows, ss, tol);
    let converged = near(&target);
    let limit = if near(&ss_hi) {
        Some(Branch::High)
    } else if near(&ss_lo) {
        Some(Branch::Low)
    } else {
        None
    };
    Ok(AlRun {
        trajectory: AlTrajectory {
            rows,
            converged,
            limit,
            diverged_at,
            initial_distance: d0,
            exploded_at,
        },
        stopped,
    })
}

/// Like [`run_al`] but infeasible beliefs are an error carrying the period.
pub fn simulate_al(cfg: &AlConfig, bel0: Beliefs) -> Result<AlTrajectory> {
    let run = run_al(cfg, bel0)?;
    match run.stopped {
        Some(e) => Err(e),
        None => Ok(run.trajectory),
    }
}

/// Mean absolute belief gaps over the final tenth of the rows.
pub fn last_decile_gaps(rows: &[AlRow], ss: &SteadyState) -> (f64, f64) {
    let k = (rows.len() / 10).max(1).min(rows.len());
    let tail = &rows[rows.len() - k..];
    let n = tail.len() as f64;
    let dpi = tail.iter().map(|r| (r.pi_e - ss.pi).abs()).sum::<f64>() / n;
    let db = tail.iter().map(|r| (r.b_e - ss.b).abs()).sum::<f64>() / n;
    (dpi, db)
}

fn last_decile_close(rows: &[AlRow], ss: &SteadyState, tol: f64) -> bool {
    if rows.is_empty() {
        return false;
    }
    let (dpi, db) = last_decile_gaps(rows, ss);
    dpi < tol && db < tol * ss.b.abs()
}

pub fn write_trajectory<W: std::io::Write>(rows: &[AlRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<trajectory>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PolicyConfig, Regime};

    fn setup(regime: Regime) -> (ModelParams, SteadyState) {
        regime
            .calibrate(&ModelParams::baseline(), &PolicyConfig::default())
            .unwrap()
    }

    #[test]
    fn gain_kinds() {
        assert_eq!(gain_schedule(1, Gain::Decreasing), 1.0);
        assert_eq!(gain_schedule(100, Gain::Decreasing), 0.01);
        assert_eq!(gain_schedule(7, Gain::Constant(0.05)), 0.05);
    }

    #[test]
    fn belief_update_cases() {
        let bel = Beliefs {
            pi_e: 1.0,
            b_e: 4.0,
            c_e: 1.0,
        };
        let full = update_beliefs(bel, (1.02, 3.0), 1.0);
        assert_eq!((full.pi_e, full.b_e), (1.02, 3.0));
        let half = update_beliefs(bel, (1.02, 4.0), 0.5);
        assert!((half.pi_e - 1.01).abs() < 1e-15);
        assert_eq!(half.c_e, 1.0);
    }

    #[test]
    fn decreasing_gain_is_a_running_mean() {
        let obs = [1.3, 0.2, 5.0, -1.0, 2.5, 0.7, 3.3];
        let mut bel = Beliefs {
            pi_e: 9.0,
            b_e: 9.0,
            c_e: 1.0,
        };
        for (i, &x) in obs.iter().enumerate() {
            bel = update_beliefs(bel, (x, x), gain_schedule(i + 1, Gain::Decreasing));
            let mean = obs[..=i].iter().sum::<f64>() / (i + 1) as f64;
            assert!((bel.pi_e - mean).abs() <= 1e-12);
        }
    }

    #[test]
    fn steady_states_are_temporary_equilibria() {
        for regime in Regime::ALL {
            let (p, ss) = setup(regime);
            let te =
                temporary_equilibrium(&Beliefs::at(&ss), &Lagged::at(&ss), &Shocks::NONE, &p, 1)
                    .unwrap();
            for (x, y) in [
                (te.pi, ss.pi),
                (te.b, ss.b),
                (te.r, ss.r),
                (te.c, ss.c),
                (te.m, ss.m),
            ] {
                assert!((x - y).abs() <= 1e-10, "{regime}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn unperturbed_run_stays_put() {
        let (p, ss) = setup(Regime::AmpPfp);
        let cfg = AlConfig {
            params: p,
            target: Branch::High,
            horizon: 200,
            gain: Gain::Decreasing,
            shocks: false,
            seed: 0,
        };
        let traj = simulate_al(&cfg, Beliefs::at(&ss)).unwrap();
        assert!(traj.converged);
        assert_eq!(traj.limit, Some(Branch::High));
        assert!(traj.rows.iter().all(|r| (r.pi_e - ss.pi).abs() < 1e-12));
    }

    #[test]
    fn negative_rate_beliefs_are_infeasible() {
        let (p, ss) = setup(Regime::PmpAfp);
        let bel = Beliefs {
            pi_e: 0.98,
            ..Beliefs::at(&ss)
        };
        let err = temporary_equilibrium(&bel, &Lagged::at(&ss), &Shocks::NONE, &p, 17).unwrap_err();
        assert!(matches!(err, Error::InfeasibleBeliefs { period: 17, .. }));
    }
}
