//! Episodic model economy seen from one representative household.
//!
//! The household chooses nominal-deflated consumption `c_act`, bond
//! holdings `b_act` and hours `n`. Prices then clear the goods market and
//! real money is whatever the government budget constraint leaves over.

use rand::Rng as _;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::equations::{output, wage};
use crate::model::{fiscal_tax, taylor_rate, utility, ModelParams, SteadyState};
use crate::rng::Rng;

/// Lower bound substituted for an infeasible quantity when pricing the
/// terminal penalty.
pub const INFEASIBLE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shocks {
    pub eps_tau: f64,
    pub eps_r: f64,
    pub eps_y: f64,
}

impl Shocks {
    /// Shocks at their means.
    pub const NONE: Shocks = Shocks {
        eps_tau: 0.0,
        eps_r: 1.0,
        eps_y: 1.0,
    };
}

/// Draw one period of shocks: additive normal tax shock, mean-one
/// log-normal rate shock and mean-one normal technology shock truncated
/// above zero. Disabled shocks sit at their means and consume no draws.
pub fn draw_shocks(rng: &mut Rng, p: &ModelParams, enabled: bool) -> Shocks {
    if !enabled {
        return Shocks::NONE;
    }
    let eps_tau = Normal::new(0.0, p.sd_tau)
        .expect("validated sd")
        .sample(rng);
    let s2 = (1.0 + p.sd_r * p.sd_r).ln();
    let eps_r = LogNormal::new(-0.5 * s2, s2.sqrt())
        .expect("validated sd")
        .sample(rng);
    let tech = Normal::new(1.0, p.sd_y).expect("validated sd");
    let eps_y = loop {
        let x = tech.sample(rng);
        if x > 0.0 {
            break x;
        }
    };
    Shocks {
        eps_tau,
        eps_r,
        eps_y,
    }
}

/// Observation the household receives at the start of a period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub m_prev: f64,
    pub b_prev: f64,
    pub pi_prev: f64,
    pub c_prev: f64,
    pub n_prev: f64,
    pub eps_tau: f64,
    pub eps_r: f64,
    pub eps_y: f64,
}

impl EnvState {
    pub const DIM: usize = 8;

    pub fn to_array(&self) -> [f64; Self::DIM] {
        [
            self.m_prev,
            self.b_prev,
            self.pi_prev,
            self.c_prev,
            self.n_prev,
            self.eps_tau,
            self.eps_r,
            self.eps_y,
        ]
    }

    pub fn from_array(a: [f64; Self::DIM]) -> Self {
        EnvState {
            m_prev: a[0],
            b_prev: a[1],
            pi_prev: a[2],
            c_prev: a[3],
            n_prev: a[4],
            eps_tau: a[5],
            eps_r: a[6],
            eps_y: a[7],
        }
    }

    pub fn shocks(&self) -> Shocks {
        Shocks {
            eps_tau: self.eps_tau,
            eps_r: self.eps_r,
            eps_y: self.eps_y,
        }
    }

    /// The state that a steady state reproduces, with the given shocks.
    pub fn from_steady(ss: &SteadyState, shocks: Shocks) -> Self {
        EnvState {
            m_prev: ss.m,
            b_prev: ss.b,
            pi_prev: ss.pi,
            c_prev: ss.c,
            n_prev: ss.n,
            eps_tau: shocks.eps_tau,
            eps_r: shocks.eps_r,
            eps_y: shocks.eps_y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub c_act: f64,
    pub b_act: f64,
    pub n: f64,
}

impl Action {
    pub const DIM: usize = 3;

    pub fn to_array(&self) -> [f64; Self::DIM] {
        [self.c_act, self.b_act, self.n]
    }

    pub fn from_array(a: [f64; Self::DIM]) -> Self {
        Action {
            c_act: a[0],
            b_act: a[1],
            n: a[2],
        }
    }
}

/// The action triple that reproduces `ss` as a fixed point.
pub fn steady_actions(ss: &SteadyState) -> Action {
    Action {
        c_act: ss.pi * ss.y,
        b_act: ss.pi * ss.b,
        n: ss.n,
    }
}

/// Closed interval `[min, max]`; `min == max` is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub const fn new(min: f64, max: f64) -> Self {
        Interval { min, max }
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min <= self.max) {
            return Err(Error::Config(format!(
                "{what}: invalid bounds [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.min <= x && x <= self.max
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.min, self.max)
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.max - self.min)
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.random_range(self.min..=self.max)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionBounds {
    pub c_act: Interval,
    pub b_act: Interval,
    pub n: Interval,
}

impl ActionBounds {
    pub fn validate(&self) -> Result<()> {
        self.c_act.validate("c_act")?;
        self.b_act.validate("b_act")?;
        self.n.validate("n")?;
        if self.n.min <= 0.0 || self.c_act.min <= 0.0 {
            return Err(Error::Config(
                "hours and consumption bounds must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn intervals(&self) -> [Interval; Action::DIM] {
        [self.c_act, self.b_act, self.n]
    }

    pub fn clamp(&self, a: Action) -> Action {
        Action {
            c_act: self.c_act.clamp(a.c_act),
            b_act: self.b_act.clamp(a.b_act),
            n: self.n.clamp(a.n),
        }
    }

    pub fn contains(&self, a: &Action) -> bool {
        self.c_act.contains(a.c_act) && self.b_act.contains(a.b_act) && self.n.contains(a.n)
    }
}

/// Box from which episode start states are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateBox {
    pub m: Interval,
    pub b: Interval,
    pub c: Interval,
    pub pi: Interval,
    pub n: Interval,
}

impl StateBox {
    pub fn validate(&self) -> Result<()> {
        for (name, iv) in [
            ("m", self.m),
            ("b", self.b),
            ("c", self.c),
            ("pi", self.pi),
            ("n", self.n),
        ] {
            iv.validate(name)?;
            if iv.min <= 0.0 {
                return Err(Error::Config(format!(
                    "{name}: initial box must be positive"
                )));
            }
        }
        Ok(())
    }

    /// Degenerate box at a single state.
    pub fn point(ss: &SteadyState) -> Self {
        let pt = |x| Interval::new(x, x);
        StateBox {
            m: pt(ss.m),
            b: pt(ss.b),
            c: pt(ss.c),
            pi: pt(ss.pi),
            n: pt(ss.n),
        }
    }
}

/// Action bounds and initial box for one monetary branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionBounds {
    pub action: ActionBounds,
    pub initial: StateBox,
}

impl RegionBounds {
    /// Region around the inflation target.
    pub fn amp() -> Self {
        RegionBounds {
            action: ActionBounds {
                c_act: Interval::new(1.005, 1.015),
                b_act: Interval::new(4.0, 4.08),
                n: Interval::new(0.99, 1.01),
            },
            initial: StateBox {
                m: Interval::new(1.67, 1.75),
                b: Interval::new(3.96, 4.04),
                c: Interval::new(0.995, 1.005),
                pi: Interval::new(1.005, 1.015),
                n: Interval::new(0.99, 1.01),
            },
        }
    }

    /// Region around the low-inflation steady state.
    pub fn pmp() -> Self {
        RegionBounds {
            action: ActionBounds {
                c_act: Interval::new(1.0, 1.003),
                b_act: Interval::new(3.965, 4.045),
                n: Interval::new(0.99, 1.01),
            },
            initial: StateBox {
                m: Interval::new(2.01, 2.11),
                b: Interval::new(3.96, 4.04),
                c: Interval::new(0.997, 1.003),
                pi: Interval::new(1.0, 1.003),
                n: Interval::new(0.99, 1.01),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.action.validate()?;
        self.initial.validate()
    }
}

/// Realized period outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub pi: f64,
    pub c: f64,
    pub b: f64,
    pub m: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub tau: f64,
    pub y: f64,
    pub w: f64,
    pub u: f64,
    /// Realized money or consumption was non-positive.
    pub infeasible: bool,
}

/// Apply one action to the economy without touching any random stream.
///
/// `r_prev` is last period's gross nominal rate, which the budget
/// constraint needs but the observation does not carry. Actions are used
/// as given; clamping is the caller's job.
pub fn transition(state: &EnvState, r_prev: f64, action: &Action, p: &ModelParams) -> StepInfo {
    let n = action.n;
    let y = output(n, state.eps_y, p);
    let w = wage(n, state.eps_y, p);
    let pi = action.c_act / y;
    let c = action.c_act / pi;
    let b = action.b_act / pi;
    let r = taylor_rate(pi, state.eps_r, p);
    let tau = fiscal_tax(state.b_prev, state.eps_tau, p);
    let m = state.m_prev / pi + r_prev * state.b_prev / pi - b - tau;
    let infeasible = !(m > 0.0 && c > 0.0);
    let u = if infeasible {
        utility(c.max(INFEASIBLE_FLOOR), m.max(INFEASIBLE_FLOOR), n, p)
    } else {
        utility(c, m, n, p)
    }
    .expect("arguments floored to positive values");
    StepInfo {
        pi,
        c,
        b,
        m,
        r,
        tau,
        y,
        w,
        u,
        infeasible,
    }
}

/// Episode end test on the utility change and the episode length.
pub fn is_terminal(
    u_prev: f64,
    u_curr: f64,
    steps_in_episode: usize,
    d_u_min: f64,
    n_epi_max: usize,
) -> bool {
    (u_curr - u_prev).abs() < d_u_min || steps_in_episode >= n_epi_max
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub params: ModelParams,
    pub bounds: RegionBounds,
    pub d_u_min: f64,
    pub n_epi_max: usize,
    pub shocks: bool,
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.bounds.validate()?;
        if !(self.d_u_min >= 0.0) || self.n_epi_max == 0 {
            return Err(Error::Config(
                "d_u_min must be >= 0 and n_epi_max >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub reward: f64,
    pub next_state: EnvState,
    /// Either terminated or truncated.
    pub done: bool,
    /// The episode ended on its own (utility settled or infeasible path);
    /// no value should be bootstrapped past this step.
    pub terminated: bool,
    /// The episode hit the step limit.
    pub truncated: bool,
    pub info: StepInfo,
    /// The clamped action that was actually applied.
    pub action: Action,
}

/// A single-owner environment instance with its own random stream.
#[derive(Debug, Clone)]
pub struct Env {
    cfg: EnvConfig,
    rng: Rng,
    state: EnvState,
    r_prev: f64,
    u_prev: f64,
    steps: usize,
}

impl Env {
    pub fn new(cfg: EnvConfig, rng: Rng) -> Result<Self> {
        cfg.validate()?;
        let mut env = Env {
            cfg,
            rng,
            state: EnvState::from_array([1.0; EnvState::DIM]),
            r_prev: 1.0,
            u_prev: 0.0,
            steps: 0,
        };
        env.reset();
        Ok(env)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn r_prev(&self) -> f64 {
        self.r_prev
    }

    pub fn steps_in_episode(&self) -> usize {
        self.steps
    }

    /// Start a new episode from a uniform draw over the initial box.
    pub fn reset(&mut self) -> EnvState {
        let b = self.cfg.bounds.initial;
        let m_prev = b.m.sample(&mut self.rng);
        let b_prev = b.b.sample(&mut self.rng);
        let pi_prev = b.pi.sample(&mut self.rng);
        let c_prev = b.c.sample(&mut self.rng);
        let n_prev = b.n.sample(&mut self.rng);
        let shocks = draw_shocks(&mut self.rng, &self.cfg.params, self.cfg.shocks);
        let state = EnvState {
            m_prev,
            b_prev,
            pi_prev,
            c_prev,
            n_prev,
            eps_tau: shocks.eps_tau,
            eps_r: shocks.eps_r,
            eps_y: shocks.eps_y,
        };
        self.set_state(state, taylor_rate(pi_prev, 1.0, &self.cfg.params));
        state
    }

    /// Place the environment at an explicit state with a given lagged rate.
    pub fn set_state(&mut self, state: EnvState, r_prev: f64) {
        self.state = state;
        self.r_prev = r_prev;
        self.u_prev = utility(state.c_prev, state.m_prev, state.n_prev, &self.cfg.params)
            .unwrap_or(f64::NEG_INFINITY);
        self.steps = 0;
    }

    pub fn step(&mut self, action: Action) -> StepResult {
        let p = self.cfg.params;
        let action = self.cfg.bounds.action.clamp(action);
        let info = transition(&self.state, self.r_prev, &action, &p);
        let shocks = draw_shocks(&mut self.rng, &p, self.cfg.shocks);
        let next_state = EnvState {
            m_prev: info.m,
            b_prev: info.b,
            pi_prev: info.pi,
            c_prev: info.c,
            n_prev: action.n,
            eps_tau: shocks.eps_tau,
            eps_r: shocks.eps_r,
            eps_y: shocks.eps_y,
        };
        self.steps += 1;
        let settled = (info.u - self.u_prev).abs() < self.cfg.d_u_min;
        let terminated = info.infeasible || settled;
        let truncated = !terminated && self.steps >= self.cfg.n_epi_max;
        self.state = next_state;
        self.r_prev = info.r;
        self.u_prev = info.u;
        StepResult {
            reward: info.u,
            next_state,
            done: terminated || truncated,
            terminated,
            truncated,
            info,
            action,
        }
    }
}

/// One logged transition, as written to the per-cycle CSV files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionRow {
    pub step: u64,
    pub episode: u64,
    pub phase: Phase,
    pub m_prev: f64,
    pub b_prev: f64,
    pub pi_prev: f64,
    pub c_prev: f64,
    pub n_prev: f64,
    pub eps_tau: f64,
    #[serde(rename = "eps_R")]
    pub eps_r: f64,
    pub eps_y: f64,
    pub c_act: f64,
    pub b_act: f64,
    pub n: f64,
    pub pi: f64,
    pub c: f64,
    pub b: f64,
    pub m: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub tau: f64,
    pub y: f64,
    pub reward: f64,
    pub done: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Train,
    Test,
}

impl TransitionRow {
    pub fn new(step: u64, episode: u64, phase: Phase, state: &EnvState, res: &StepResult) -> Self {
        TransitionRow {
            step,
            episode,
            phase,
            m_prev: state.m_prev,
            b_prev: state.b_prev,
            pi_prev: state.pi_prev,
            c_prev: state.c_prev,
            n_prev: state.n_prev,
            eps_tau: state.eps_tau,
            eps_r: state.eps_r,
            eps_y: state.eps_y,
            c_act: res.action.c_act,
            b_act: res.action.b_act,
            n: res.action.n,
            pi: res.info.pi,
            c: res.info.c,
            b: res.info.b,
            m: res.info.m,
            r: res.info.r,
            tau: res.info.tau,
            y: res.info.y,
            reward: res.reward,
            done: res.done,
        }
    }

    /// The observation this row started from.
    pub fn state(&self) -> EnvState {
        EnvState {
            m_prev: self.m_prev,
            b_prev: self.b_prev,
            pi_prev: self.pi_prev,
            c_prev: self.c_prev,
            n_prev: self.n_prev,
            eps_tau: self.eps_tau,
            eps_r: self.eps_r,
            eps_y: self.eps_y,
        }
    }
}
