use std::path::Path;

use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis};
use rand_distr::{Distribution, StandardNormal};

use super::replay::Batch;
use super::scaling::{ActionScaler, ObsScaler};
use crate::env::{Action, ActionBounds, EnvState};
use crate::error::{Error, Result};
use crate::nn::io::{write_atomic, Decoder, Encoder};
use crate::nn::{Adam, Grads, Network, ScalarAdam};
use crate::rng::{derive_seed, Rng};

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

const OBS_DIM: usize = EnvState::DIM;
const ACT_DIM: usize = Action::DIM;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActMode {
    /// Squashed mean, no noise.
    Exploit,
    /// Squashed Gaussian sample.
    Explore,
    /// Uniform over the action bounds.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SacConfig {
    pub hidden: Vec<usize>,
    pub lr: f64,
    /// Target smoothing coefficient.
    pub tau: f64,
    pub auto_entropy: bool,
    pub init_log_alpha: f64,
    /// Defaults to minus the action dimension.
    pub target_entropy: Option<f64>,
    pub reward_scale: f64,
}

impl Default for SacConfig {
    fn default() -> Self {
        SacConfig {
            hidden: vec![32, 32],
            lr: 1e-5,
            tau: 1e-3,
            auto_entropy: true,
            init_log_alpha: 0.0,
            target_entropy: None,
            reward_scale: 1.0,
        }
    }
}

impl SacConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.hidden.contains(&0) {
            return bad("hidden layer widths must be positive");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("learning rate must be positive");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must lie in (0, 1]");
        }
        if !self.init_log_alpha.is_finite() || !self.reward_scale.is_finite() {
            return bad("temperature and reward scale must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Losses {
    pub critic1: f64,
    pub critic2: f64,
    pub actor: f64,
    pub temperature: f64,
    /// Temperature after the update.
    pub alpha: f64,
    /// Mean log-probability of the actor-update samples.
    pub entropy_logp: f64,
}

/// `ln(1 - tanh(u)^2)` without cancellation for large `|u|`.
pub fn log1m_tanh2(u: f64) -> f64 {
    2.0 * (std::f64::consts::LN_2 - u - softplus(-2.0 * u))
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Log-density of `tanh(u)` in the squashed `[-1, 1]` space for a
/// diagonal Gaussian `u ~ N(mean, exp(log_std)^2)`.
pub fn squashed_log_prob(mean: &[f64], log_std: &[f64], u: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(u)
        .map(|((&m, &ls), &u)| {
            let z = (u - m) / ls.exp();
            -0.5 * z * z - ls - HALF_LN_2PI - log1m_tanh2(u)
        })
        .sum()
}

/// Gaussian draw plus its squashed image and log-density, one row per sample.
struct Sample {
    eps: Array2<f64>,
    std: Array2<f64>,
    squashed: Array2<f64>,
    logp: Array1<f64>,
}

fn clamp_log_std(raw: f64) -> f64 {
    raw.clamp(LOG_STD_MIN, LOG_STD_MAX)
}

fn draw_normal(rows: usize, rng: &mut Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, ACT_DIM), || StandardNormal.sample(rng))
}

fn reparam(out: &Array2<f64>, eps: Array2<f64>) -> Sample {
    let n = out.nrows();
    let mean = out.slice(s![.., ..ACT_DIM]);
    let std = out
        .slice(s![.., ACT_DIM..])
        .mapv(|v| clamp_log_std(v).exp());
    let mut squashed = Array2::zeros((n, ACT_DIM));
    let mut logp = Array1::zeros(n);
    for i in 0..n {
        let mut lp = 0.0;
        for j in 0..ACT_DIM {
            let u = mean[[i, j]] + std[[i, j]] * eps[[i, j]];
            squashed[[i, j]] = u.tanh();
            let e = eps[[i, j]];
            lp += -0.5 * e * e - std[[i, j]].ln() - HALF_LN_2PI - log1m_tanh2(u);
        }
        logp[i] = lp;
    }
    Sample {
        eps,
        std,
        squashed,
        logp,
    }
}

fn finite(v: f64, step: u64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::TrainingDivergence { step, what })
    }
}

/// Soft actor-critic agent with twin critics and automatic temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub actor: Network,
    pub critic1: Network,
    pub critic2: Network,
    pub target1: Network,
    pub target2: Network,
    pub log_alpha: f64,
    pub target_entropy: f64,
    pub auto_entropy: bool,
    pub tau: f64,
    pub reward_scale: f64,
    pub actor_opt: Adam,
    pub critic1_opt: Adam,
    pub critic2_opt: Adam,
    pub alpha_opt: ScalarAdam,
    pub obs_scaler: ObsScaler,
    pub bounds: ActionBounds,
    /// Number of completed updates.
    pub updates: u64,
}

impl Agent {
    pub fn new(
        cfg: &SacConfig,
        obs_scaler: ObsScaler,
        bounds: ActionBounds,
        seed: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        bounds.validate()?;
        let dims = |inp: usize, out: usize| {
            let mut d = vec![inp];
            d.extend(&cfg.hidden);
            d.push(out);
            d
        };
        let actor = Network::new(&dims(OBS_DIM, 2 * ACT_DIM), derive_seed(seed, 1))?;
        let critic1 = Network::new(&dims(OBS_DIM + ACT_DIM, 1), derive_seed(seed, 2))?;
        let critic2 = Network::new(&dims(OBS_DIM + ACT_DIM, 1), derive_seed(seed, 3))?;
        Ok(Agent {
            actor_opt: Adam::new(&actor, cfg.lr),
            critic1_opt: Adam::new(&critic1, cfg.lr),
            critic2_opt: Adam::new(&critic2, cfg.lr),
            alpha_opt: ScalarAdam::new(cfg.lr),
            target1: critic1.clone(),
            target2: critic2.clone(),
            actor,
            critic1,
            critic2,
            log_alpha: cfg.init_log_alpha,
            target_entropy: cfg.target_entropy.unwrap_or(-(ACT_DIM as f64)),
            auto_entropy: cfg.auto_entropy,
            tau: cfg.tau,
            reward_scale: cfg.reward_scale,
            obs_scaler,
            bounds,
            updates: 0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    pub fn action_scaler(&self) -> ActionScaler {
        ActionScaler::new(&self.bounds)
    }

    pub fn observe(&self, s: &EnvState) -> [f64; OBS_DIM] {
        self.obs_scaler.observe(s)
    }

    /// Mean and clamped log-std of the pre-squash Gaussian.
    pub fn policy(&self, obs: &[f64]) -> Result<([f64; ACT_DIM], [f64; ACT_DIM])> {
        let out = self.actor.forward_one(obs)?;
        Ok((
            std::array::from_fn(|j| out[j]),
            std::array::from_fn(|j| clamp_log_std(out[ACT_DIM + j])),
        ))
    }

    /// Action in model units together with its squashed `[-1, 1]` image.
    pub fn act_squashed(
        &self,
        obs: &[f64],
        mode: ActMode,
        rng: &mut Rng,
    ) -> Result<(Action, [f64; ACT_DIM])> {
        let sc = self.action_scaler();
        let squashed = match mode {
            ActMode::Random => {
                let iv = self.bounds.intervals();
                let a = Action::from_array(std::array::from_fn(|j| iv[j].sample(rng)));
                return Ok((a, sc.to_squashed(&a)));
            }
            ActMode::Exploit => {
                let (mean, _) = self.policy(obs)?;
                mean.map(f64::tanh)
            }
            ActMode::Explore => {
                let (mean, ls) = self.policy(obs)?;
                std::array::from_fn(|j| {
                    let e: f64 = StandardNormal.sample(rng);
                    (mean[j] + ls[j].exp() * e).tanh()
                })
            }
        };
        Ok((sc.to_action(&squashed), squashed))
    }

    pub fn act(&self, obs: &[f64], mode: ActMode, rng: &mut Rng) -> Result<Action> {
        Ok(self.act_squashed(obs, mode, rng)?.0)
    }

    /// Log-density in action units of the action produced by the
    /// pre-squash sample `u`.
    pub fn log_prob(&self, obs: &[f64], u: &[f64]) -> Result<f64> {
        if u.len() != ACT_DIM {
            return Err(Error::Dimension {
                expected: ACT_DIM,
                got: u.len(),
            });
        }
        let (mean, ls) = self.policy(obs)?;
        Ok(squashed_log_prob(&mean, &ls, u) - self.action_scaler().log_scale())
    }

    /// Per-row bootstrapped critic targets.
    pub fn critic_targets(&self, batch: &Batch, beta: f64, rng: &mut Rng) -> Result<Array1<f64>> {
        let eps = draw_normal(batch.len(), rng);
        self.critic_targets_with(batch, beta, eps)
    }

    fn critic_targets_with(
        &self,
        batch: &Batch,
        beta: f64,
        eps: Array2<f64>,
    ) -> Result<Array1<f64>> {
        let out = self.actor.predict(batch.next_obs.view())?;
        let smp = reparam(&out, eps);
        let inp = concatenate![Axis(1), batch.next_obs, smp.squashed];
        let q1 = self.target1.predict(inp.view())?;
        let q2 = self.target2.predict(inp.view())?;
        let alpha = self.alpha();
        let mut y = Array1::zeros(batch.len());
        for i in 0..batch.len() {
            let r = self.reward_scale * batch.reward[i];
            y[i] = if batch.done[i] != 0.0 {
                r
            } else {
                r + beta * (q1[[i, 0]].min(q2[[i, 0]]) - alpha * smp.logp[i])
            };
        }
        Ok(y)
    }

    /// Value of the actor objective `mean(alpha logp - min(Q1, Q2))` for
    /// fixed reparameterization noise.
    pub fn actor_objective(&self, obs: ArrayView2<f64>, eps: ArrayView2<f64>) -> Result<f64> {
        Ok(self.actor_grads(obs, eps.to_owned())?.0)
    }

    /// Actor objective, its parameter gradient and the per-row
    /// log-probabilities for fixed reparameterization noise.
    pub fn actor_grads(
        &self,
        obs: ArrayView2<f64>,
        eps: Array2<f64>,
    ) -> Result<(f64, Grads, Array1<f64>)> {
        let n = obs.nrows();
        let nf = n as f64;
        let alpha = self.alpha();
        let (out, acache) = self.actor.forward(obs)?;
        let smp = reparam(&out, eps);
        let inp = concatenate![Axis(1), obs, smp.squashed];
        let (q1, c1) = self.critic1.forward(inp.view())?;
        let (q2, c2) = self.critic2.forward(inp.view())?;
        let mut g1 = Array2::zeros((n, 1));
        let mut g2 = Array2::zeros((n, 1));
        let mut loss = 0.0;
        for i in 0..n {
            let (a, b) = (q1[[i, 0]], q2[[i, 0]]);
            if a <= b {
                g1[[i, 0]] = -1.0 / nf;
            } else {
                g2[[i, 0]] = -1.0 / nf;
            }
            loss += alpha * smp.logp[i] - a.min(b);
        }
        let (_, dx1) = self.critic1.backward(&c1, g1.view())?;
        let (_, dx2) = self.critic2.backward(&c2, g2.view())?;
        let dq = &dx1.slice(s![.., OBS_DIM..]) + &dx2.slice(s![.., OBS_DIM..]);
        let mut grad = Array2::zeros((n, 2 * ACT_DIM));
        for i in 0..n {
            for j in 0..ACT_DIM {
                let a = smp.squashed[[i, j]];
                // d/du of -ln(1 - tanh(u)^2) is 2 tanh(u)
                let du = dq[[i, j]] * (1.0 - a * a) + alpha * 2.0 * a / nf;
                grad[[i, j]] = du;
                let raw = out[[i, ACT_DIM + j]];
                grad[[i, ACT_DIM + j]] = if (LOG_STD_MIN..=LOG_STD_MAX).contains(&raw) {
                    du * smp.std[[i, j]] * smp.eps[[i, j]] - alpha / nf
                } else {
                    0.0
                };
            }
        }
        let (ga, _) = self.actor.backward(&acache, grad.view())?;
        Ok((loss / nf, ga, smp.logp))
    }

    fn critic_step(
        net: &mut Network,
        opt: &mut Adam,
        inp: ArrayView2<f64>,
        y: &Array1<f64>,
        step: u64,
        what: &'static str,
    ) -> Result<f64> {
        let n = y.len() as f64;
        let (q, cache) = net.forward(inp)?;
        let diff = &q.column(0) - y;
        let loss = finite(0.5 * diff.mapv(|d| d * d).sum() / n, step, what)?;
        let grad = (diff / n).insert_axis(Axis(1));
        let (g, _) = net.backward(&cache, grad.view())?;
        if !g.all_finite() {
            return Err(Error::TrainingDivergence { step, what });
        }
        opt.step(net, &g);
        Ok(loss)
    }

    /// One gradient step on critics, actor and temperature followed by a
    /// soft target update.
    pub fn update(&mut self, batch: &Batch, beta: f64, rng: &mut Rng) -> Result<Losses> {
        if batch.is_empty() {
            return Err(Error::Dimension {
                expected: 1,
                got: 0,
            });
        }
        let step = self.updates;
        let n = batch.len();

        let y = self.critic_targets(batch, beta, rng)?;
        let inp = concatenate![Axis(1), batch.obs, batch.action];
        let critic1 = Self::critic_step(
            &mut self.critic1,
            &mut self.critic1_opt,
            inp.view(),
            &y,
            step,
            "critic1 loss",
        )?;
        let critic2 = Self::critic_step(
            &mut self.critic2,
            &mut self.critic2_opt,
            inp.view(),
            &y,
            step,
            "critic2 loss",
        )?;

        let eps = draw_normal(n, rng);
        let (actor, ga, logp) = self.actor_grads(batch.obs.view(), eps)?;
        let actor = finite(actor, step, "actor loss")?;
        if !ga.all_finite() {
            return Err(Error::TrainingDivergence {
                step,
                what: "actor gradient",
            });
        }
        self.actor_opt.step(&mut self.actor, &ga);

        let entropy_logp = logp.mean().unwrap_or(0.0);
        let gap = entropy_logp + self.target_entropy;
        let temperature = finite(-self.log_alpha * gap, step, "temperature loss")?;
        if self.auto_entropy {
            self.alpha_opt.step(&mut self.log_alpha, -gap);
        }

        self.soft_update(self.tau);
        self.updates += 1;
        Ok(Losses {
            critic1,
            critic2,
            actor,
            temperature,
            alpha: self.alpha(),
            entropy_logp,
        })
    }

    /// `target <- (1 - tau) target + tau critic`.
    pub fn soft_update(&mut self, tau: f64) {
        self.target1.soft_update_from(&self.critic1, tau);
        self.target2.soft_update_from(&self.critic2, tau);
    }

    /// Exchange the two critics together with their targets and optimizers.
    pub fn swap_critics(&mut self) {
        std::mem::swap(&mut self.critic1, &mut self.critic2);
        std::mem::swap(&mut self.target1, &mut self.target2);
        std::mem::swap(&mut self.critic1_opt, &mut self.critic2_opt);
    }

    pub fn to_bytes(&self, step: u64) -> Vec<u8> {
        let mut enc = Encoder::new(Vec::new());
        let write = |enc: &mut Encoder<Vec<u8>>| -> std::io::Result<()> {
            enc.header()?;
            enc.u64(step)?;
            enc.u64(self.updates)?;
            enc.f64s(self.obs_scaler.center.iter().chain(&self.obs_scaler.half))?;
            for iv in self.bounds.intervals() {
                enc.f64(iv.min)?;
                enc.f64(iv.max)?;
            }
            enc.f64s(
                [
                    self.log_alpha,
                    self.target_entropy,
                    self.tau,
                    self.reward_scale,
                ]
                .iter(),
            )?;
            enc.u8(self.auto_entropy as u8)?;
            for net in [
                &self.actor,
                &self.critic1,
                &self.critic2,
                &self.target1,
                &self.target2,
            ] {
                enc.network(net)?;
            }
            enc.adam(&self.actor_opt)?;
            enc.adam(&self.critic1_opt)?;
            enc.adam(&self.critic2_opt)?;
            enc.scalar_adam(&self.alpha_opt)
        };
        write(&mut enc).expect("writing to memory");
        enc.finish().expect("writing to memory")
    }

    /// Decode an agent and the training step it was saved at.
    pub fn from_bytes(bytes: &[u8]) -> Result<(Agent, u64)> {
        let mut d = Decoder::new(bytes);
        d.header()?;
        let step = d.u64()?;
        let updates = d.u64()?;
        let mut sc = [0.0; 2 * OBS_DIM];
        for v in sc.iter_mut() {
            *v = d.f64()?;
        }
        let obs_scaler = ObsScaler {
            center: std::array::from_fn(|i| sc[i]),
            half: std::array::from_fn(|i| sc[OBS_DIM + i]),
        };
        let mut iv = [(0.0, 0.0); ACT_DIM];
        for v in iv.iter_mut() {
            *v = (d.f64()?, d.f64()?);
        }
        let bounds = ActionBounds {
            c_act: crate::env::Interval::new(iv[0].0, iv[0].1),
            b_act: crate::env::Interval::new(iv[1].0, iv[1].1),
            n: crate::env::Interval::new(iv[2].0, iv[2].1),
        };
        let (log_alpha, target_entropy, tau, reward_scale) =
            (d.f64()?, d.f64()?, d.f64()?, d.f64()?);
        let auto_entropy = d.u8()? != 0;
        let actor = d.network()?;
        let critic1 = d.network()?;
        let critic2 = d.network()?;
        let target1 = d.network()?;
        let target2 = d.network()?;
        let actor_opt = d.adam(&actor)?;
        let critic1_opt = d.adam(&critic1)?;
        let critic2_opt = d.adam(&critic2)?;
        let alpha_opt = d.scalar_adam()?;
        d.finish()?;
        let bad = |m: &str| Error::Checkpoint {
            path: Default::default(),
            reason: m.to_string(),
        };
        if actor.input_dim() != OBS_DIM || actor.output_dim() != 2 * ACT_DIM {
            return Err(bad("actor has the wrong shape"));
        }
        for c in [&critic1, &critic2] {
            if c.input_dim() != OBS_DIM + ACT_DIM || c.output_dim() != 1 {
                return Err(bad("critic has the wrong shape"));
            }
        }
        if target1.dims() != critic1.dims() || target2.dims() != critic2.dims() {
            return Err(bad("target networks do not match critics"));
        }
        bounds.validate().map_err(|e| bad(&e.to_string()))?;
        Ok((
            Agent {
                actor,
                critic1,
                critic2,
                target1,
                target2,
                log_alpha,
                target_entropy,
                auto_entropy,
                tau,
                reward_scale,
                actor_opt,
                critic1_opt,
                critic2_opt,
                alpha_opt,
                obs_scaler,
                bounds,
                updates,
            },
            step,
        ))
    }

    pub fn save(&self, path: &Path, step: u64) -> Result<()> {
        write_atomic(path, &self.to_bytes(step))
    }

    pub fn load(path: &Path) -> Result<(Agent, u64)> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Agent::from_bytes(&bytes).map_err(|e| match e {
            Error::Checkpoint { reason, .. } => Error::Checkpoint {
                path: path.to_path_buf(),
                reason,
            },
            other => other,
        })
    }
}
