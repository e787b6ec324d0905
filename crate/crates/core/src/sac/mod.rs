//! Soft actor-critic: squashed-Gaussian actor, twin critics with slowly
//! tracking targets, a replay ring and automatic temperature tuning.

mod agent;
mod replay;
mod scaling;

pub use agent::{
    log1m_tanh2, squashed_log_prob, ActMode, Agent, Losses, SacConfig, LOG_STD_MAX, LOG_STD_MIN,
};
pub use replay::{Batch, ReplayBuffer, Transition};
pub use scaling::{ActionScaler, ObsScaler};
