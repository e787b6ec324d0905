use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::{EnvConfig, RegionBounds};
use crate::error::{Error, Result};
use crate::model::{ModelParams, PolicyConfig, Regime, SteadyState};
use crate::sac::SacConfig;

/// Learning and protocol settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearningConfig {
    pub n_train: u64,
    pub n_interval: u64,
    pub n_test: usize,
    pub n_epi_max: usize,
    pub n_burn: u64,
    pub n_mem: usize,
    pub batch_size: usize,
    pub d_u_min: f64,
    pub lr: f64,
    pub tau: f64,
    pub hidden: Vec<usize>,
    pub updates_per_step: usize,
    pub auto_entropy: bool,
    pub init_log_alpha: f64,
    pub target_entropy: f64,
    pub reward_scale: f64,
}

impl Default for LearningConfig {
    fn default() -> Self {
        LearningConfig {
            n_train: 2_500_000,
            n_interval: 10_000,
            n_test: 10,
            n_epi_max: 25_000,
            n_burn: 10_000,
            n_mem: 25_000,
            batch_size: 256,
            d_u_min: 1e-7,
            lr: 1e-5,
            tau: 1e-3,
            hidden: vec![32, 32],
            updates_per_step: 1,
            auto_entropy: true,
            init_log_alpha: 0.0,
            target_entropy: -3.0,
            reward_scale: 1.0,
        }
    }
}

impl LearningConfig {
    pub fn sac(&self) -> SacConfig {
        SacConfig {
            hidden: self.hidden.clone(),
            lr: self.lr,
            tau: self.tau,
            auto_entropy: self.auto_entropy,
            init_log_alpha: self.init_log_alpha,
            target_entropy: Some(self.target_entropy),
            reward_scale: self.reward_scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        for (name, v) in [
            ("learning.n_train", self.n_train as usize),
            ("learning.n_interval", self.n_interval as usize),
            ("learning.n_test", self.n_test),
            ("learning.n_epi_max", self.n_epi_max),
            ("learning.n_mem", self.n_mem),
            ("learning.batch_size", self.batch_size),
            ("learning.updates_per_step", self.updates_per_step),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if self.n_burn >= self.n_train {
            return bad("learning.n_burn must be smaller than learning.n_train".into());
        }
        if self.n_interval > self.n_train {
            return bad("learning.n_interval must not exceed learning.n_train".into());
        }
        if !(self.d_u_min >= 0.0) {
            return bad("learning.d_u_min must be non-negative".into());
        }
        self.sac().validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub amp: RegionBounds,
    pub pmp: RegionBounds,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            amp: RegionBounds::amp(),
            pmp: RegionBounds::pmp(),
        }
    }
}

/// How many test transitions go to the per-cycle CSV files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionLog {
    Full,
    /// Only the last `k` transitions of each episode.
    Tail(usize),
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub regime: Regime,
    pub shocks: bool,
    pub seed: u64,
    /// Moving-average window of the learning curves, in test cycles.
    pub phase_window: usize,
    pub transition_log: TransitionLog,
    /// Measure inflation distances on `pi - 1`.
    pub net_inflation: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            regime: Regime::AmpPfp,
            shocks: false,
            seed: 0,
            phase_window: 25,
            transition_log: TransitionLog::Full,
            net_inflation: true,
        }
    }
}

/// Everything one experiment needs; round-trips through TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelParams,
    pub policy: PolicyConfig,
    pub learning: LearningConfig,
    pub bounds: BoundsConfig,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)
            .map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.learning.validate()?;
        self.bounds.amp.validate()?;
        self.bounds.pmp.validate()?;
        if self.run.phase_window == 0 {
            return Err(Error::Config("run.phase_window must be at least 1".into()));
        }
        Ok(())
    }

    pub fn region(&self) -> RegionBounds {
        if self.run.regime.is_amp() {
            self.bounds.amp
        } else {
            self.bounds.pmp
        }
    }

    /// Regime-specific parameters and the steady state they target.
    pub fn calibrate(&self) -> Result<(ModelParams, SteadyState)> {
        self.run.regime.calibrate(&self.model, &self.policy)
    }

    pub fn env_config(&self, params: ModelParams) -> EnvConfig {
        EnvConfig {
            params,
            bounds: self.region(),
            d_u_min: self.learning.d_u_min,
            n_epi_max: self.learning.n_epi_max,
            shocks: self.run.shocks,
        }
    }
}
