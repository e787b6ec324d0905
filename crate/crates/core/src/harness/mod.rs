//! Training-cum-testing protocol, run directories, learning-phase
//! classification and the pinned-hours Fisher experiment.
//!
//! A run directory holds
//!
//! ```text
//! config.toml                  resolved configuration
//! manifest.json                seed, status, checkpoints, phases
//! metrics.csv                  one row per test cycle
//! transitions/cycle_<step>.csv test transitions of each cycle
//! checkpoints/agent_<step>.ckpt, checkpoints/agent_final.ckpt
//! ```

mod config;
mod fisher;
mod phases;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use config::{BoundsConfig, ExperimentConfig, LearningConfig, RunConfig, TransitionLog};
pub use fisher::{fisher_experiment, fisher_gap, write_fisher_csv, FisherPoint};
pub use phases::{classify_phases, PhaseLabel, Phases, RANDOM_LEVEL, RATIONAL_LEVEL};

use crate::env::{Action, Env, EnvConfig, Phase, TransitionRow};
use crate::error::{Error, Result};
use crate::metrics::{foc_distances, ss_distances, Endpoint, FocDistances};
use crate::model::{ModelParams, SteadyState};
use crate::nn::io::FORMAT_VERSION;
use crate::rng::{derive_seed, seeded};
use crate::sac::{ActMode, Agent, ObsScaler, ReplayBuffer, Transition};

pub const MANIFEST_VERSION: u32 = 1;

const TRAIN_ENV_STREAM: u64 = 1;
const AGENT_STREAM: u64 = 2;
const UPDATE_STREAM: u64 = 3;
const ACTION_STREAM: u64 = 4;
const TEST_STREAM: u64 = 1 << 32;

/// Resolved experiment: configuration plus the regime calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub cfg: ExperimentConfig,
    pub params: ModelParams,
    pub ss: SteadyState,
    pub env: EnvConfig,
}

impl Setup {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let (params, ss) = cfg.calibrate()?;
        let env = cfg.env_config(params);
        env.validate()?;
        Ok(Setup {
            cfg,
            params,
            ss,
            env,
        })
    }

    pub fn obs_scaler(&self) -> ObsScaler {
        ObsScaler::from_box(&self.env.bounds.initial, &self.params)
    }

    pub fn new_agent(&self) -> Result<Agent> {
        Agent::new(
            &self.cfg.learning.sac(),
            self.obs_scaler(),
            self.env.bounds.action,
            derive_seed(self.cfg.run.seed, AGENT_STREAM),
        )
    }

    /// Seed of the test environment for a given cycle, shared by the
    /// training run and any later replay of that cycle.
    pub fn test_seed(&self, cycle: usize) -> u64 {
        derive_seed(self.cfg.run.seed, TEST_STREAM + cycle as u64)
    }
}

/// One finished test episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub episode: u64,
    pub length: usize,
    /// Transition the episode is judged by.
    pub end: TransitionRow,
    /// FOC distances on the pair ending at `end`.
    pub foc: Option<FocDistances>,
    pub terminated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestCycle {
    pub cycle: usize,
    pub step: u64,
    pub episodes: Vec<EpisodeSummary>,
}

/// Index of the transition used as an episode's end point: the last one,
/// or the one before it when shocks are on.
pub fn endpoint_index(len: usize, shocks: bool) -> Option<usize> {
    match len {
        0 => None,
        1 => Some(0),
        n if shocks => Some(n - 2),
        n => Some(n - 1),
    }
}

/// Run `n_test` exploit-mode episodes from fresh initial states. Every
/// episode's transitions are handed to `sink`. With `pin_hours` the hours
/// action is replaced by that value in every period.
pub fn run_test_cycle(
    agent: &Agent,
    setup: &Setup,
    cycle: usize,
    step: u64,
    pin_hours: Option<f64>,
    sink: &mut dyn FnMut(&[TransitionRow]) -> Result<()>,
) -> Result<TestCycle> {
    let mut env = Env::new(setup.env, seeded(setup.test_seed(cycle)))?;
    // exploit mode draws nothing; the stream only satisfies the signature
    let mut unused = seeded(0);
    let mut episodes = Vec::with_capacity(setup.cfg.learning.n_test);
    let mut rows = Vec::new();
    for ep in 0..setup.cfg.learning.n_test {
        if ep > 0 {
            env.reset();
        }
        rows.clear();
        let terminated = loop {
            let state = *env.state();
            let obs = agent.observe(&state);
            let mut action = agent.act(&obs, ActMode::Exploit, &mut unused)?;
            if let Some(n) = pin_hours {
                action = Action { n, ..action };
            }
            let res = env.step(action);
            rows.push(TransitionRow::new(
                step,
                ep as u64,
                Phase::Test,
                &state,
                &res,
            ));
            if res.done {
                break res.terminated;
            }
        };
        sink(&rows)?;
        let e =
            endpoint_index(rows.len(), setup.env.shocks).expect("episodes have at least one step");
        let foc = (e >= 1).then(|| foc_distances(&rows[e - 1], &rows[e], &setup.params));
        episodes.push(EpisodeSummary {
            episode: ep as u64,
            length: rows.len(),
            end: rows[e],
            foc,
            terminated,
        });
    }
    Ok(TestCycle {
        cycle,
        step,
        episodes,
    })
}

/// One row of `metrics.csv`. Distances are percentages of the steady
/// state; FOC distances are means over episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: usize,
    pub step: u64,
    pub d_pi: Option<f64>,
    pub abs_pi: Option<f64>,
    pub d_b: Option<f64>,
    pub abs_b: Option<f64>,
    pub d_n: Option<f64>,
    pub abs_n: Option<f64>,
    pub d_m: Option<f64>,
    pub abs_m: Option<f64>,
    pub d_u: Option<f64>,
    pub abs_u: Option<f64>,
    pub euler: Option<f64>,
    pub money: Option<f64>,
    pub labor: Option<f64>,
    pub utility: f64,
    pub mean_length: f64,
    pub phase: Option<PhaseLabel>,
}

fn mean_of(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, k) = xs.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    (k > 0).then(|| s / k as f64)
}

impl CycleRecord {
    pub fn from_cycle(tc: &TestCycle, ss: &SteadyState, net_inflation: bool) -> Self {
        let ends: Vec<Endpoint> = tc
            .episodes
            .iter()
            .map(|e| Endpoint::from_row(&e.end))
            .collect();
        let d = ss_distances(&ends, ss, net_inflation);
        let foc = || tc.episodes.iter().filter_map(|e| e.foc);
        CycleRecord {
            cycle: tc.cycle,
            step: tc.step,
            d_pi: d.pi.map(|v| v.mean),
            abs_pi: d.pi.map(|v| v.abs),
            d_b: d.b.map(|v| v.mean),
            abs_b: d.b.map(|v| v.abs),
            d_n: d.n.map(|v| v.mean),
            abs_n: d.n.map(|v| v.abs),
            d_m: d.m.map(|v| v.mean),
            abs_m: d.m.map(|v| v.abs),
            d_u: d.u.map(|v| v.mean),
            abs_u: d.u.map(|v| v.abs),
            euler: mean_of(foc().map(|f| f.euler)),
            money: mean_of(foc().filter_map(|f| f.money)),
            labor: mean_of(foc().map(|f| f.labor)),
            utility: mean_of(ends.iter().map(|e| e.u)).unwrap_or(f64::NAN),
            mean_length: mean_of(tc.episodes.iter().map(|e| e.length as f64)).unwrap_or(0.0),
            phase: None,
        }
    }
}

pub fn write_metrics(path: &Path, rows: &[CycleRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_metrics(path: &Path) -> Result<Vec<CycleRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointEntry {
    pub step: u64,
    /// Path relative to the run directory.
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub checkpoint_format: u32,
    pub crate_version: String,
    pub regime: String,
    pub shocks: bool,
    pub seed: u64,
    pub n_train: u64,
    pub steps_completed: u64,
    pub train_episodes: u64,
    pub status: String,
    pub cycles: usize,
    pub checkpoints: Vec<CheckpointEntry>,
    pub phases: Phases,
}

impl Manifest {
    pub fn read(run_dir: &Path) -> Result<Manifest> {
        let path = run_dir.join("manifest.json");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint {
            path,
            reason: e.to_string(),
        })
    }
}

/// In-memory result of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub run_dir: PathBuf,
    pub setup: Setup,
    pub cycles: Vec<CycleRecord>,
    pub checkpoints: Vec<CheckpointEntry>,
    pub phases: Phases,
    pub train_episodes: u64,
    pub steps_completed: u64,
}

impl RunArtifacts {
    pub fn series(&self, f: impl Fn(&CycleRecord) -> Option<f64>) -> Vec<f64> {
        self.cycles
            .iter()
            .map(|c| f(c).unwrap_or(f64::NAN))
            .collect()
    }

    /// Cycles whose checkpoint was taken while actions were still random;
    /// at least the first cycle.
    pub fn burn_in_cycles(&self) -> Vec<usize> {
        let n_burn = self.setup.cfg.learning.n_burn;
        let mut v: Vec<usize> = (0..self.cycles.len())
            .filter(|&i| self.cycles[i].step <= n_burn)
            .collect();
        if v.is_empty() && !self.cycles.is_empty() {
            v.push(0);
        }
        v
    }

    pub fn rational_cycles(&self) -> Vec<usize> {
        match self.phases.learning_end {
            Some(l) => (l..self.cycles.len()).collect(),
            None => Vec::new(),
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_transitions(
    w: &mut csv::Writer<BufWriter<File>>,
    rows: &[TransitionRow],
    mode: TransitionLog,
) -> Result<()> {
    let keep = match mode {
        TransitionLog::Full => rows.len(),
        TransitionLog::Tail(k) => k.min(rows.len()),
        TransitionLog::None => 0,
    };
    for r in &rows[rows.len() - keep..] {
        w.serialize(r)?;
    }
    Ok(())
}

struct RunWriter<'a> {
    dir: &'a Path,
    setup: &'a Setup,
}

impl RunWriter<'_> {
    fn manifest(&self, art: &RunArtifacts, status: &str) -> Result<()> {
        let m = Manifest {
            manifest_version: MANIFEST_VERSION,
            checkpoint_format: FORMAT_VERSION,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            regime: self.setup.cfg.run.regime.name().to_string(),
            shocks: self.setup.cfg.run.shocks,
            seed: self.setup.cfg.run.seed,
            n_train: self.setup.cfg.learning.n_train,
            steps_completed: art.steps_completed,
            train_episodes: art.train_episodes,
            status: status.to_string(),
            cycles: art.cycles.len(),
            checkpoints: art.checkpoints.clone(),
            phases: art.phases,
        };
        let text = serde_json::to_string_pretty(&m).expect("manifest serializes");
        write_text(&self.dir.join("manifest.json"), &(text + "\n"))
    }

    fn metrics(&self, rows: &[CycleRecord]) -> Result<()> {
        write_metrics(&self.dir.join("metrics.csv"), rows)
    }
}

/// Label each cycle from the inflation-distance learning curve.
pub fn label_phases(cycles: &mut [CycleRecord], window: usize) -> Phases {
    let series: Vec<f64> = cycles
        .iter()
        .map(|c| c.abs_pi.unwrap_or(f64::NAN))
        .collect();
    let ph = classify_phases(&series, window);
    for (i, c) in cycles.iter_mut().enumerate() {
        c.phase = ph.label(i);
    }
    ph
}

/// Train an agent with the test-and-checkpoint protocol, writing the run
/// directory as it goes.
///
/// The first `n_burn` steps take uniform random actions, later steps
/// sample from the policy. Every step pushes one transition and, once the
/// memory holds a full batch, performs `updates_per_step` updates. Every
/// `n_interval` steps a test cycle runs on a separate environment, so the
/// paused training episode resumes untouched afterwards.
pub fn train(cfg: &ExperimentConfig, run_dir: &Path) -> Result<RunArtifacts> {
    let setup = Setup::new(cfg.clone())?;
    let l = &setup.cfg.learning;
    for sub in ["transitions", "checkpoints"] {
        let d = run_dir.join(sub);
        std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    write_text(&run_dir.join("config.toml"), &setup.cfg.to_toml_string())?;
    let writer = RunWriter {
        dir: run_dir,
        setup: &setup,
    };

    let seed = setup.cfg.run.seed;
    let mut env = Env::new(setup.env, seeded(derive_seed(seed, TRAIN_ENV_STREAM)))?;
    let mut agent = setup.new_agent()?;
    let mut update_rng = seeded(derive_seed(seed, UPDATE_STREAM));
    let mut action_rng = seeded(derive_seed(seed, ACTION_STREAM));
    let mut memory = ReplayBuffer::new(l.n_mem, crate::env::EnvState::DIM, Action::DIM);
    let beta = setup.params.beta;

    let mut art = RunArtifacts {
        run_dir: run_dir.to_path_buf(),
        setup: setup.clone(),
        cycles: Vec::new(),
        checkpoints: Vec::new(),
        phases: Phases::default(),
        train_episodes: 1,
        steps_completed: 0,
    };

    for step in 1..=l.n_train {
        let state = *env.state();
        let obs = agent.observe(&state);
        let mode = if step <= l.n_burn {
            ActMode::Random
        } else {
            ActMode::Explore
        };
        let (action, squashed) = agent.act_squashed(&obs, mode, &mut action_rng)?;
        let res = env.step(action);
        memory.push(&Transition {
            obs: obs.to_vec(),
            action: squashed.to_vec(),
            reward: res.reward,
            next_obs: agent.observe(&res.next_state).to_vec(),
            done: res.terminated,
        });
        if res.done {
            env.reset();
            art.train_episodes += 1;
        }
        if memory.len() >= l.batch_size {
            for _ in 0..l.updates_per_step {
                let batch = memory.sample(l.batch_size, &mut update_rng);
                if let Err(e) = agent.update(&batch, beta, &mut update_rng) {
                    art.steps_completed = step;
                    writer.metrics(&art.cycles)?;
                    writer.manifest(&art, "diverged")?;
                    return Err(e);
                }
            }
        }
        art.steps_completed = step;

        if step % l.n_interval == 0 {
            let cycle = (step / l.n_interval) as usize;
            let path = run_dir
                .join("transitions")
                .join(format!("cycle_{step}.csv"));
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = csv::Writer::from_writer(BufWriter::new(file));
            let mode = setup.cfg.run.transition_log;
            let tc = run_test_cycle(&agent, &setup, cycle, step, None, &mut |rows| {
                write_transitions(&mut w, rows, mode)
            })?;
            w.flush().map_err(|e| Error::io(&path, e))?;
            art.cycles.push(CycleRecord::from_cycle(
                &tc,
                &setup.ss,
                setup.cfg.run.net_inflation,
            ));
            let rel = PathBuf::from("checkpoints").join(format!("agent_{step}.ckpt"));
            agent.save(&run_dir.join(&rel), step)?;
            art.checkpoints.push(CheckpointEntry { step, path: rel });
            writer.metrics(&art.cycles)?;
        }
    }

    let rel = PathBuf::from("checkpoints").join("agent_final.ckpt");
    agent.save(&run_dir.join(&rel), l.n_train)?;
    art.checkpoints.push(CheckpointEntry {
        step: l.n_train,
        path: rel,
    });
    art.phases = label_phases(&mut art.cycles, setup.cfg.run.phase_window);
    writer.metrics(&art.cycles)?;
    writer.manifest(&art, "complete")?;
    Ok(art)
}

/// Rerun the test cycles of saved checkpoints, returning one record per
/// checkpoint. Checkpoints at steps that are not a multiple of the test
/// interval are evaluated with cycle index `step / n_interval`.
pub fn evaluate_checkpoints(setup: &Setup, checkpoints: &[PathBuf]) -> Result<Vec<CycleRecord>> {
    let mut out = Vec::with_capacity(checkpoints.len());
    for path in checkpoints {
        let (agent, step) = Agent::load(path)?;
        let cycle = (step / setup.cfg.learning.n_interval) as usize;
        let tc = run_test_cycle(&agent, setup, cycle, step, None, &mut |_| Ok(()))?;
        out.push(CycleRecord::from_cycle(
            &tc,
            &setup.ss,
            setup.cfg.run.net_inflation,
        ));
    }
    Ok(out)
}

/// Interval checkpoints listed in a manifest, without the final one, as
/// absolute paths.
pub fn interval_checkpoints(run_dir: &Path, m: &Manifest) -> Vec<(u64, PathBuf)> {
    m.checkpoints
        .iter()
        .filter(|c| !c.path.to_string_lossy().ends_with("agent_final.ckpt"))
        .map(|c| (c.step, run_dir.join(&c.path)))
        .collect()
}
