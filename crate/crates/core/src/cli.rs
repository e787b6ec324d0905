//! Command-line front end shared by the `dsge-lab` binary and the tests.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::adaptive::{last_decile_gaps, run_al, write_trajectory, AlConfig, Beliefs, Gain};
use crate::error::{Error, Result};
use crate::harness::{
    evaluate_checkpoints, fisher_experiment, fisher_gap, interval_checkpoints, label_phases,
    read_metrics, train, write_fisher_csv, write_metrics, CycleRecord, ExperimentConfig, Manifest,
    Setup,
};
use crate::metrics::learning_curve;
use crate::model::Regime;
use crate::stability::{regime_map, verdict, write_regime_map};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Steady states of the four policy regimes.
    SteadyState,
    /// Determinacy and E-stability verdicts plus a regime map.
    Stability,
    /// Adaptive-learning trajectories for the four regimes.
    Adaptive,
    /// Train an agent; `--out` becomes the run directory.
    Train,
    /// Rerun the test cycles of every checkpoint in the run directory `--out`.
    Test,
    /// Pinned-hours Fisher experiment on the checkpoints in `--out`.
    Fisher,
    /// Learning curves and a summary table for the run directory `--out`.
    Report,
}

#[derive(Debug, Clone, PartialEq, Eq, Parser)]
#[command(
    name = "dsge-lab",
    version,
    about = "Steady states, learnability and reinforcement-learning experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub regime: Option<Regime>,
    #[arg(long, global = true)]
    pub shocks: Option<Toggle>,
    /// Overrides the number of training steps (or the adaptive-learning horizon).
    #[arg(long, global = true)]
    pub steps: Option<u64>,
}

impl clap::ValueEnum for Regime {
    fn value_variants<'a>() -> &'a [Self] {
        &Regime::ALL
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.name()))
    }
}

/// Horizon of the adaptive-learning runs unless `--steps` is given.
pub const AL_HORIZON: u64 = 50_000;
/// Size of the initial inflation-belief perturbation.
pub const AL_PERTURBATION: f64 = 1e-3;
/// Share of the training run summarized in the report table.
pub const REPORT_TAIL: f64 = 0.2;

impl Cli {
    /// Configuration from `--config` (or the defaults) with flag overrides.
    pub fn resolve_config(&self, fallback: Option<&Path>) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, fallback) {
            (Some(p), _) => ExperimentConfig::from_file(p)?,
            (None, Some(p)) if p.exists() => ExperimentConfig::from_file(p)?,
            _ => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.run.seed = s;
        }
        if let Some(r) = self.regime {
            cfg.run.regime = r;
        }
        if let Some(t) = self.shocks {
            cfg.run.shocks = t == Toggle::On;
        }
        if let Some(n) = self.steps {
            if !matches!(self.command, Command::Adaptive) {
                cfg.learning.n_train = n;
                cfg.learning.n_burn = cfg.learning.n_burn.min(n.saturating_sub(1));
                cfg.learning.n_interval = cfg.learning.n_interval.min(n);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Output staging: files are written to a sibling `.partial` directory
/// and moved into place only when the command succeeds.
struct Staging {
    dir: PathBuf,
    target: PathBuf,
}

impl Staging {
    fn new(target: &Path) -> Result<Self> {
        let name = target
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into());
        let dir = target.with_file_name(format!(".{name}.partial"));
        if dir.exists() {
            std::fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Staging {
            dir,
            target: target.to_path_buf(),
        })
    }

    /// Move every staged entry into the target, replacing same-named ones.
    fn commit(self) -> Result<()> {
        std::fs::create_dir_all(&self.target).map_err(|e| Error::io(&self.target, e))?;
        let entries = std::fs::read_dir(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(&self.dir, e))?;
            let dest = self.target.join(entry.file_name());
            if dest.is_dir() {
                std::fs::remove_dir_all(&dest).map_err(|e| Error::io(&dest, e))?;
            }
            std::fs::rename(entry.path(), &dest).map_err(|e| Error::io(&dest, e))?;
        }
        std::fs::remove_dir(&self.dir).map_err(|e| Error::io(&self.dir, e))
    }

    fn discard(self) {
        let _ = std::fs::remove_dir_all(&self.dir);
    }
}

fn staged(target: &Path, f: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    if let Some(parent) = target.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let st = Staging::new(target)?;
    match f(&st.dir) {
        Ok(()) => st.commit(),
        Err(e) => {
            st.discard();
            Err(e)
        }
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Serialize)]
struct SteadyRow {
    regime: &'static str,
    gamma0: f64,
    gamma: f64,
    pi: f64,
    #[serde(rename = "R")]
    r: f64,
    y: f64,
    c: f64,
    n: f64,
    m: f64,
    b: f64,
    w: f64,
    u: f64,
}

fn steady_state(cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let mut rows = Vec::new();
    for regime in Regime::ALL {
        let (p, ss) = regime.calibrate(&cfg.model, &cfg.policy)?;
        rows.push(SteadyRow {
            regime: regime.name(),
            gamma0: p.gamma0,
            gamma: p.gamma,
            pi: ss.pi,
            r: ss.r,
            y: ss.y,
            c: ss.c,
            n: ss.n,
            m: ss.m,
            b: ss.b,
            w: ss.w,
            u: ss.u,
        });
    }
    for r in &rows {
        println!(
            "{:8} pi={:.6} m={:.4} b={:.4} u={:.4} gamma0={:.6}",
            r.regime, r.pi, r.m, r.b, r.u, r.gamma0
        );
    }
    write_rows(&dir.join("steady_states.csv"), &rows)
}

#[derive(Debug, Serialize)]
struct VerdictRow {
    regime: &'static str,
    pi: f64,
    monetary: String,
    fiscal: String,
    determinacy: String,
    eig1: f64,
    eig2: f64,
    al_learnable: &'static str,
    ev1: f64,
    ev2: f64,
}

/// Grid of the regime map: tax responses and candidate inflation rates.
pub fn regime_grid() -> (Vec<f64>, Vec<f64>) {
    let gammas = (0..=40).map(|i| i as f64 * 0.001).collect();
    let pis = (0..=60).map(|i| 0.9905 + i as f64 * 0.0005).collect();
    (gammas, pis)
}

fn stability(cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let mut rows = Vec::new();
    for regime in Regime::ALL {
        let (p, ss) = regime.calibrate(&cfg.model, &cfg.policy)?;
        let v = verdict(&ss, &p)?;
        let label = crate::model::classify_policy(&p, &ss)?;
        rows.push(VerdictRow {
            regime: regime.name(),
            pi: ss.pi,
            monetary: format!("{:?}", label.monetary).to_lowercase(),
            fiscal: format!("{:?}", label.fiscal).to_lowercase(),
            determinacy: v.determinacy.to_string(),
            eig1: v.eig_bk.0,
            eig2: v.eig_bk.1,
            al_learnable: if v.e_stable { "yes" } else { "no" },
            ev1: v.eig_e.0,
            ev2: v.eig_e.1,
        });
    }
    let dets: Vec<&str> = rows.iter().map(|r| r.determinacy.as_str()).collect();
    let al: Vec<&str> = rows.iter().map(|r| r.al_learnable).collect();
    println!("determinacy: {}", dets.join(","));
    println!("AL learnability: {}", al.join(","));
    write_rows(&dir.join("verdicts.csv"), &rows)?;
    let (g, pis) = regime_grid();
    let cells = regime_map(&g, &pis, &cfg.model);
    let path = dir.join("regime_map.csv");
    let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
    write_regime_map(&cells, BufWriter::new(f))
}

#[derive(Debug, Serialize)]
struct AlSummary {
    regime: &'static str,
    periods: usize,
    converged: bool,
    diverged_at: Option<usize>,
    exploded_at: Option<usize>,
    initial_distance: f64,
    last_decile_pi_gap: f64,
    last_decile_b_gap: f64,
    stopped: Option<String>,
}

fn adaptive(cli: &Cli, cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let horizon = cli.steps.unwrap_or(AL_HORIZON) as usize;
    let regimes: Vec<Regime> = match cli.regime {
        Some(r) => vec![r],
        None => Regime::ALL.to_vec(),
    };
    let mut summary = Vec::new();
    for regime in regimes {
        let (p, ss) = regime.calibrate(&cfg.model, &cfg.policy)?;
        let al = AlConfig {
            params: p,
            target: regime.branch(),
            horizon,
            gain: Gain::Decreasing,
            shocks: cfg.run.shocks,
            seed: cfg.run.seed,
        };
        let bel0 = Beliefs {
            pi_e: ss.pi + AL_PERTURBATION,
            ..Beliefs::at(&ss)
        };
        let run = run_al(&al, bel0)?;
        let t = &run.trajectory;
        let path = dir.join(format!("al_{}.csv", regime.name()));
        let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
        write_trajectory(&t.rows, BufWriter::new(f))?;
        let (dpi, db) = last_decile_gaps(&t.rows, &ss);
        println!(
            "{regime}: converged={} diverged_at={:?} exploded_at={:?}",
            t.converged, t.diverged_at, t.exploded_at
        );
        summary.push(AlSummary {
            regime: regime.name(),
            periods: t.rows.len(),
            converged: t.converged,
            diverged_at: t.diverged_at,
            exploded_at: t.exploded_at,
            initial_distance: t.initial_distance,
            last_decile_pi_gap: dpi,
            last_decile_b_gap: db,
            stopped: run.stopped.as_ref().map(|e| e.to_string()),
        });
    }
    write_rows(&dir.join("al_summary.csv"), &summary)
}

fn run_train(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let st = Staging::new(out)?;
    match train(cfg, &st.dir) {
        Ok(art) => {
            println!(
                "trained {} steps, {} test cycles, phases {:?}",
                art.steps_completed,
                art.cycles.len(),
                art.phases
            );
            st.commit()
        }
        // a diverged run keeps its flushed artifacts for inspection
        Err(e @ Error::TrainingDivergence { .. }) => {
            st.commit()?;
            Err(e)
        }
        Err(e) => {
            st.discard();
            Err(e)
        }
    }
}

fn run_setup(cli: &Cli) -> Result<(Setup, Manifest)> {
    let manifest = Manifest::read(&cli.out)?;
    let cfg = cli.resolve_config(Some(&cli.out.join("config.toml")))?;
    Ok((Setup::new(cfg)?, manifest))
}

fn run_test(cli: &Cli) -> Result<()> {
    let (setup, manifest) = run_setup(cli)?;
    let paths: Vec<PathBuf> = interval_checkpoints(&cli.out, &manifest)
        .into_iter()
        .map(|(_, p)| p)
        .collect();
    staged(&cli.out.join("test"), |dir| {
        let mut rows = evaluate_checkpoints(&setup, &paths)?;
        let ph = label_phases(&mut rows, setup.cfg.run.phase_window);
        println!("re-tested {} checkpoints, phases {:?}", rows.len(), ph);
        write_metrics(&dir.join("metrics.csv"), &rows)
    })
}

#[derive(Debug, Serialize)]
struct FisherSummary {
    step: u64,
    cycle: usize,
    points: usize,
    gap_pp: Option<f64>,
}

fn run_fisher(cli: &Cli) -> Result<()> {
    let (setup, manifest) = run_setup(cli)?;
    let ckpts = interval_checkpoints(&cli.out, &manifest);
    staged(&cli.out.join("fisher"), |dir| {
        let paths: Vec<PathBuf> = ckpts.iter().map(|(_, p)| p.clone()).collect();
        let points = fisher_experiment(&paths, &setup)?;
        write_fisher_csv(&dir.join("fisher_points.csv"), &points)?;
        let summary: Vec<FisherSummary> = ckpts
            .iter()
            .map(|(step, _)| {
                let mine: Vec<_> = points.iter().filter(|p| p.step == *step).copied().collect();
                FisherSummary {
                    step: *step,
                    cycle: (*step / setup.cfg.learning.n_interval) as usize,
                    points: mine.len(),
                    gap_pp: fisher_gap(&mine),
                }
            })
            .collect();
        println!(
            "fisher: {} points over {} checkpoints",
            points.len(),
            summary.len()
        );
        write_rows(&dir.join("fisher_summary.csv"), &summary)
    })
}

#[derive(Debug, Serialize)]
struct CurveRow {
    variable: &'static str,
    cycle: usize,
    step: u64,
    value: f64,
    smoothed: f64,
    lower: f64,
    upper: f64,
    normalized: f64,
}

#[derive(Debug, Serialize)]
struct SummaryRow {
    variable: &'static str,
    mean_delta: Option<f64>,
    mean_abs_delta: Option<f64>,
    cycles: usize,
}

type Column = (&'static str, fn(&CycleRecord) -> Option<f64>);

const CURVES: [Column; 8] = [
    ("pi", |c| c.abs_pi),
    ("b", |c| c.abs_b),
    ("n", |c| c.abs_n),
    ("m", |c| c.abs_m),
    ("u", |c| c.abs_u),
    ("euler", |c| c.euler),
    ("money", |c| c.money),
    ("labor", |c| c.labor),
];

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn run_report(cli: &Cli) -> Result<()> {
    let (setup, _) = run_setup(cli)?;
    let cycles = read_metrics(&cli.out.join("metrics.csv"))?;
    let window = setup.cfg.run.phase_window;
    staged(&cli.out.join("report"), |dir| {
        let mut curves = Vec::new();
        for (name, get) in CURVES {
            let pts: Vec<&CycleRecord> = cycles.iter().filter(|c| get(c).is_some()).collect();
            let vals: Vec<f64> = pts.iter().map(|c| get(c).unwrap_or(f64::NAN)).collect();
            let lc = learning_curve(&vals, window);
            for (i, c) in pts.iter().enumerate() {
                curves.push(CurveRow {
                    variable: name,
                    cycle: c.cycle,
                    step: c.step,
                    value: vals[i],
                    smoothed: lc.smoothed[i],
                    lower: lc.lower[i],
                    upper: lc.upper[i],
                    normalized: lc.normalized[i],
                });
            }
        }
        write_rows(&dir.join("learning_curves.csv"), &curves)?;

        let n_train = setup.cfg.learning.n_train as f64;
        let from = (n_train * (1.0 - REPORT_TAIL)) as u64;
        let tail: Vec<&CycleRecord> = cycles.iter().filter(|c| c.step > from).collect();
        type Pair = (
            &'static str,
            fn(&CycleRecord) -> Option<f64>,
            fn(&CycleRecord) -> Option<f64>,
        );
        let vars: [Pair; 5] = [
            ("pi", |c| c.d_pi, |c| c.abs_pi),
            ("b", |c| c.d_b, |c| c.abs_b),
            ("n", |c| c.d_n, |c| c.abs_n),
            ("m", |c| c.d_m, |c| c.abs_m),
            ("u", |c| c.d_u, |c| c.abs_u),
        ];
        let summary: Vec<SummaryRow> = vars
            .iter()
            .map(|(name, d, a)| {
                let ds: Vec<f64> = tail.iter().filter_map(|c| d(c)).collect();
                let abs: Vec<f64> = tail.iter().filter_map(|c| a(c)).collect();
                SummaryRow {
                    variable: name,
                    mean_delta: mean(&ds),
                    mean_abs_delta: mean(&abs),
                    cycles: tail.len(),
                }
            })
            .collect();
        for s in &summary {
            println!(
                "{:6} delta={:?} |delta|={:?}",
                s.variable, s.mean_delta, s.mean_abs_delta
            );
        }
        write_rows(&dir.join("summary.csv"), &summary)
    })
}

/// Execute a parsed command.
pub fn run(cli: &Cli) -> Result<()> {
    match cli.command {
        Command::SteadyState => {
            let cfg = cli.resolve_config(None)?;
            staged(&cli.out, |d| steady_state(&cfg, d))
        }
        Command::Stability => {
            let cfg = cli.resolve_config(None)?;
            staged(&cli.out, |d| stability(&cfg, d))
        }
        Command::Adaptive => {
            let cfg = cli.resolve_config(None)?;
            staged(&cli.out, |d| adaptive(cli, &cfg, d))
        }
        Command::Train => {
            let cfg = cli.resolve_config(None)?;
            run_train(&cfg, &cli.out)
        }
        Command::Test => run_test(cli),
        Command::Fisher => run_fisher(cli),
        Command::Report => run_report(cli),
    }
}

/// Parse arguments, run, and map the outcome to a process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
