//! Train a household agent for a short run and print its test cycles.
//!
//! ```text
//! cargo run --release --example train_agent -- [steps] [run-dir]
//! ```
//!
//! Defaults are 30000 steps into `runs/example`. The full protocol is
//! `dsge-lab train --config configs/baseline.toml --out runs/full`.

use std::path::PathBuf;

use dsge_lab::harness::{train, ExperimentConfig, TransitionLog};

fn main() -> dsge_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(30_000);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "runs/example".into()));

    let mut cfg = ExperimentConfig::default();
    cfg.learning.n_train = steps;
    cfg.run.transition_log = TransitionLog::Tail(3);
    std::fs::create_dir_all(&dir).map_err(|e| dsge_lab::Error::io(&dir, e))?;

    let start = std::time::Instant::now();
    let art = train(&cfg, &dir)?;
    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>8}",
        "step", "|d pi| %", "|d b| %", "euler", "length"
    );
    for c in &art.cycles {
        let f = |v: Option<f64>| {
            v.map(|x| format!("{x:10.4}"))
                .unwrap_or_else(|| format!("{:>10}", "-"))
        };
        println!(
            "{:8} {} {} {} {:8.1}",
            c.step,
            f(c.abs_pi),
            f(c.abs_b),
            f(c.euler),
            c.mean_length
        );
    }
    println!(
        "{} training episodes, phases {:?}, {:.1?} elapsed; artifacts in {}",
        art.train_episodes,
        art.phases,
        start.elapsed(),
        dir.display()
    );
    Ok(())
}
