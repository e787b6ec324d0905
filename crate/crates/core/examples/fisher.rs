//! Pin hours at the steady state and measure how far realized inflation
//! sits from what the Fisher relation implies, checkpoint by checkpoint.
//!
//! ```text
//! cargo run --release --example train_agent -- 30000 runs/example
//! cargo run --release --example fisher -- runs/example
//! ```

use std::path::PathBuf;

use dsge_lab::harness::{
    fisher_experiment, fisher_gap, interval_checkpoints, ExperimentConfig, Manifest, Setup,
};

fn main() -> dsge_lab::Result<()> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "runs/example".into()),
    );
    let manifest = Manifest::read(&dir)?;
    let setup = Setup::new(ExperimentConfig::from_file(&dir.join("config.toml"))?)?;
    for (step, path) in interval_checkpoints(&dir, &manifest) {
        let points = fisher_experiment(&[path], &setup)?;
        match fisher_gap(&points) {
            Some(g) => println!("step {step:>8}: {:4} points, gap {g:.4} pp", points.len()),
            None => println!("step {step:>8}: no usable transitions"),
        }
    }
    Ok(())
}
