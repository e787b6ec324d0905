//! Smoothed learning curves and phase boundaries of a finished run.
//!
//! ```text
//! cargo run --release --example report -- runs/example
//! ```

use std::path::PathBuf;

use dsge_lab::harness::{classify_phases, read_metrics, ExperimentConfig};
use dsge_lab::metrics::learning_curve;

fn main() -> dsge_lab::Result<()> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "runs/example".into()),
    );
    let cfg = ExperimentConfig::from_file(&dir.join("config.toml"))?;
    let cycles = read_metrics(&dir.join("metrics.csv"))?;
    let window = cfg.run.phase_window.min(cycles.len().max(1));

    let pi: Vec<f64> = cycles
        .iter()
        .map(|c| c.abs_pi.unwrap_or(f64::NAN))
        .collect();
    let curve = learning_curve(&pi, window);
    println!(
        "{:>8} {:>10} {:>10} {:>10}",
        "step", "|d pi| %", "smoothed", "band"
    );
    for (i, c) in cycles.iter().enumerate() {
        println!(
            "{:8} {:10.4} {:10.4} {:10.4}",
            c.step,
            pi[i],
            curve.smoothed[i],
            curve.band_width(i)
        );
    }
    let ph = classify_phases(&pi, window);
    println!(
        "phases: random until cycle index {:?}, rational from {:?}",
        ph.random_end, ph.learning_end
    );
    Ok(())
}
