//! Steady-state learning from a small belief perturbation in each regime.
//!
//! ```text
//! cargo run --release --example adaptive_learning
//! ```

use dsge_lab::adaptive::{last_decile_gaps, run_al, AlConfig, Beliefs, Gain};
use dsge_lab::model::{ModelParams, PolicyConfig, Regime};

fn main() -> dsge_lab::Result<()> {
    let base = ModelParams::baseline();
    let policy = PolicyConfig::default();
    for regime in Regime::ALL {
        let (p, ss) = regime.calibrate(&base, &policy)?;
        let cfg = AlConfig {
            params: p,
            target: regime.branch(),
            horizon: 50_000,
            gain: Gain::Decreasing,
            shocks: false,
            seed: 1,
        };
        let bel0 = Beliefs {
            pi_e: ss.pi + 1e-3,
            ..Beliefs::at(&ss)
        };
        let run = run_al(&cfg, bel0)?;
        let t = &run.trajectory;
        let (dpi, db) = last_decile_gaps(&t.rows, &ss);
        println!(
            "{regime}: periods={} converged={} limit={:?} diverged_at={:?} exploded_at={:?} last-decile |pi_e-pi|={dpi:.3e} |b_e-b|={db:.3e}{}",
            t.rows.len(),
            t.converged,
            t.limit,
            t.diverged_at,
            t.exploded_at,
            run.stopped.map(|e| format!(" stopped: {e}")).unwrap_or_default(),
        );
    }
    Ok(())
}
