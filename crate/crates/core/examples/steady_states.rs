//! Both steady states and the four policy regimes built on them.
//!
//! ```text
//! cargo run --example steady_states
//! ```

use dsge_lab::model::{classify_policy, ModelParams, PolicyConfig, Regime};

fn main() -> dsge_lab::Result<()> {
    let base = ModelParams::baseline();
    let policy = PolicyConfig::default();
    println!(
        "{:8} {:>9} {:>9} {:>8} {:>8} {:>8} {:>9} {:>9}",
        "regime", "pi", "R", "m", "b", "n", "u", "gamma0"
    );
    for regime in Regime::ALL {
        let (p, ss) = regime.calibrate(&base, &policy)?;
        let label = classify_policy(&p, &ss)?;
        println!(
            "{:8} {:9.6} {:9.6} {:8.4} {:8.4} {:8.5} {:9.5} {:9.5}  {:?}/{:?}",
            regime.name(),
            ss.pi,
            ss.r,
            ss.m,
            ss.b,
            ss.n,
            ss.u,
            p.gamma0,
            label.monetary,
            label.fiscal
        );
    }
    Ok(())
}
