//! Determinacy and E-stability of each regime, then a coarse map over
//! the tax response and the inflation rate.
//!
//! ```text
//! cargo run --example stability_map
//! ```

use dsge_lab::cli::regime_grid;
use dsge_lab::model::{ModelParams, PolicyConfig, Regime};
use dsge_lab::stability::{regime_map, verdict};

fn main() -> dsge_lab::Result<()> {
    let base = ModelParams::baseline();
    for regime in Regime::ALL {
        let (p, ss) = regime.calibrate(&base, &PolicyConfig::default())?;
        let v = verdict(&ss, &p)?;
        println!(
            "{regime}: {} (|eig| {:.4}, {:.4}), E-stable: {}",
            v.determinacy, v.eig_bk.0, v.eig_bk.1, v.e_stable
        );
    }

    let (gammas, pis) = regime_grid();
    let cells = regime_map(&gammas, &pis, &base);
    let mut counts = std::collections::BTreeMap::new();
    for v in cells.iter().filter_map(|c| c.verdict.as_ref()) {
        *counts
            .entry((v.determinacy.to_string(), v.e_stable))
            .or_insert(0usize) += 1;
    }
    println!("\n{} grid cells", cells.len());
    for ((det, es), k) in counts {
        println!("  {det:13} e_stable={es:5} {k}");
    }
    Ok(())
}
