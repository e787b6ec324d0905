use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{run_test_cycle, Setup};
use crate::error::{Error, Result};
use crate::sac::Agent;

/// One test transition pair: the inflation the Fisher relation implies
/// from this period's rate, and next period's realized inflation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherPoint {
    pub step: u64,
    pub cycle: usize,
    pub episode: u64,
    /// `beta * R_t`.
    pub implied: f64,
    /// `pi_{t+1}`.
    pub realized: f64,
    /// Consumption in period `t`.
    pub c: f64,
}

/// Replay the test cycle of each checkpoint with hours pinned at their
/// steady-state value and collect the Fisher pairs.
pub fn fisher_experiment(checkpoints: &[PathBuf], setup: &Setup) -> Result<Vec<FisherPoint>> {
    let beta = setup.params.beta;
    let mut points = Vec::new();
    for path in checkpoints {
        let (agent, step) = Agent::load(path)?;
        let cycle = (step / setup.cfg.learning.n_interval) as usize;
        run_test_cycle(&agent, setup, cycle, step, Some(setup.ss.n), &mut |rows| {
            for pair in rows.windows(2) {
                points.push(FisherPoint {
                    step,
                    cycle,
                    episode: pair[0].episode,
                    implied: beta * pair[0].r,
                    realized: pair[1].pi,
                    c: pair[0].c,
                });
            }
            Ok(())
        })?;
    }
    Ok(points)
}

/// Mean absolute gap between realized and implied inflation, in
/// annualized percentage points.
pub fn fisher_gap(points: &[FisherPoint]) -> Option<f64> {
    if points.is_empty() {
        return None;
    }
    let s: f64 = points.iter().map(|p| (p.realized - p.implied).abs()).sum();
    Some(400.0 * s / points.len() as f64)
}

pub fn write_fisher_csv(path: &Path, points: &[FisherPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in points {
        w.serialize(p)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
