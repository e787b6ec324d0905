//! Roll the economy forward under steady-state actions and under uniform
//! random actions, and report how the episodes end.
//!
//! ```text
//! cargo run --example env_rollout
//! ```

use dsge_lab::env::{steady_actions, Action, Env};
use dsge_lab::harness::ExperimentConfig;
use dsge_lab::rng::seeded;

fn main() -> dsge_lab::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.run.shocks = true;
    let (params, ss) = cfg.calibrate()?;
    let bounds = cfg.region().action;

    let mut env = Env::new(cfg.env_config(params), seeded(7))?;
    env.reset();
    let mut total = 0.0;
    for t in 0..5 {
        let res = env.step(steady_actions(&ss));
        total += res.reward;
        println!(
            "t={t} pi={:.6} b={:.4} m={:.4} u={:.5}",
            res.info.pi, res.info.b, res.info.m, res.reward
        );
    }
    println!("steady actions, 5 steps: return {total:.5}\n");

    let mut rng = seeded(8);
    for episode in 0..3 {
        env.reset();
        let mut steps = 0;
        loop {
            let i = bounds.intervals();
            let a = Action::from_array([
                i[0].sample(&mut rng),
                i[1].sample(&mut rng),
                i[2].sample(&mut rng),
            ]);
            let res = env.step(a);
            steps += 1;
            if res.done {
                let why = if res.truncated {
                    "step limit"
                } else {
                    "settled or infeasible"
                };
                println!(
                    "random episode {episode}: {steps} steps, ended by {why}, final b={:.3}",
                    res.info.b
                );
                break;
            }
        }
    }
    Ok(())
}
