//! Behavioural tests of the soft actor-critic pieces.

use dsge_lab::harness::ExperimentConfig;
use dsge_lab::rng::seeded;
use dsge_lab::sac::{Agent, Batch, ObsScaler, ReplayBuffer, SacConfig, Transition};
use ndarray::{concatenate, Array2, Axis};
use rand::Rng as _;

fn agent(lr: f64, seed: u64) -> Agent {
    let cfg = ExperimentConfig::default();
    let (p, _) = cfg.calibrate().unwrap();
    let bounds = cfg.region();
    let sac = SacConfig {
        lr,
        ..cfg.learning.sac()
    };
    Agent::new(
        &sac,
        ObsScaler::from_box(&bounds.initial, &p),
        bounds.action,
        seed,
    )
    .unwrap()
}

fn bandit_reward(a: &[f64]) -> f64 {
    -a[0] * a[0] + 0.5 * a[1] - 0.25 * a[2]
}

fn bandit_batch(n: usize, rng: &mut dsge_lab::rng::Rng) -> Batch {
    let ts: Vec<Transition> = (0..n)
        .map(|_| {
            let a: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            Transition {
                obs: vec![0.0; 8],
                reward: bandit_reward(&a),
                action: a,
                next_obs: vec![0.0; 8],
                done: true,
            }
        })
        .collect();
    Batch::from_transitions(&ts)
}

#[test]
fn terminal_bandit_critic_learns_the_reward() {
    let mut ag = agent(3e-3, 1);
    let mut rng = seeded(2);
    let mut losses = Vec::new();
    for _ in 0..3000 {
        let b = bandit_batch(64, &mut rng);
        losses.push(ag.update(&b, 0.99, &mut rng).unwrap().critic1);
    }
    let test = bandit_batch(500, &mut rng);
    let inp = concatenate![Axis(1), test.obs, test.action];
    let q = ag.critic1.predict(inp.view()).unwrap();
    let rmse = (q
        .column(0)
        .iter()
        .zip(test.reward.iter())
        .map(|(q, r)| (q - r).powi(2))
        .sum::<f64>()
        / 500.0)
        .sqrt();
    assert!(rmse < 0.05, "rmse {rmse}");

    // the loss falls across training, block by block
    let block = |k: usize| losses[k * 500..(k + 1) * 500].iter().sum::<f64>() / 500.0;
    for k in 0..3 {
        assert!(
            block(k + 1) < block(k),
            "block {k}: {} then {}",
            block(k),
            block(k + 1)
        );
    }
}

#[test]
fn replay_sampling_is_uniform() {
    let mut buf = ReplayBuffer::new(50, 1, 1);
    for i in 0..50 {
        buf.push(&Transition {
            obs: vec![i as f64],
            action: vec![0.0],
            reward: 0.0,
            next_obs: vec![0.0],
            done: false,
        });
    }
    let mut rng = seeded(5);
    let n = 100_000;
    let mut counts = [0usize; 50];
    for i in buf.sample_indices(n, &mut rng) {
        counts[i] += 1;
    }
    let expected = n as f64 / 50.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 49 degrees of freedom; the 99.9th percentile is about 85.4
    assert!(chi2 < 85.4, "chi2 {chi2}");
}

#[test]
fn replay_overwrites_the_oldest_entries() {
    let mut buf = ReplayBuffer::new(10, 1, 1);
    for i in 0..25 {
        buf.push(&Transition {
            obs: vec![i as f64],
            action: vec![0.0],
            reward: i as f64,
            next_obs: vec![0.0],
            done: i % 2 == 0,
        });
    }
    assert_eq!(buf.len(), 10);
    let kept: Vec<f64> = (0..10).map(|k| buf.get(k).unwrap().reward).collect();
    assert_eq!(kept, (15..25).map(|i| i as f64).collect::<Vec<_>>());
    assert!(buf.get(10).is_none());
}

#[test]
fn soft_updates_close_the_gap_geometrically() {
    let mut ag = agent(1e-3, 3);
    let tau = 0.05;
    // targets start as copies; move the critic away first
    for w in ag.critic1.params_mut() {
        *w += 0.1;
    }
    let d0 = ag.target1.max_abs_diff(&ag.critic1);
    for k in 1..=40 {
        ag.soft_update(tau);
        let dk = ag.target1.max_abs_diff(&ag.critic1);
        let want = d0 * (1.0 - tau).powi(k);
        assert!(
            (dk - want).abs() <= 1e-12 + 1e-9 * want,
            "k={k}: {dk} vs {want}"
        );
    }
}

#[test]
fn bootstrapping_only_on_live_transitions() {
    let ag = agent(1e-3, 4);
    let mut rng = seeded(6);
    let mut b = bandit_batch(8, &mut rng);
    let terminal = ag.critic_targets(&b, 0.99, &mut seeded(7)).unwrap();
    assert!(terminal
        .iter()
        .zip(b.reward.iter())
        .all(|(y, r)| (y - r).abs() < 1e-15));
    b.done.fill(0.0);
    let live = ag.critic_targets(&b, 0.99, &mut seeded(7)).unwrap();
    let zero_beta = ag.critic_targets(&b, 0.0, &mut seeded(7)).unwrap();
    assert!(live
        .iter()
        .zip(terminal.iter())
        .any(|(a, b)| (a - b).abs() > 1e-9));
    assert!(zero_beta
        .iter()
        .zip(b.reward.iter())
        .all(|(y, r)| (y - r).abs() < 1e-15));
}

#[test]
fn actor_moves_towards_the_better_action() {
    // reward rises with the first action coordinate only
    let mut ag = agent(3e-3, 8);
    let mut rng = seeded(9);
    let obs = Array2::<f64>::zeros((1, 8));
    let before = ag.policy(obs.row(0).as_slice().unwrap()).unwrap().0[0];
    for _ in 0..3000 {
        let ts: Vec<Transition> = (0..64)
            .map(|_| {
                let a: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                Transition {
                    obs: vec![0.0; 8],
                    reward: a[0],
                    action: a,
                    next_obs: vec![0.0; 8],
                    done: true,
                }
            })
            .collect();
        ag.update(&Batch::from_transitions(&ts), 0.99, &mut rng)
            .unwrap();
    }
    let after = ag.policy(obs.row(0).as_slice().unwrap()).unwrap().0[0];
    assert!(after > before + 0.5, "{before} -> {after}");
}

#[test]
fn constant_reward_critics_converge_to_the_reward() {
    // at the protocol rate of 1e-5, 1e4 Adam steps cannot move Q by one unit
    let mut ag = agent(1e-3, 10);
    let mut rng = seeded(11);
    let r = -1.017;
    for _ in 0..10_000 {
        let mut b = bandit_batch(64, &mut rng);
        b.reward.fill(r);
        b.done.fill(0.0);
        ag.update(&b, 0.0, &mut rng).unwrap();
    }
    let probe = bandit_batch(200, &mut rng);
    let inp = concatenate![Axis(1), probe.obs, probe.action];
    for critic in [&ag.critic1, &ag.critic2] {
        let q = critic.predict(inp.view()).unwrap();
        let worst = q.iter().map(|q| (q - r).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-2, "worst |Q - r| {worst}");
    }
}
