use ndarray::{Array1, Array2};
use rand::Rng as _;

use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    /// Action in the squashed `[-1, 1]` space.
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    /// No bootstrapping past this transition.
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct Batch {
    pub obs: Array2<f64>,
    pub action: Array2<f64>,
    pub reward: Array1<f64>,
    pub next_obs: Array2<f64>,
    pub done: Array1<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.reward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reward.is_empty()
    }

    pub fn from_transitions(ts: &[Transition]) -> Self {
        let n = ts.len();
        let od = ts.first().map_or(0, |t| t.obs.len());
        let ad = ts.first().map_or(0, |t| t.action.len());
        let mut b = Batch {
            obs: Array2::zeros((n, od)),
            action: Array2::zeros((n, ad)),
            reward: Array1::zeros(n),
            next_obs: Array2::zeros((n, od)),
            done: Array1::zeros(n),
        };
        for (i, t) in ts.iter().enumerate() {
            b.obs.row_mut(i).assign(&Array1::from(t.obs.clone()));
            b.action.row_mut(i).assign(&Array1::from(t.action.clone()));
            b.next_obs
                .row_mut(i)
                .assign(&Array1::from(t.next_obs.clone()));
            b.reward[i] = t.reward;
            b.done[i] = if t.done { 1.0 } else { 0.0 };
        }
        b
    }
}

/// Fixed-capacity ring of transitions; the oldest entry is overwritten
/// once full.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    obs_dim: usize,
    act_dim: usize,
    obs: Vec<f64>,
    action: Vec<f64>,
    reward: Vec<f64>,
    next_obs: Vec<f64>,
    done: Vec<f64>,
    next: usize,
    len: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, obs_dim: usize, act_dim: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            obs_dim,
            act_dim,
            obs: vec![0.0; capacity * obs_dim],
            action: vec![0.0; capacity * act_dim],
            reward: vec![0.0; capacity],
            next_obs: vec![0.0; capacity * obs_dim],
            done: vec![0.0; capacity],
            next: 0,
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: &Transition) {
        assert_eq!(t.obs.len(), self.obs_dim);
        assert_eq!(t.next_obs.len(), self.obs_dim);
        assert_eq!(t.action.len(), self.act_dim);
        let i = self.next;
        self.obs[i * self.obs_dim..(i + 1) * self.obs_dim].copy_from_slice(&t.obs);
        self.next_obs[i * self.obs_dim..(i + 1) * self.obs_dim].copy_from_slice(&t.next_obs);
        self.action[i * self.act_dim..(i + 1) * self.act_dim].copy_from_slice(&t.action);
        self.reward[i] = t.reward;
        self.done[i] = if t.done { 1.0 } else { 0.0 };
        self.next = (self.next + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
    }

    /// Stored transitions from oldest to newest.
    pub fn get(&self, k: usize) -> Option<Transition> {
        if k >= self.len {
            return None;
        }
        let start = if self.len == self.capacity {
            self.next
        } else {
            0
        };
        Some(self.slot((start + k) % self.capacity))
    }

    fn slot(&self, i: usize) -> Transition {
        Transition {
            obs: self.obs[i * self.obs_dim..(i + 1) * self.obs_dim].to_vec(),
            action: self.action[i * self.act_dim..(i + 1) * self.act_dim].to_vec(),
            reward: self.reward[i],
            next_obs: self.next_obs[i * self.obs_dim..(i + 1) * self.obs_dim].to_vec(),
            done: self.done[i] != 0.0,
        }
    }

    /// Uniform indices with replacement.
    pub fn sample_indices(&self, n: usize, rng: &mut Rng) -> Vec<usize> {
        assert!(self.len > 0, "cannot sample from an empty replay buffer");
        (0..n).map(|_| rng.random_range(0..self.len)).collect()
    }

    pub fn sample(&self, n: usize, rng: &mut Rng) -> Batch {
        let idx = self.sample_indices(n, rng);
        let (od, ad) = (self.obs_dim, self.act_dim);
        let mut b = Batch {
            obs: Array2::zeros((n, od)),
            action: Array2::zeros((n, ad)),
            reward: Array1::zeros(n),
            next_obs: Array2::zeros((n, od)),
            done: Array1::zeros(n),
        };
        for (row, &i) in idx.iter().enumerate() {
            for j in 0..od {
                b.obs[[row, j]] = self.obs[i * od + j];
                b.next_obs[[row, j]] = self.next_obs[i * od + j];
            }
            for j in 0..ad {
                b.action[[row, j]] = self.action[i * ad + j];
            }
            b.reward[row] = self.reward[i];
            b.done[row] = self.done[i];
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn tr(r: f64) -> Transition {
        Transition {
            obs: vec![r, 0.0],
            action: vec![0.5],
            reward: r,
            next_obs: vec![r + 1.0, 0.0],
            done: false,
        }
    }

    #[test]
    fn oldest_entry_is_evicted() {
        let mut buf = ReplayBuffer::new(3, 2, 1);
        for r in 0..4 {
            buf.push(&tr(r as f64));
        }
        assert_eq!(buf.len(), 3);
        let rewards: Vec<f64> = (0..3).map(|k| buf.get(k).unwrap().reward).collect();
        assert_eq!(rewards, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn sampling_is_seeded() {
        let mut buf = ReplayBuffer::new(10, 2, 1);
        for r in 0..10 {
            buf.push(&tr(r as f64));
        }
        let a = buf.sample(32, &mut seeded(4));
        let b = buf.sample(32, &mut seeded(4));
        assert_eq!(a.reward, b.reward);
        assert_eq!(a.obs, b.obs);
    }

    #[test]
    #[should_panic]
    fn empty_buffer_cannot_be_sampled() {
        ReplayBuffer::new(3, 2, 1).sample(1, &mut seeded(0));
    }
}
