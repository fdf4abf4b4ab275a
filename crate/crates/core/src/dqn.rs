//! Miniature DQN on the continuous-observation problems: a one-input MLP
//! with sigmoid hidden units and two linear action-value outputs, uniform
//! experience replay, RMSProp, and L2 regularization.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{observe, ContinuousObsProblem};
use crate::error::{Error, Result};
use crate::mdp::Next;
use crate::record::RunRecord;

/// Number of action-value outputs.
pub const N_OUTPUTS: usize = 2;

/// The step sizes swept for the overparameterized network.
pub const STEP_SIZE_SWEEP: [f64; 6] = [0.0025, 0.005, 0.01, 0.02, 0.04, 0.08];

/// One-input MLP with `hidden` sigmoid units and two linear outputs.
///
/// Parameters live in one flat vector laid out as
/// [w1 (hidden), b1 (hidden), w2 (2 x hidden, row major), b2 (2)], which is
/// what the optimizer operates on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub hidden: usize,
    pub params: Vec<f64>,
}

impl Mlp {
    pub fn param_count(hidden: usize) -> usize {
        // input->hidden weights + hidden biases + hidden->output weights
        // + output biases
        hidden + hidden + N_OUTPUTS * hidden + N_OUTPUTS
    }

    pub fn zeros(hidden: usize) -> Self {
        Mlp {
            hidden,
            params: vec![0.0; Self::param_count(hidden)],
        }
    }

    /// Unit-normal random initialization, scaled by `scale`.
    pub fn random_init(hidden: usize, scale: f64, rng: &mut impl Rng) -> Self {
        Mlp {
            hidden,
            params: (0..Self::param_count(hidden))
                .map(|_| scale * normal(rng))
                .collect(),
        }
    }

    #[inline]
    fn w1(&self, i: usize) -> f64 {
        self.params[i]
    }

    #[inline]
    fn b1(&self, i: usize) -> f64 {
        self.params[self.hidden + i]
    }

    #[inline]
    fn w2_index(&self, output: usize, i: usize) -> usize {
        2 * self.hidden + output * self.hidden + i
    }

    #[inline]
    fn b2_index(&self, output: usize) -> usize {
        2 * self.hidden + N_OUTPUTS * self.hidden + output
    }

    fn hidden_activations(&self, obs: f64) -> Vec<f64> {
        (0..self.hidden)
            .map(|i| sigmoid(self.w1(i) * obs + self.b1(i)))
            .collect()
    }

    pub fn forward(&self, obs: f64) -> [f64; N_OUTPUTS] {
        let h = self.hidden_activations(obs);
        let mut q = [0.0; N_OUTPUTS];
        for (a, out) in q.iter_mut().enumerate() {
            let mut acc = self.params[self.b2_index(a)];
            for (i, &hi) in h.iter().enumerate() {
                acc += self.params[self.w2_index(a, i)] * hi;
            }
            *out = acc;
        }
        q
    }

    pub fn max_q(&self, obs: f64) -> f64 {
        let q = self.forward(obs);
        q[0].max(q[1])
    }

    pub fn greedy_action(&self, obs: f64) -> usize {
        let q = self.forward(obs);
        if q[1] > q[0] {
            1
        } else {
            0
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Action values for an observation.
pub fn mlp_forward(net: &Mlp, obs: f64) -> (f64, f64) {
    let q = net.forward(obs);
    (q[0], q[1])
}

/// One training example: the taken action's value at `obs` regresses toward
/// `target`.
#[derive(Debug, Clone, Copy)]
pub struct BatchSample {
    pub obs: f64,
    pub action: usize,
    pub target: f64,
}

/// Exact gradient of
/// mean over the batch of (q(obs)[action] - target)^2, plus
/// l2_coeff * ||params||^2 over all parameters including biases.
pub fn mlp_backward(net: &Mlp, batch: &[BatchSample], l2_coeff: f64) -> Vec<f64> {
    assert!(!batch.is_empty(), "batch must be non-empty");
    let mut grad = vec![0.0; net.params.len()];
    let inv_n = 1.0 / batch.len() as f64;
    for sample in batch {
        let h = net.hidden_activations(sample.obs);
        let mut q = net.params[net.b2_index(sample.action)];
        for (i, &hi) in h.iter().enumerate() {
            q += net.params[net.w2_index(sample.action, i)] * hi;
        }
        let dq = 2.0 * (q - sample.target) * inv_n;
        grad[net.b2_index(sample.action)] += dq;
        for (i, &hi) in h.iter().enumerate() {
            grad[net.w2_index(sample.action, i)] += dq * hi;
            let dz = dq * net.params[net.w2_index(sample.action, i)] * hi * (1.0 - hi);
            grad[i] += dz * sample.obs;
            grad[net.hidden + i] += dz;
        }
    }
    for (g, p) in grad.iter_mut().zip(&net.params) {
        *g += 2.0 * l2_coeff * p;
    }
    grad
}

/// RMSProp state: a squared-gradient accumulator per parameter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RmsPropState {
    acc: Vec<f64>,
    pub decay: f64,
    pub damping: f64,
    pub step_size: f64,
}

impl RmsPropState {
    pub fn new(n_params: usize, step_size: f64) -> Self {
        RmsPropState {
            acc: vec![0.0; n_params],
            decay: 0.9,
            damping: 1e-8,
            step_size,
        }
    }

    pub fn accumulator(&self) -> &[f64] {
        &self.acc
    }
}

/// acc <- decay * acc + (1 - decay) * g^2;
/// param <- param - step * g / (sqrt(acc) + damping).
pub fn rmsprop_update(state: &mut RmsPropState, params: &mut [f64], grad: &[f64]) {
    assert_eq!(params.len(), grad.len(), "gradient shape mismatch");
    assert_eq!(params.len(), state.acc.len(), "state shape mismatch");
    for i in 0..params.len() {
        state.acc[i] = state.decay * state.acc[i] + (1.0 - state.decay) * grad[i] * grad[i];
        params[i] -= state.step_size * grad[i] / (state.acc[i].sqrt() + state.damping);
    }
}

/// One stored transition; `next_obs` is `None` for transitions into the
/// terminal sink.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub obs: f64,
    pub action: usize,
    pub reward: f64,
    pub next_obs: Option<f64>,
}

/// FIFO replay buffer with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    entries: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "capacity must be positive");
        ReplayBuffer {
            capacity,
            entries: VecDeque::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn sample(&self, rng: &mut impl Rng) -> &Transition {
        &self.entries[rng.gen_range(0..self.entries.len())]
    }
}

/// DQN training configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DqnConfig {
    pub epsilon: f64,
    pub batch: usize,
    pub l2_coeff: f64,
    pub step_size: f64,
    pub n_episodes: usize,
    pub seed: u64,
    #[serde(default = "default_replay_capacity")]
    pub replay_capacity: usize,
}

fn default_replay_capacity() -> usize {
    10_000
}

impl Default for DqnConfig {
    fn default() -> Self {
        DqnConfig {
            epsilon: 0.1,
            batch: 32,
            l2_coeff: 1e-4,
            step_size: 0.01,
            n_episodes: 50_000,
            seed: 0,
            replay_capacity: default_replay_capacity(),
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!(
                "epsilon must lie in [0, 1], got {}",
                self.epsilon
            )));
        }
        if self.batch == 0 || self.n_episodes == 0 || self.replay_capacity == 0 {
            return Err(Error::Config(
                "batch, n_episodes and replay_capacity must be positive".into(),
            ));
        }
        if !self.step_size.is_finite() || self.step_size <= 0.0 {
            return Err(Error::Config(format!(
                "step_size must be positive, got {}",
                self.step_size
            )));
        }
        Ok(())
    }
}

/// Train a DQN on a continuous-observation problem.
///
/// Per environment step: epsilon-greedy on the forward pass, store the
/// transition, sample a batch of transitions uniformly from replay, regress
/// the taken actions toward r + max_a q(next) (or r at termination) with one
/// RMSProp step. Each episode records the return and the two action values
/// at the start observation 0.0.
pub fn dqn_run(
    problem: &ContinuousObsProblem,
    hidden_units: usize,
    cfg: &DqnConfig,
) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let mdp = problem.mdp();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = Mlp::random_init(hidden_units, 1.0, &mut rng);
    let mut opt = RmsPropState::new(net.params.len(), cfg.step_size);
    let mut replay = ReplayBuffer::new(cfg.replay_capacity);
    let mut records = Vec::with_capacity(cfg.n_episodes);
    let mut batch = Vec::with_capacity(cfg.batch);

    for episode in 0..cfg.n_episodes {
        let mut state = mdp.start_state();
        let mut obs = observe(problem, state, &mut rng);
        let mut return_ = 0.0;
        loop {
            let action = if rng.gen::<f64>() < cfg.epsilon {
                rng.gen_range(0..N_OUTPUTS)
            } else {
                net.greedy_action(obs)
            };
            let (next, reward) = mdp.sample_transition(state, action, &mut rng);
            return_ += reward;
            let next_obs = match next {
                Next::Terminal => None,
                Next::State(t) => Some(observe(problem, t, &mut rng)),
            };
            replay.push(Transition {
                obs,
                action,
                reward,
                next_obs,
            });

            if replay.len() >= cfg.batch {
                batch.clear();
                for _ in 0..cfg.batch {
                    let t = *replay.sample(&mut rng);
                    let target = match t.next_obs {
                        None => t.reward,
                        Some(o) => t.reward + net.max_q(o),
                    };
                    batch.push(BatchSample {
                        obs: t.obs,
                        action: t.action,
                        target,
                    });
                }
                let grad = mlp_backward(&net, &batch, cfg.l2_coeff);
                rmsprop_update(&mut opt, &mut net.params, &grad);
            }

            match (next, next_obs) {
                (Next::Terminal, _) => break,
                (Next::State(t), Some(o)) => {
                    state = t;
                    obs = o;
                }
                _ => unreachable!(),
            }
        }
        let (q_l, q_r) = mlp_forward(&net, 0.0);
        records.push(RunRecord {
            seed: cfg.seed,
            episode,
            return_,
            tracked_value_1: q_l,
            tracked_value_2: q_r,
            policy_stat: None,
        });
    }
    Ok(records)
}

/// Mean return over the final 5% of episodes (at least one episode).
pub fn final_window_mean_return(records: &[RunRecord]) -> f64 {
    let window = (records.len() / 20).max(1);
    let tail = &records[records.len() - window..];
    tail.iter().map(|r| r.return_).sum::<f64>() / tail.len() as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub step_size: f64,
    /// Mean over runs of the final-window mean return.
    pub mean_final_return: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub best_step_size: f64,
    pub per_step_size: Vec<SweepSummary>,
}

/// Evaluate every step size in [`STEP_SIZE_SWEEP`] with the given network
/// width and pick the one maximizing mean final return. Runs use seeds
/// `cfg.seed .. cfg.seed + n_runs`, identical across candidates, so the
/// ranking is deterministic.
pub fn step_size_sweep(
    problem: &ContinuousObsProblem,
    hidden_units: usize,
    cfg: &DqnConfig,
    n_runs: usize,
) -> Result<SweepResult> {
    assert!(n_runs >= 1, "need at least one run per candidate");
    let mut per_step_size = Vec::with_capacity(STEP_SIZE_SWEEP.len());
    for &step_size in &STEP_SIZE_SWEEP {
        let mut total = 0.0;
        for run in 0..n_runs {
            let run_cfg = DqnConfig {
                step_size,
                seed: cfg.seed + run as u64,
                ..cfg.clone()
            };
            let records = dqn_run(problem, hidden_units, &run_cfg)?;
            total += final_window_mean_return(&records);
        }
        per_step_size.push(SweepSummary {
            step_size,
            mean_final_return: total / n_runs as f64,
        });
    }
    let best = per_step_size
        .iter()
        .max_by(|a, b| {
            a.mean_final_return
                .partial_cmp(&b.mean_final_return)
                .expect("finite returns")
        })
        .expect("sweep set is non-empty");
    Ok(SweepResult {
        best_step_size: best.step_size,
        per_step_size,
    })
}
