//! Incremental RL agents over aggregated tabular representations: Q-learning
//! with epsilon-greedy exploration, and actor-critic with a softmax actor and
//! a Monte Carlo or TD(0) critic.
//!
//! Aggregated states share table entries, which is what lets the agents
//! inherit the counterexamples' pathologies: the critic is accurate on the
//! states the current policy visits while the actor greedifies through the
//! aliased values of the states it does not.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::FeatureMap;
use crate::mdp::{Mdp, Next};
use crate::record::RunRecord;

/// Configuration shared by the incremental agents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentConfig {
    /// Step size for every table update.
    pub alpha: f64,
    /// Exploration rate for epsilon-greedy action selection (Q-learning only).
    pub epsilon: f64,
    pub n_episodes: usize,
    /// Scale of the unit-normal random initialization.
    pub init_scale: f64,
    pub seed: u64,
    /// Subtract the current state's value from the actor's one-step
    /// look-ahead (on by default; the greedy direction is unchanged either
    /// way because the baseline is action independent).
    #[serde(default = "default_true")]
    pub advantage_baseline: bool,
}

fn default_true() -> bool {
    true
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            alpha: 0.05,
            epsilon: 0.05,
            n_episodes: 20_000,
            init_scale: 1.0,
            seed: 0,
            advantage_baseline: true,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::Config(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !self.epsilon.is_finite() || !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!(
                "epsilon must lie in [0, 1], got {}",
                self.epsilon
            )));
        }
        if self.n_episodes == 0 {
            return Err(Error::Config("n_episodes must be positive".into()));
        }
        Ok(())
    }
}

/// Which critic the actor-critic agent trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticMode {
    MonteCarlo,
    Td0,
}

/// Action values per (aggregate group, action).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    pub values: Vec<Vec<f64>>,
}

impl QTable {
    pub fn random_init(n_groups: usize, n_actions: usize, scale: f64, rng: &mut impl Rng) -> Self {
        QTable {
            values: (0..n_groups)
                .map(|_| (0..n_actions).map(|_| scale * normal(rng)).collect())
                .collect(),
        }
    }

    /// Greedy action for a group, lowest index on ties.
    pub fn greedy_action(&self, group: usize) -> usize {
        let row = &self.values[group];
        let mut best = 0;
        for (a, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = a;
            }
        }
        best
    }

    pub fn max_value(&self, group: usize) -> f64 {
        self.values[group]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Critic weights (one value per group) and actor preferences (softmax logits
/// per group and action).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorCriticParams {
    pub critic: Vec<f64>,
    pub preferences: Vec<Vec<f64>>,
}

impl ActorCriticParams {
    pub fn random_init(n_groups: usize, n_actions: usize, scale: f64, rng: &mut impl Rng) -> Self {
        ActorCriticParams {
            critic: (0..n_groups).map(|_| scale * normal(rng)).collect(),
            preferences: (0..n_groups)
                .map(|_| (0..n_actions).map(|_| scale * normal(rng)).collect())
                .collect(),
        }
    }

    /// Softmax action distribution for a group.
    pub fn policy_at(&self, group: usize) -> Vec<f64> {
        softmax(&self.preferences[group])
    }
}

/// Standard normal sample via Box-Muller.
fn normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn sample_from(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (a, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return a;
        }
    }
    probs.len() - 1
}

/// Per-state group indices of a one-hot aggregation map.
fn group_table(mdp: &Mdp, fm: &FeatureMap) -> Result<Vec<usize>> {
    if fm.n_states() != mdp.n_states() {
        return Err(Error::Config(format!(
            "feature map covers {} states but the MDP has {}",
            fm.n_states(),
            mdp.n_states()
        )));
    }
    (0..mdp.n_states())
        .map(|s| {
            fm.group_of(s).ok_or_else(|| {
                Error::Config(format!(
                    "agents require one-hot aggregation features; state {s} is not one-hot"
                ))
            })
        })
        .collect()
}

/// Q-learning with epsilon-greedy exploration over aggregated states,
/// initialized from a seeded unit normal.
pub fn q_learning_run(mdp: &Mdp, fm: &FeatureMap, cfg: &AgentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let groups = group_table(mdp, fm)?;
    let n_groups = fm.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let q = QTable::random_init(n_groups, mdp.n_actions(), cfg.init_scale, &mut rng);
    q_learning_episodes(mdp, &groups, cfg, q, &mut rng).map(|(records, _)| records)
}

/// Q-learning resuming from a given table; returns the records and the final
/// table.
pub fn q_learning_run_from(
    mdp: &Mdp,
    fm: &FeatureMap,
    cfg: &AgentConfig,
    q: QTable,
) -> Result<(Vec<RunRecord>, QTable)> {
    cfg.validate()?;
    let groups = group_table(mdp, fm)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    q_learning_episodes(mdp, &groups, cfg, q, &mut rng)
}

fn q_learning_episodes(
    mdp: &Mdp,
    groups: &[usize],
    cfg: &AgentConfig,
    mut q: QTable,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<RunRecord>, QTable)> {
    let start_group = groups[mdp.start_state()];
    let mut records = Vec::with_capacity(cfg.n_episodes);
    for episode in 0..cfg.n_episodes {
        let mut state = mdp.start_state();
        let mut return_ = 0.0;
        loop {
            let g = groups[state];
            let action = if rng.gen::<f64>() < cfg.epsilon {
                rng.gen_range(0..mdp.n_actions())
            } else {
                q.greedy_action(g)
            };
            let (next, reward) = mdp.sample_transition(state, action, rng);
            return_ += reward;
            let target = match next {
                Next::Terminal => reward,
                Next::State(t) => reward + q.max_value(groups[t]),
            };
            q.values[g][action] += cfg.alpha * (target - q.values[g][action]);
            match next {
                Next::Terminal => break,
                Next::State(t) => state = t,
            }
        }
        records.push(RunRecord {
            seed: cfg.seed,
            episode,
            return_,
            tracked_value_1: q.values[start_group][0],
            tracked_value_2: q.values[start_group][1.min(mdp.n_actions() - 1)],
            policy_stat: None,
        });
    }
    Ok((records, q))
}

/// Actor-critic with a softmax actor updated from a one-step look-ahead on
/// the critic, initialized from a seeded unit normal.
///
/// The tracked values are the critic weights of the groups containing states
/// 1 and 2 (the first states of the two paths on the built-in problems).
pub fn actor_critic_run(
    mdp: &Mdp,
    fm: &FeatureMap,
    cfg: &AgentConfig,
    mode: CriticMode,
) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let groups = group_table(mdp, fm)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let params = ActorCriticParams::random_init(fm.dim(), mdp.n_actions(), cfg.init_scale, &mut rng);
    actor_critic_episodes(mdp, &groups, cfg, mode, params, &mut rng).map(|(records, _)| records)
}

/// Actor-critic resuming from given parameters; returns the records and the
/// final parameters.
pub fn actor_critic_run_from(
    mdp: &Mdp,
    fm: &FeatureMap,
    cfg: &AgentConfig,
    mode: CriticMode,
    params: ActorCriticParams,
) -> Result<(Vec<RunRecord>, ActorCriticParams)> {
    cfg.validate()?;
    let groups = group_table(mdp, fm)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    actor_critic_episodes(mdp, &groups, cfg, mode, params, &mut rng)
}

fn actor_critic_episodes(
    mdp: &Mdp,
    groups: &[usize],
    cfg: &AgentConfig,
    mode: CriticMode,
    mut params: ActorCriticParams,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<RunRecord>, ActorCriticParams)> {
    let start_group = groups[mdp.start_state()];
    // Fig-2-style tracking: the groups holding the two path-entry states.
    let track_1 = groups[1.min(mdp.n_states() - 1)];
    let track_2 = groups[2.min(mdp.n_states() - 1)];
    let right = 1.min(mdp.n_actions() - 1);
    let mut records = Vec::with_capacity(cfg.n_episodes);
    let mut visited: Vec<(usize, f64)> = Vec::new();
    for episode in 0..cfg.n_episodes {
        let mut state = mdp.start_state();
        let mut return_ = 0.0;
        visited.clear();
        loop {
            let g = groups[state];
            let pi = params.policy_at(g);
            let action = sample_from(&pi, rng);
            let (next, reward) = mdp.sample_transition(state, action, rng);
            return_ += reward;
            visited.push((g, reward));

            let next_value = match next {
                Next::Terminal => 0.0,
                Next::State(t) => params.critic[groups[t]],
            };
            let lookahead = reward + next_value;
            let delta = if cfg.advantage_baseline {
                lookahead - params.critic[g]
            } else {
                lookahead
            };
            if mode == CriticMode::Td0 {
                params.critic[g] += cfg.alpha * (lookahead - params.critic[g]);
            }
            for (a, pref) in params.preferences[g].iter_mut().enumerate() {
                if a == action {
                    *pref += cfg.alpha * delta * (1.0 - pi[a]);
                } else {
                    *pref -= cfg.alpha * delta * pi[a];
                }
            }

            match next {
                Next::Terminal => break,
                Next::State(t) => state = t,
            }
        }
        if mode == CriticMode::MonteCarlo {
            // Sweep the trajectory with the return-from-t targets.
            let mut tail = 0.0;
            let mut targets = vec![0.0; visited.len()];
            for t in (0..visited.len()).rev() {
                tail += visited[t].1;
                targets[t] = tail;
            }
            for (t, &(g, _)) in visited.iter().enumerate() {
                params.critic[g] += cfg.alpha * (targets[t] - params.critic[g]);
            }
        }
        records.push(RunRecord {
            seed: cfg.seed,
            episode,
            return_,
            tracked_value_1: params.critic[track_1],
            tracked_value_2: params.critic[track_2],
            policy_stat: Some(params.policy_at(start_group)[right]),
        });
    }
    Ok((records, params))
}
