//! Finite episodic MDPs: exact policy evaluation, on-policy distributions,
//! Bellman operators, and trajectory sampling.
//!
//! The terminal state is a distinguished sink with value identically zero; it
//! is not counted in `n_states` and transitions reach it through
//! [`Next::Terminal`].

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for probability rows summing to one.
pub const PROB_TOL: f64 = 1e-12;

/// Default safety cap on episode length for sampling.
pub const DEFAULT_STEP_CAP: usize = 1_000_000;

/// Successor of a transition outcome: a regular state index or the terminal sink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "NextWire", into = "NextWire")]
pub enum Next {
    State(usize),
    Terminal,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NextWire {
    Index(usize),
    Word(String),
}

impl From<Next> for NextWire {
    fn from(n: Next) -> Self {
        match n {
            Next::State(s) => NextWire::Index(s),
            Next::Terminal => NextWire::Word("terminal".to_string()),
        }
    }
}

impl TryFrom<NextWire> for Next {
    type Error = String;

    fn try_from(w: NextWire) -> std::result::Result<Self, String> {
        match w {
            NextWire::Index(s) => Ok(Next::State(s)),
            NextWire::Word(s) if s == "terminal" => Ok(Next::Terminal),
            NextWire::Word(s) => Err(format!("expected a state index or \"terminal\", got {s:?}")),
        }
    }
}

/// One stochastic outcome of taking an action in a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub prob: f64,
    pub next: Next,
    pub reward: f64,
}

/// Wire format for one (state, action) transition row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionSpec {
    pub state: usize,
    pub action: usize,
    pub outcomes: Vec<Outcome>,
}

/// JSON-compatible description of an MDP.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MdpSpec {
    pub n_states: usize,
    pub n_actions: usize,
    pub start_state: usize,
    pub transitions: Vec<TransitionSpec>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

/// A finite episodic MDP.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    n_states: usize,
    n_actions: usize,
    start_state: usize,
    /// transitions[state][action] -> outcome distribution
    transitions: Vec<Vec<Vec<Outcome>>>,
    labels: Option<Vec<String>>,
}

impl Mdp {
    /// Build and validate an MDP from dense transition tables.
    pub fn new(
        n_states: usize,
        n_actions: usize,
        start_state: usize,
        transitions: Vec<Vec<Vec<Outcome>>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::InvalidMdp(
                "need at least one state and one action".into(),
            ));
        }
        if start_state >= n_states {
            return Err(Error::InvalidMdp(format!(
                "start state {start_state} out of range for {n_states} states"
            )));
        }
        if transitions.len() != n_states {
            return Err(Error::InvalidMdp(format!(
                "expected {n_states} transition rows, got {}",
                transitions.len()
            )));
        }
        for (s, per_action) in transitions.iter().enumerate() {
            if per_action.len() != n_actions {
                return Err(Error::InvalidMdp(format!(
                    "state {s}: expected {n_actions} action rows, got {}",
                    per_action.len()
                )));
            }
            for (a, outcomes) in per_action.iter().enumerate() {
                if outcomes.is_empty() {
                    return Err(Error::InvalidMdp(format!(
                        "state {s}, action {a}: no outcomes"
                    )));
                }
                let mut sum = 0.0;
                for o in outcomes {
                    if o.prob < 0.0 || !o.prob.is_finite() {
                        return Err(Error::InvalidMdp(format!(
                            "state {s}, action {a}: bad probability {}",
                            o.prob
                        )));
                    }
                    if !o.reward.is_finite() {
                        return Err(Error::InvalidMdp(format!(
                            "state {s}, action {a}: non-finite reward"
                        )));
                    }
                    if let Next::State(t) = o.next {
                        if t >= n_states {
                            return Err(Error::InvalidMdp(format!(
                                "state {s}, action {a}: successor {t} out of range"
                            )));
                        }
                    }
                    sum += o.prob;
                }
                if (sum - 1.0).abs() > PROB_TOL {
                    return Err(Error::InvalidMdp(format!(
                        "state {s}, action {a}: outcome probabilities sum to {sum}"
                    )));
                }
            }
        }
        if let Some(ref l) = labels {
            if l.len() != n_states {
                return Err(Error::InvalidMdp(format!(
                    "expected {n_states} labels, got {}",
                    l.len()
                )));
            }
        }
        Ok(Mdp {
            n_states,
            n_actions,
            start_state,
            transitions,
            labels,
        })
    }

    pub fn from_spec(spec: MdpSpec) -> Result<Self> {
        let mut table: Vec<Vec<Option<Vec<Outcome>>>> =
            vec![vec![None; spec.n_actions]; spec.n_states];
        for t in spec.transitions {
            if t.state >= spec.n_states || t.action >= spec.n_actions {
                return Err(Error::InvalidMdp(format!(
                    "transition row for state {}, action {} out of range",
                    t.state, t.action
                )));
            }
            if table[t.state][t.action].replace(t.outcomes).is_some() {
                return Err(Error::InvalidMdp(format!(
                    "duplicate transition row for state {}, action {}",
                    t.state, t.action
                )));
            }
        }
        let mut transitions = Vec::with_capacity(spec.n_states);
        for (s, row) in table.into_iter().enumerate() {
            let mut per_action = Vec::with_capacity(spec.n_actions);
            for (a, outcomes) in row.into_iter().enumerate() {
                per_action.push(outcomes.ok_or_else(|| {
                    Error::InvalidMdp(format!("missing transition row for state {s}, action {a}"))
                })?);
            }
            transitions.push(per_action);
        }
        Mdp::new(
            spec.n_states,
            spec.n_actions,
            spec.start_state,
            transitions,
            spec.labels,
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: MdpSpec = serde_json::from_str(text)?;
        Mdp::from_spec(spec)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn start_state(&self) -> usize {
        self.start_state
    }

    pub fn outcomes(&self, state: usize, action: usize) -> &[Outcome] {
        &self.transitions[state][action]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, state: usize) -> String {
        match &self.labels {
            Some(l) => l[state].clone(),
            None => state.to_string(),
        }
    }

    /// Resolve a state given either its label or its decimal index.
    pub fn state_by_name(&self, name: &str) -> Option<usize> {
        if let Some(labels) = &self.labels {
            if let Some(i) = labels.iter().position(|l| l == name) {
                return Some(i);
            }
        }
        name.parse::<usize>().ok().filter(|&i| i < self.n_states)
    }

    /// Expected immediate reward and successor distribution row under `policy`.
    fn policy_row(&self, policy: &TabularPolicy, s: usize) -> (Vec<f64>, f64) {
        let mut row = vec![0.0; self.n_states];
        let mut reward = 0.0;
        for a in 0..self.n_actions {
            let pa = policy.prob(s, a);
            if pa == 0.0 {
                continue;
            }
            for o in &self.transitions[s][a] {
                reward += pa * o.prob * o.reward;
                if let Next::State(t) = o.next {
                    row[t] += pa * o.prob;
                }
            }
        }
        (row, reward)
    }

    /// Sample one transition for (state, action).
    pub fn sample_transition(&self, s: usize, a: usize, rng: &mut impl Rng) -> (Next, f64) {
        let outcomes = &self.transitions[s][a];
        if outcomes.len() == 1 {
            return (outcomes[0].next, outcomes[0].reward);
        }
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for o in outcomes {
            acc += o.prob;
            if u < acc {
                return (o.next, o.reward);
            }
        }
        let last = outcomes.last().unwrap();
        (last.next, last.reward)
    }
}

/// A stochastic tabular policy: one distribution over actions per state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularPolicy {
    probs: Vec<Vec<f64>>,
}

impl TabularPolicy {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPolicy("no states".into()));
        }
        let n_actions = probs[0].len();
        for (s, row) in probs.iter().enumerate() {
            if row.len() != n_actions {
                return Err(Error::InvalidPolicy(format!(
                    "state {s}: ragged action row"
                )));
            }
            let mut sum = 0.0;
            for &p in row {
                if p < 0.0 || !p.is_finite() {
                    return Err(Error::InvalidPolicy(format!(
                        "state {s}: bad probability {p}"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidPolicy(format!(
                    "state {s}: action probabilities sum to {sum}"
                )));
            }
        }
        Ok(TabularPolicy { probs })
    }

    /// Deterministic policy taking `actions[s]` in state `s`.
    pub fn deterministic(n_actions: usize, actions: &[usize]) -> Result<Self> {
        let mut probs = vec![vec![0.0; n_actions]; actions.len()];
        for (s, &a) in actions.iter().enumerate() {
            if a >= n_actions {
                return Err(Error::InvalidPolicy(format!(
                    "state {s}: action {a} out of range"
                )));
            }
            probs[s][a] = 1.0;
        }
        TabularPolicy::new(probs)
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        let p = 1.0 / n_actions as f64;
        TabularPolicy {
            probs: vec![vec![p; n_actions]; n_states],
        }
    }

    pub fn n_states(&self) -> usize {
        self.probs.len()
    }

    pub fn n_actions(&self) -> usize {
        self.probs[0].len()
    }

    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[s][a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s]
    }

    pub fn is_deterministic(&self) -> bool {
        self.as_deterministic().is_some()
    }

    /// The per-state action table if every row puts mass 1 on one action.
    pub fn as_deterministic(&self) -> Option<Vec<usize>> {
        let mut actions = Vec::with_capacity(self.probs.len());
        for row in &self.probs {
            let a = row.iter().position(|&p| p == 1.0)?;
            actions.push(a);
        }
        Some(actions)
    }

    /// Action with the largest probability, lowest index on ties.
    pub fn mode_action(&self, s: usize) -> usize {
        let row = &self.probs[s];
        let mut best = 0;
        for (a, &p) in row.iter().enumerate().skip(1) {
            if p > row[best] {
                best = a;
            }
        }
        best
    }

    pub fn sample_action(&self, s: usize, rng: &mut impl Rng) -> usize {
        let row = &self.probs[s];
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (a, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return a;
            }
        }
        row.len() - 1
    }

    fn check_shape(&self, mdp: &Mdp) -> Result<()> {
        if self.n_states() != mdp.n_states() || self.n_actions() != mdp.n_actions() {
            return Err(Error::InvalidPolicy(format!(
                "policy shape {}x{} does not match MDP shape {}x{}",
                self.n_states(),
                self.n_actions(),
                mdp.n_states(),
                mdp.n_actions()
            )));
        }
        Ok(())
    }
}

/// A per-state vector of real numbers (values, targets, or distributions).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueVector(Vec<f64>);

impl ValueVector {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(
            values.iter().all(|v| v.is_finite()),
            "value vector entries must be finite"
        );
        ValueVector(values)
    }

    pub fn zeros(n: usize) -> Self {
        ValueVector(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        ValueVector::new(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn max_abs_diff(&self, other: &ValueVector) -> f64 {
        assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for ValueVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for ValueVector {
    fn from(v: Vec<f64>) -> Self {
        ValueVector::new(v)
    }
}

/// One step of a sampled episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next: Next,
}

/// A sampled episode; the last step always enters the terminal sink.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
}

impl Trajectory {
    /// Total return: the sum of all step rewards.
    pub fn return_(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    /// Episode length T.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Expected one-step look-ahead value of (state, action) with respect to `v`.
///
/// The terminal successor contributes value 0.
pub fn action_value(mdp: &Mdp, v: &ValueVector, s: usize, a: usize) -> f64 {
    assert_eq!(v.len(), mdp.n_states(), "value vector has wrong length");
    mdp.outcomes(s, a)
        .iter()
        .map(|o| {
            o.prob
                * (o.reward
                    + match o.next {
                        Next::State(t) => v[t],
                        Next::Terminal => 0.0,
                    })
        })
        .sum()
}

/// One application of the policy Bellman operator.
pub fn bellman_backup(mdp: &Mdp, policy: &TabularPolicy, v: &ValueVector) -> ValueVector {
    assert_eq!(v.len(), mdp.n_states(), "value vector has wrong length");
    assert_eq!(policy.n_states(), mdp.n_states(), "policy has wrong shape");
    let values = (0..mdp.n_states())
        .map(|s| {
            (0..mdp.n_actions())
                .map(|a| policy.prob(s, a) * action_value(mdp, v, s, a))
                .sum()
        })
        .collect();
    ValueVector::new(values)
}

/// One application of the Bellman optimality operator.
pub fn bellman_optimality_backup(mdp: &Mdp, v: &ValueVector) -> ValueVector {
    assert_eq!(v.len(), mdp.n_states(), "value vector has wrong length");
    let values = (0..mdp.n_states())
        .map(|s| {
            (0..mdp.n_actions())
                .map(|a| action_value(mdp, v, s, a))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    ValueVector::new(values)
}

/// Exact state values under `policy`, solving (I - P_pi) v = r_pi.
///
/// Fails with a non-episodic error when the linear system is singular, which
/// happens exactly when some state cannot reach the terminal sink under the
/// policy.
pub fn evaluate_exact(mdp: &Mdp, policy: &TabularPolicy) -> Result<ValueVector> {
    policy.check_shape(mdp)?;
    let n = mdp.n_states();
    let mut m = DMatrix::<f64>::identity(n, n);
    let mut r = DVector::<f64>::zeros(n);
    for s in 0..n {
        let (row, reward) = mdp.policy_row(policy, s);
        for (t, p) in row.into_iter().enumerate() {
            m[(s, t)] -= p;
        }
        r[s] = reward;
    }
    let v = m
        .clone()
        .full_piv_lu()
        .solve(&r)
        .ok_or_else(|| Error::NonEpisodic("evaluation system is singular".into()))?;
    let residual = (&m * &v - &r).amax();
    if !residual.is_finite() || residual > 1e-9 {
        return Err(Error::NonEpisodic(format!(
            "evaluation system is ill-conditioned (residual {residual:.3e})"
        )));
    }
    Ok(ValueVector::new(v.iter().copied().collect()))
}

/// States reachable from the start state when following `policy`.
fn reachable_states(mdp: &Mdp, policy: &TabularPolicy) -> Vec<usize> {
    let mut seen = vec![false; mdp.n_states()];
    let mut stack = vec![mdp.start_state()];
    seen[mdp.start_state()] = true;
    while let Some(s) = stack.pop() {
        for a in 0..mdp.n_actions() {
            if policy.prob(s, a) == 0.0 {
                continue;
            }
            for o in mdp.outcomes(s, a) {
                if o.prob > 0.0 {
                    if let Next::State(t) = o.next {
                        if !seen[t] {
                            seen[t] = true;
                            stack.push(t);
                        }
                    }
                }
            }
        }
    }
    (0..mdp.n_states()).filter(|&s| seen[s]).collect()
}

/// States from which the terminal sink is reachable under `policy`.
fn can_terminate(mdp: &Mdp, policy: &TabularPolicy) -> Vec<bool> {
    let n = mdp.n_states();
    let mut can = vec![false; n];
    loop {
        let mut changed = false;
        for s in 0..n {
            if can[s] {
                continue;
            }
            'actions: for a in 0..mdp.n_actions() {
                if policy.prob(s, a) == 0.0 {
                    continue;
                }
                for o in mdp.outcomes(s, a) {
                    if o.prob > 0.0 {
                        let ok = match o.next {
                            Next::Terminal => true,
                            Next::State(t) => can[t],
                        };
                        if ok {
                            can[s] = true;
                            changed = true;
                            break 'actions;
                        }
                    }
                }
            }
        }
        if !changed {
            return can;
        }
    }
}

/// On-policy distribution: expected fraction of time steps spent in each state.
///
/// Expected visit counts n solve the flow equations (I - P_pi^T) n = e_start
/// restricted to states reachable under the policy; the distribution is
/// n / sum(n), with sum(n) equal to the expected episode length.
pub fn on_policy_distribution(mdp: &Mdp, policy: &TabularPolicy) -> Result<ValueVector> {
    policy.check_shape(mdp)?;
    let reachable = reachable_states(mdp, policy);
    let can = can_terminate(mdp, policy);
    for &s in &reachable {
        if !can[s] {
            return Err(Error::NonEpisodic(format!(
                "state {} is visited but cannot reach the terminal state",
                mdp.label(s)
            )));
        }
    }
    let k = reachable.len();
    let mut index = vec![usize::MAX; mdp.n_states()];
    for (i, &s) in reachable.iter().enumerate() {
        index[s] = i;
    }
    // (I - P^T) restricted to the reachable set.
    let mut m = DMatrix::<f64>::identity(k, k);
    for (i, &s) in reachable.iter().enumerate() {
        let (row, _) = mdp.policy_row(policy, s);
        for (t, p) in row.into_iter().enumerate() {
            if p > 0.0 {
                m[(index[t], i)] -= p;
            }
        }
    }
    let mut rhs = DVector::<f64>::zeros(k);
    rhs[index[mdp.start_state()]] = 1.0;
    let counts = m
        .full_piv_lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NonEpisodic("flow system is singular".into()))?;
    let total: f64 = counts.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::NonEpisodic(format!(
            "expected episode length {total} is not a positive finite number"
        )));
    }
    let mut mu = vec![0.0; mdp.n_states()];
    for (i, &s) in reachable.iter().enumerate() {
        // Tiny negative round-off is clamped so the result is a distribution.
        mu[s] = (counts[i] / total).max(0.0);
    }
    Ok(ValueVector::new(mu))
}

/// Sample an episode with the default step cap.
pub fn sample_episode(mdp: &Mdp, policy: &TabularPolicy, rng: &mut impl Rng) -> Result<Trajectory> {
    sample_episode_capped(mdp, policy, rng, DEFAULT_STEP_CAP)
}

/// Sample an episode, failing if it exceeds `cap` steps.
pub fn sample_episode_capped(
    mdp: &Mdp,
    policy: &TabularPolicy,
    rng: &mut impl Rng,
    cap: usize,
) -> Result<Trajectory> {
    policy.check_shape(mdp)?;
    let mut steps = Vec::new();
    let mut state = mdp.start_state();
    loop {
        if steps.len() >= cap {
            return Err(Error::RunawayEpisode(cap));
        }
        let action = policy.sample_action(state, rng);
        let (next, reward) = mdp.sample_transition(state, action, rng);
        steps.push(Step {
            state,
            action,
            reward,
            next,
        });
        match next {
            Next::Terminal => return Ok(Trajectory { steps }),
            Next::State(t) => state = t,
        }
    }
}
