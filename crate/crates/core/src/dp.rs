//! Dynamic-programming engines: approximate policy iteration, approximate
//! value iteration, trajectory classification, and exhaustive fixed-point
//! enumeration over deterministic policies.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linear::{fit_weighted_least_squares, predict_all, FeatureMap, LinearValue};
use crate::mdp::{
    action_value, bellman_backup, bellman_optimality_backup, evaluate_exact,
    on_policy_distribution, Mdp, Next, TabularPolicy,
};

/// Absolute tolerance for weight-vector equality in trajectory classification.
pub const THETA_TOL: f64 = 1e-9;

/// Cap on the number of deterministic policies the enumerator will visit.
pub const ENUMERATION_LIMIT: usize = 1 << 20;

/// How an iteration trajectory ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DpOutcome {
    /// The iterate at index `at` reproduces itself.
    FixedPoint { at: usize },
    /// The last `period` iterates repeat the block starting at `start`.
    Cycle { period: usize, start: usize },
    /// No repeat within the iteration budget.
    MaxIters,
}

impl std::fmt::Display for DpOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DpOutcome::FixedPoint { at } => write!(f, "FixedPoint{{at {at}}}"),
            DpOutcome::Cycle { period, .. } => write!(f, "Cycle{{period {period}}}"),
            DpOutcome::MaxIters => write!(f, "MaxIters"),
        }
    }
}

/// Record of a DP run: the supplied initialization plus one (weights, policy)
/// pair per iteration and the trajectory classification.
#[derive(Debug, Clone)]
pub struct DpTrace {
    pub initial_theta: Option<LinearValue>,
    pub initial_policy: TabularPolicy,
    pub iterations: Vec<(LinearValue, TabularPolicy)>,
    pub outcome: DpOutcome,
}

impl DpTrace {
    pub fn final_theta(&self) -> &LinearValue {
        &self.iterations.last().expect("trace has iterations").0
    }

    pub fn final_policy(&self) -> &TabularPolicy {
        &self.iterations.last().expect("trace has iterations").1
    }

    /// CSV rows: iteration, weight components, greedy action at the start
    /// state, and the start state's true value under the current policy.
    pub fn to_csv(&self, mdp: &Mdp) -> Result<String> {
        let dim = self.iterations.first().map_or(0, |(t, _)| t.dim());
        let mut out = String::from("iteration");
        for k in 0..dim {
            out.push_str(&format!(",theta_{k}"));
        }
        out.push_str(",action_at_start,start_value\n");
        let mut push_row = |idx: usize, theta: &LinearValue, policy: &TabularPolicy| -> Result<()> {
            let v = evaluate_exact(mdp, policy)?;
            let mut row = idx.to_string();
            for t in theta.theta() {
                row.push_str(&format!(",{t}"));
            }
            row.push_str(&format!(
                ",{},{}\n",
                policy.mode_action(mdp.start_state()),
                v[mdp.start_state()]
            ));
            out.push_str(&row);
            Ok(())
        };
        for (i, (theta, policy)) in self.iterations.iter().enumerate() {
            push_row(i, theta, policy)?;
        }
        Ok(out)
    }
}

/// Greedy deterministic policy of a one-step look-ahead on the approximate
/// values, with ties broken toward the lowest action index.
pub fn greedify(mdp: &Mdp, fm: &FeatureMap, lv: &LinearValue) -> TabularPolicy {
    let vhat = predict_all(lv, fm);
    let mut actions = Vec::with_capacity(mdp.n_states());
    for s in 0..mdp.n_states() {
        let mut best = 0;
        let mut best_q = action_value(mdp, &vhat, s, 0);
        for a in 1..mdp.n_actions() {
            let q = action_value(mdp, &vhat, s, a);
            if q > best_q {
                best = a;
                best_q = q;
            }
        }
        actions.push(best);
    }
    TabularPolicy::deterministic(mdp.n_actions(), &actions).expect("greedy policy is valid")
}

/// One round of approximate policy iteration: exact on-policy evaluation,
/// weighted least-squares fit, then greedification.
pub fn api_step(
    mdp: &Mdp,
    fm: &FeatureMap,
    policy: &TabularPolicy,
) -> Result<(LinearValue, TabularPolicy)> {
    let targets = evaluate_exact(mdp, policy)?;
    let weights = on_policy_distribution(mdp, policy)?;
    let theta = fit_weighted_least_squares(fm, &targets, &weights)?;
    let next = greedify(mdp, fm, &theta);
    Ok((theta, next))
}

/// Iterate `api_step` and classify the trajectory.
///
/// After one step the policy is deterministic and the weights are a function
/// of the policy alone, so classification is exact-match cycle detection over
/// the deterministic policy sequence.
pub fn run_api(
    mdp: &Mdp,
    fm: &FeatureMap,
    initial_policy: &TabularPolicy,
    max_iters: usize,
) -> Result<DpTrace> {
    assert!(max_iters >= 1, "need at least one iteration");
    let mut iterations: Vec<(LinearValue, TabularPolicy)> = Vec::new();
    let mut policy = initial_policy.clone();
    let mut outcome = DpOutcome::MaxIters;
    for i in 0..max_iters {
        let (theta, next) = api_step(mdp, fm, &policy)?;
        let repeat = iterations.iter().position(|(_, p)| *p == next);
        iterations.push((theta, next.clone()));
        if let Some(j) = repeat {
            outcome = if j + 1 == i {
                DpOutcome::FixedPoint { at: j }
            } else {
                DpOutcome::Cycle {
                    period: i - j,
                    start: j,
                }
            };
            break;
        }
        policy = next;
    }
    Ok(DpTrace {
        initial_theta: None,
        initial_policy: initial_policy.clone(),
        iterations,
        outcome,
    })
}

/// One round of approximate value iteration: fit the Bellman-optimality
/// backup of the current approximate values under the current policy's
/// distribution, then greedify.
pub fn avi_step(
    mdp: &Mdp,
    fm: &FeatureMap,
    theta: &LinearValue,
    policy: &TabularPolicy,
) -> Result<(LinearValue, TabularPolicy)> {
    let vhat = predict_all(theta, fm);
    let targets = bellman_optimality_backup(mdp, &vhat);
    let weights = on_policy_distribution(mdp, policy)?;
    let next_theta = fit_weighted_least_squares(fm, &targets, &weights)?;
    let next_policy = greedify(mdp, fm, &next_theta);
    Ok((next_theta, next_policy))
}

/// Iterate `avi_step` from the supplied weights and policy.
///
/// Unlike API the weights evolve continuously, so repeats are detected over
/// (weights, policy) pairs with the weight comparison at [`THETA_TOL`]. The
/// supplied initialization is recorded as iteration zero of the trace.
pub fn run_avi(
    mdp: &Mdp,
    fm: &FeatureMap,
    theta0: &LinearValue,
    initial_policy: &TabularPolicy,
    max_iters: usize,
) -> Result<DpTrace> {
    assert!(max_iters >= 1, "need at least one iteration");
    let mut iterations: Vec<(LinearValue, TabularPolicy)> =
        vec![(theta0.clone(), initial_policy.clone())];
    let mut outcome = DpOutcome::MaxIters;
    for _ in 0..max_iters {
        let (theta, policy) = {
            let (t, p) = iterations.last().unwrap();
            avi_step(mdp, fm, t, p)?
        };
        let repeat = iterations
            .iter()
            .position(|(t, p)| *p == policy && t.max_abs_diff(&theta) <= THETA_TOL);
        let i = iterations.len();
        iterations.push((theta, policy));
        if let Some(j) = repeat {
            outcome = if j + 1 == i {
                DpOutcome::FixedPoint { at: j }
            } else {
                DpOutcome::Cycle {
                    period: i - j,
                    start: j,
                }
            };
            break;
        }
    }
    Ok(DpTrace {
        initial_theta: Some(theta0.clone()),
        initial_policy: initial_policy.clone(),
        iterations,
        outcome,
    })
}

/// Weights solving theta = Omega_pi theta, where Omega_pi is one policy
/// backup followed by weighted least-squares projection onto the feature
/// class under the policy's on-policy distribution.
///
/// Solved directly as the linear system
/// X^T W (X - P_pi X) theta = X^T W r_pi.
pub fn projected_bellman_fixed_point(
    mdp: &Mdp,
    fm: &FeatureMap,
    policy: &TabularPolicy,
) -> Result<LinearValue> {
    if !policy.is_deterministic() {
        return Err(Error::InvalidPolicy(
            "projected fixed point expects a deterministic policy".into(),
        ));
    }
    let weights = on_policy_distribution(mdp, policy)?;
    let k = fm.dim();
    let mut a = DMatrix::<f64>::zeros(k, k);
    let mut b = DVector::<f64>::zeros(k);
    for s in 0..mdp.n_states() {
        let w = weights[s];
        if w == 0.0 {
            continue;
        }
        // Expected successor features and reward under the policy.
        let mut px = vec![0.0; k];
        let mut r = 0.0;
        for act in 0..mdp.n_actions() {
            let pa = policy.prob(s, act);
            if pa == 0.0 {
                continue;
            }
            for o in mdp.outcomes(s, act) {
                r += pa * o.prob * o.reward;
                if let Next::State(t) = o.next {
                    for (i, x) in fm.feature(t).iter().enumerate() {
                        px[i] += pa * o.prob * x;
                    }
                }
            }
        }
        let x = fm.feature(s);
        for i in 0..k {
            b[i] += w * x[i] * r;
            for j in 0..k {
                a[(i, j)] += w * x[i] * (x[j] - px[j]);
            }
        }
    }
    let theta = a
        .clone()
        .full_piv_lu()
        .solve(&b)
        .ok_or(Error::SingularProjection)?;
    let residual = (&a * &theta - &b).amax();
    if !residual.is_finite() || residual > 1e-9 {
        return Err(Error::SingularProjection);
    }
    Ok(LinearValue::new(theta.iter().copied().collect()))
}

/// Fixed-point analysis of one deterministic policy.
#[derive(Debug, Clone, Serialize)]
pub struct PolicyFixedPointEntry {
    /// Action taken in each state.
    pub actions: Vec<usize>,
    /// Exact-evaluation least-squares weights for the policy.
    pub theta_api: Vec<f64>,
    /// Projected-backup fixed-point weights; `None` when the projected system
    /// is singular for this policy.
    pub theta_avi: Option<Vec<f64>>,
    pub is_api_fixed_point: bool,
    pub is_avi_fixed_point: bool,
    /// True value of the start state under the policy.
    pub start_value: f64,
}

/// Exhaustive fixed-point report over all deterministic policies.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointReport {
    pub entries: Vec<PolicyFixedPointEntry>,
}

impl FixedPointReport {
    pub fn api_fixed_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_api_fixed_point).count()
    }

    pub fn avi_fixed_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_avi_fixed_point).count()
    }

    /// Whether the API and AVI fixed-point sets coincide policy by policy.
    pub fn sets_equal(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.is_api_fixed_point == e.is_avi_fixed_point)
    }

    pub fn api_fixed_entries(&self) -> impl Iterator<Item = &PolicyFixedPointEntry> {
        self.entries.iter().filter(|e| e.is_api_fixed_point)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "actions,theta_api,theta_avi,is_api_fixed_point,is_avi_fixed_point,start_value\n",
        );
        for e in &self.entries {
            let actions: Vec<String> = e.actions.iter().map(|a| a.to_string()).collect();
            let fmt = |v: &[f64]| -> String {
                v.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                actions.join(" "),
                fmt(&e.theta_api),
                e.theta_avi.as_deref().map_or_else(String::new, fmt),
                e.is_api_fixed_point,
                e.is_avi_fixed_point,
                e.start_value
            ));
        }
        out
    }
}

/// For every deterministic policy, compute the exact-fit weights and the
/// projected-backup fixed point, and flag whether each is reproduced by a
/// greedification round.
pub fn enumerate_fixed_points(mdp: &Mdp, fm: &FeatureMap) -> Result<FixedPointReport> {
    let count = (mdp.n_actions() as f64).powi(mdp.n_states() as i32);
    if count > ENUMERATION_LIMIT as f64 {
        return Err(Error::PolicyCountIntractable(count, ENUMERATION_LIMIT));
    }
    let mut entries = Vec::with_capacity(count as usize);
    let mut actions = vec![0usize; mdp.n_states()];
    loop {
        let policy = TabularPolicy::deterministic(mdp.n_actions(), &actions)?;
        let values = evaluate_exact(mdp, &policy)?;
        let weights = on_policy_distribution(mdp, &policy)?;
        let theta_api = fit_weighted_least_squares(fm, &values, &weights)?;
        let is_api_fixed_point = greedify(mdp, fm, &theta_api) == policy;

        let (theta_avi, is_avi_fixed_point) = match projected_bellman_fixed_point(mdp, fm, &policy)
        {
            Ok(theta) => {
                // Validate the fixed-point property directly: one projected
                // backup must reproduce the weights.
                let backed = bellman_backup(mdp, &policy, &predict_all(&theta, fm));
                let refit = fit_weighted_least_squares(fm, &backed, &weights)?;
                let fixed = refit.max_abs_diff(&theta) <= THETA_TOL
                    && greedify(mdp, fm, &theta) == policy;
                (Some(theta), fixed)
            }
            Err(Error::SingularProjection) => (None, false),
            Err(e) => return Err(e),
        };

        entries.push(PolicyFixedPointEntry {
            actions: actions.clone(),
            theta_api: theta_api.theta().to_vec(),
            theta_avi: theta_avi.map(|t| t.theta().to_vec()),
            is_api_fixed_point,
            is_avi_fixed_point,
            start_value: values[mdp.start_state()],
        });

        // Mixed-radix increment over action assignments.
        let mut pos = 0;
        loop {
            if pos == actions.len() {
                return Ok(FixedPointReport { entries });
            }
            actions[pos] += 1;
            if actions[pos] < mdp.n_actions() {
                break;
            }
            actions[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, CounterexampleKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use CounterexampleKind::{MultipleFixedPoint, Oscillating, WorstCase};

    fn action_at_start(policy: &TabularPolicy) -> usize {
        policy.as_deterministic().expect("deterministic")[0]
    }

    #[test]
    fn greedify_prefers_the_aliased_right_path_on_oscillating() {
        let (mdp, fm) = catalog::make_counterexample(Oscillating);
        // Left-policy fit: v(C) aliases to 1, v(B) to 0, so right looks worth 1.
        let policy = greedify(&mdp, &fm, &LinearValue::new(vec![0.0, 0.0, 1.0]));
        assert_eq!(action_at_start(&policy), catalog::RIGHT);
    }

    #[test]
    fn greedify_breaks_ties_toward_the_lowest_action() {
        let (mdp, fm) = catalog::make_counterexample(Oscillating);
        let policy = greedify(&mdp, &fm, &LinearValue::zeros(3));
        assert_eq!(
            policy.as_deterministic().unwrap(),
            vec![catalog::LEFT; 5],
            "all B..E action pairs are identical, so everything ties to l"
        );
    }

    #[test]
    fn greedify_flips_to_left_under_the_right_fit_on_worst_case() {
        let (mdp, fm) = catalog::make_counterexample(WorstCase);
        // Closed form at rho = 1: aliasing makes the left path look worth 3.
        let policy = greedify(&mdp, &fm, &LinearValue::new(vec![2.0, 3.0, 2.0]));
        assert_eq!(action_at_start(&policy), catalog::LEFT);
    }

    #[test]
    fn greedify_depends_only_on_lookahead_differences() {
        // One-hot rows sum equally, so adding a constant to every weight
        // shifts every q(s, a) by the same amount and the argmax is unchanged.
        let (mdp, fm) = catalog::make_counterexample(MultipleFixedPoint);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let theta: Vec<f64> = (0..3).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let c: f64 = rng.gen_range(-10.0..10.0);
            let shifted: Vec<f64> = theta.iter().map(|t| t + c).collect();
            assert_eq!(
                greedify(&mdp, &fm, &LinearValue::new(theta)),
                greedify(&mdp, &fm, &LinearValue::new(shifted))
            );
        }
    }

    #[test]
    fn api_step_oscillating_left_switches_right() {
        let (mdp, fm) = catalog::make_counterexample(Oscillating);
        let (theta, next) = api_step(&mdp, &fm, &catalog::policy_left()).unwrap();
        assert!(theta.max_abs_diff(&LinearValue::new(vec![0.0, 0.0, 1.0])) < 1e-12);
        assert_eq!(next, catalog::policy_right());
    }

    #[test]
    fn api_step_multiple_right_is_self_consistent() {
        let (mdp, fm) = catalog::make_counterexample(MultipleFixedPoint);
        let (theta, next) = api_step(&mdp, &fm, &catalog::policy_right()).unwrap();
        assert!(theta.max_abs_diff(&LinearValue::new(vec![2.0, -1.0, 2.0])) < 1e-12);
        assert_eq!(next, catalog::policy_right());
    }

    #[test]
    fn api_step_worst_case_always_produces_left() {
        let (mdp, fm) = catalog::make_counterexample(WorstCase);
        for i in 0..=10 {
            let rho = i as f64 / 10.0;
            let (_, next) = api_step(&mdp, &fm, &catalog::policy_rho(rho).unwrap()).unwrap();
            assert_eq!(action_at_start(&next), catalog::LEFT, "rho={rho}");
        }
    }

    #[test]
    fn run_api_oscillates_with_period_two() {
        let (mdp, fm) = catalog::make_counterexample(Oscillating);
        let trace = run_api(&mdp, &fm, &catalog::policy_rho(0.9).unwrap(), 100).unwrap();
        assert!(matches!(trace.outcome, DpOutcome::Cycle { period: 2, .. }));
    }

    #[test]
    fn run_api_multiple_lands_by_threshold() {
        let (mdp, fm) = catalog::make_counterexample(MultipleFixedPoint);
        let low = run_api(&mdp, &fm, &catalog::policy_rho(0.2).unwrap(), 100).unwrap();
        assert!(matches!(low.outcome, DpOutcome::FixedPoint { .. }));
        assert_eq!(action_at_start(low.final_policy()), catalog::LEFT);
        let high = run_api(&mdp, &fm, &catalog::policy_rho(0.3).unwrap(), 100).unwrap();
        assert!(matches!(high.outcome, DpOutcome::FixedPoint { .. }));
        assert_eq!(action_at_start(high.final_policy()), catalog::RIGHT);
    }

    #[test]
    fn run_api_worst_fixes_left_within_two_iterations_from_all_starts() {
        let (mdp, fm) = catalog::make_counterexample(WorstCase);
        for i in 0..=100 {
            let rho = i as f64 / 100.0;
            let trace = run_api(&mdp, &fm, &catalog::policy_rho(rho).unwrap(), 100).unwrap();
            assert!(matches!(trace.outcome, DpOutcome::FixedPoint { .. }), "rho={rho}");
            assert!(trace.iterations.len() <= 2);
            assert_eq!(action_at_start(trace.final_policy()), catalog::LEFT);
        }
    }

    #[test]
    fn rerunning_from_inside_a_cycle_reproduces_it() {
        let (mdp, fm) = catalog::make_counterexample(Oscillating);
        let first = run_api(&mdp, &fm, &catalog::policy_rho(0.1).unwrap(), 100).unwrap();
        let DpOutcome::Cycle { period, start } = first.outcome else {
            panic!("expected a cycle");
        };
        for offset in 0..period {
            let inside = first.iterations[start + offset].1.clone();
            let again = run_api(&mdp, &fm, &inside, 100).unwrap();
            assert!(matches!(again.outcome, DpOutcome::Cycle { period: p, .. } if p == period));
            // The cycle visits the same policy set.
            let mut seen: Vec<Vec<usize>> = again
                .iterations
                .iter()
                .map(|(_, p)| p.as_deterministic().unwrap())
                .collect();
            seen.dedup();
            assert!(seen.contains(&inside.as_deterministic().unwrap()));
        }
    }

    #[test]
    fn avi_step_is_identity_at_api_fixed_points() {
        for kind in [MultipleFixedPoint, WorstCase] {
            let (mdp, fm) = catalog::make_counterexample(kind);
            let report = enumerate_fixed_points(&mdp, &fm).unwrap();
            for entry in report.api_fixed_entries() {
                let policy = TabularPolicy::deterministic(2, &entry.actions).unwrap();
                let theta = LinearValue::new(entry.theta_api.clone());
                let (theta2, policy2) = avi_step(&mdp, &fm, &theta, &policy).unwrap();
                assert!(theta2.max_abs_diff(&theta) < 1e-10, "{kind}");
                assert_eq!(policy2, policy, "{kind}");
            }
        }
    }

    #[test]
    fn avi_step_zero_weights_on_worst_case_left() {
        // Oracle: apply the optimality backup to the zero vector by hand.
        // Worst-case one-step rewards: A max(0,0)=0, B 1, C -1, D -1, E 3;
        // fitting under the left distribution keeps A, B-group, D-group.
        let (mdp, fm) = catalog::make_counterexample(WorstCase);
        let (theta, policy) =
            avi_step(&mdp, &fm, &LinearValue::zeros(3), &catalog::policy_left()).unwrap();
        assert!(theta.max_abs_diff(&LinearValue::new(vec![0.0, 1.0, -1.0])) < 1e-12);
        assert_eq!(action_at_start(&policy), catalog::LEFT);
    }

    #[test]
    fn avi_step_zero_reward_mdp_keeps_zero_weights() {
        use crate::mdp::{Mdp, Outcome};
        let chain = Mdp::new(
            2,
            2,
            0,
            vec![
                vec![
                    vec![Outcome { prob: 1.0, next: Next::State(1), reward: 0.0 }],
                    vec![Outcome { prob: 1.0, next: Next::State(1), reward: 0.0 }],
                ],
                vec![
                    vec![Outcome { prob: 1.0, next: Next::Terminal, reward: 0.0 }],
                    vec![Outcome { prob: 1.0, next: Next::Terminal, reward: 0.0 }],
                ],
            ],
            None,
        )
        .unwrap();
        let fm = FeatureMap::identity(2);
        let policy = TabularPolicy::deterministic(2, &[0, 0]).unwrap();
        let (theta, _) = avi_step(&chain, &fm, &LinearValue::zeros(2), &policy).unwrap();
        assert_eq!(theta.theta(), &[0.0, 0.0]);
    }

    #[test]
    fn run_avi_never_fixes_on_oscillating() {
        let (mdp, fm) = catalog::make_counterexample(Oscillating);
        let trace = run_avi(
            &mdp,
            &fm,
            &LinearValue::zeros(3),
            &catalog::policy_left(),
            1000,
        )
        .unwrap();
        assert!(!matches!(trace.outcome, DpOutcome::FixedPoint { .. }));
    }

    #[test]
    fn run_avi_reaches_a_fixed_point_on_multiple_and_worst() {
        // Weights start inside the value range spanned by the problems'
        // true state values, [-1, 3]; from there convergence holds for every
        // initial policy. See `run_avi_worst_case_cycles_from_far_out_weights`
        // for what happens outside that range.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for kind in [MultipleFixedPoint, WorstCase] {
            let (mdp, fm) = catalog::make_counterexample(kind);
            for _ in 0..10 {
                let theta0 = LinearValue::new((0..3).map(|_| rng.gen_range(-1.0..3.0)).collect());
                let policy0 = catalog::policy_rho(rng.gen()).unwrap();
                let trace = run_avi(&mdp, &fm, &theta0, &policy0, 1000).unwrap();
                assert!(
                    matches!(trace.outcome, DpOutcome::FixedPoint { .. }),
                    "{kind}: {:?}",
                    trace.outcome
                );
                if kind == WorstCase {
                    assert_eq!(action_at_start(trace.final_policy()), catalog::LEFT);
                }
            }
        }
    }

    #[test]
    fn run_avi_worst_case_cycles_from_far_out_weights() {
        // The worst-case rewards (+1 into the aliased pair, -1 out of it)
        // let a sufficiently bad aliased value reproduce itself through
        // alternating fits: fitting under the left path writes
        // theta_1 = 1 + theta_2, flipping greedy to the right path, whose fit
        // writes theta_2 = -1 + theta_1 = theta_2 again. Below -2 this closes
        // an exact period-2 cycle, an additional cycle of value iteration
        // that plain policy iteration cannot exhibit.
        let (mdp, fm) = catalog::make_counterexample(WorstCase);
        let theta0 = LinearValue::new(vec![0.0, 0.0, -4.0]);
        let trace = run_avi(&mdp, &fm, &theta0, &catalog::policy_left(), 1000).unwrap();
        assert!(
            matches!(trace.outcome, DpOutcome::Cycle { period: 2, .. }),
            "{:?}",
            trace.outcome
        );
        // The multiple-fixed-point rewards lack the cancellation: every round
        // trip through the right fit raises the aliased value by 4, so the
        // same far-out start still converges.
        let (mdp, fm) = catalog::make_counterexample(MultipleFixedPoint);
        let theta0 = LinearValue::new(vec![0.0, 0.0, -14.0]);
        let trace = run_avi(&mdp, &fm, &theta0, &catalog::policy_left(), 1000).unwrap();
        assert!(matches!(trace.outcome, DpOutcome::FixedPoint { .. }));
    }

    /// Power-iteration oracle for the projected fixed point: repeatedly back
    /// up and refit until the weights stop moving.
    fn projected_fixed_point_oracle(
        mdp: &Mdp,
        fm: &FeatureMap,
        policy: &TabularPolicy,
    ) -> LinearValue {
        let weights = on_policy_distribution(mdp, policy).unwrap();
        let mut theta = LinearValue::zeros(fm.dim());
        for _ in 0..10_000 {
            let backed = bellman_backup(mdp, policy, &predict_all(&theta, fm));
            let next = fit_weighted_least_squares(fm, &backed, &weights).unwrap();
            let delta = next.max_abs_diff(&theta);
            theta = next;
            if delta < 1e-13 {
                break;
            }
        }
        theta
    }

    #[test]
    fn projected_fixed_point_matches_power_iteration_and_closed_form() {
        for kind in CounterexampleKind::ALL {
            let (mdp, fm) = catalog::make_counterexample(kind);
            for (policy, rho) in [(catalog::policy_left(), 0.0), (catalog::policy_right(), 1.0)] {
                let solved = projected_bellman_fixed_point(&mdp, &fm, &policy).unwrap();
                let oracle = projected_fixed_point_oracle(&mdp, &fm, &policy);
                assert!(
                    solved.max_abs_diff(&oracle) < 1e-10,
                    "{kind} rho={rho}: {:?} vs {:?}",
                    solved.theta(),
                    oracle.theta()
                );
                let closed = catalog::closed_form_theta_star(kind, rho).unwrap();
                assert!(solved.max_abs_diff(&closed) < 1e-10);
            }
        }
    }

    #[test]
    fn projected_fixed_point_worst_case_left_value() {
        let (mdp, fm) = catalog::make_counterexample(WorstCase);
        let theta = projected_bellman_fixed_point(&mdp, &fm, &catalog::policy_left()).unwrap();
        assert!(theta.max_abs_diff(&LinearValue::new(vec![0.0, 0.0, -1.0])) < 1e-12);
    }

    #[test]
    fn projected_fixed_point_zero_rewards_is_zero() {
        use crate::mdp::Outcome;
        let mdp = Mdp::new(
            1,
            1,
            0,
            vec![vec![vec![Outcome { prob: 1.0, next: Next::Terminal, reward: 0.0 }]]],
            None,
        )
        .unwrap();
        let fm = FeatureMap::identity(1);
        let policy = TabularPolicy::deterministic(1, &[0]).unwrap();
        let theta = projected_bellman_fixed_point(&mdp, &fm, &policy).unwrap();
        assert_eq!(theta.theta(), &[0.0]);
    }

    #[test]
    fn projected_fixed_point_rejects_stochastic_policies() {
        let (mdp, fm) = catalog::make_counterexample(WorstCase);
        let policy = catalog::policy_rho(0.5).unwrap();
        assert!(projected_bellman_fixed_point(&mdp, &fm, &policy).is_err());
    }

    #[test]
    fn enumerate_counts_match_the_three_pathologies() {
        let expected = [(Oscillating, 0), (MultipleFixedPoint, 2), (WorstCase, 1)];
        for (kind, count) in expected {
            let (mdp, fm) = catalog::make_counterexample(kind);
            let report = enumerate_fixed_points(&mdp, &fm).unwrap();
            assert_eq!(report.entries.len(), 32);
            assert_eq!(report.api_fixed_count(), count, "{kind}");
            assert_eq!(report.avi_fixed_count(), count, "{kind}");
            assert!(report.sets_equal(), "{kind}");
        }
    }

    #[test]
    fn enumerate_worst_case_fixed_point_is_the_inferior_policy() {
        let (mdp, fm) = catalog::make_counterexample(WorstCase);
        let report = enumerate_fixed_points(&mdp, &fm).unwrap();
        let fixed: Vec<_> = report.api_fixed_entries().collect();
        assert_eq!(fixed.len(), 1);
        assert_eq!(fixed[0].actions[0], catalog::LEFT);
        assert!((fixed[0].start_value - 0.0).abs() < 1e-12);
    }

    #[test]
    fn trace_csv_has_expected_columns() {
        let (mdp, fm) = catalog::make_counterexample(WorstCase);
        let trace = run_api(&mdp, &fm, &catalog::policy_left(), 10).unwrap();
        let csv = trace.to_csv(&mdp).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "iteration,theta_0,theta_1,theta_2,action_at_start,start_value"
        );
        assert!(lines.next().unwrap().starts_with("0,"));
    }
}
