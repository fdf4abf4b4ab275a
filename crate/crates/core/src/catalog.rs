//! Built-in counterexample problems.
//!
//! Each problem has five states A, B, C, D, E plus the terminal sink, two
//! actions `l` (0) and `r` (1) that matter only in A, and the aggregation
//! partition {A}, {B,E}, {C,D}. Taking `l` in A walks A -> B -> D -> terminal;
//! taking `r` walks A -> C -> E -> terminal. The three problems differ only in
//! where the rewards sit along the two paths, which is exactly what makes
//! evaluation under one policy poison greedification for the other.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{FeatureMap, LinearValue};
use crate::mdp::{Mdp, Next, Outcome, TabularPolicy};

/// The three built-in pathologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CounterexampleKind {
    #[serde(rename = "oscillating")]
    Oscillating,
    #[serde(rename = "multiple")]
    MultipleFixedPoint,
    #[serde(rename = "worst")]
    WorstCase,
}

impl CounterexampleKind {
    pub const ALL: [CounterexampleKind; 3] = [
        CounterexampleKind::Oscillating,
        CounterexampleKind::MultipleFixedPoint,
        CounterexampleKind::WorstCase,
    ];
}

impl std::str::FromStr for CounterexampleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oscillating" => Ok(CounterexampleKind::Oscillating),
            "multiple" => Ok(CounterexampleKind::MultipleFixedPoint),
            "worst" => Ok(CounterexampleKind::WorstCase),
            other => Err(Error::Config(format!(
                "unknown problem {other:?}; expected oscillating|multiple|worst"
            ))),
        }
    }
}

impl std::fmt::Display for CounterexampleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            CounterexampleKind::Oscillating => "oscillating",
            CounterexampleKind::MultipleFixedPoint => "multiple",
            CounterexampleKind::WorstCase => "worst",
        };
        f.write_str(name)
    }
}

pub const N_STATES: usize = 5;
pub const N_ACTIONS: usize = 2;
pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;
const A: usize = 0;
const B: usize = 1;
const C: usize = 2;
const D: usize = 3;
const E: usize = 4;

/// Rewards on the arrows B->D, D->terminal, C->E, E->terminal.
fn path_rewards(kind: CounterexampleKind) -> [f64; 4] {
    match kind {
        CounterexampleKind::Oscillating => [-1.0, 1.0, -1.0, 3.0],
        CounterexampleKind::MultipleFixedPoint => [1.0, -1.0, 3.0, -1.0],
        CounterexampleKind::WorstCase => [1.0, -1.0, -1.0, 3.0],
    }
}

/// True values of B, C, D, E; these are policy independent because actions
/// only matter in A.
pub fn true_path_values(kind: CounterexampleKind) -> [f64; 4] {
    let [bd, dt, ce, et] = path_rewards(kind);
    [bd + dt, ce + et, dt, et] // [v(B), v(C), v(D), v(E)]
}

fn deterministic_arrow(next: Next, reward: f64) -> Vec<Outcome> {
    vec![Outcome {
        prob: 1.0,
        next,
        reward,
    }]
}

fn build_mdp(kind: CounterexampleKind, start_reward: f64) -> Mdp {
    let [bd, dt, ce, et] = path_rewards(kind);
    let transitions = vec![
        // A: the only state where the action matters.
        vec![
            deterministic_arrow(Next::State(B), start_reward),
            deterministic_arrow(Next::State(C), start_reward),
        ],
        // B, C, D, E: both actions take the same arrow.
        vec![
            deterministic_arrow(Next::State(D), bd),
            deterministic_arrow(Next::State(D), bd),
        ],
        vec![
            deterministic_arrow(Next::State(E), ce),
            deterministic_arrow(Next::State(E), ce),
        ],
        vec![
            deterministic_arrow(Next::Terminal, dt),
            deterministic_arrow(Next::Terminal, dt),
        ],
        vec![
            deterministic_arrow(Next::Terminal, et),
            deterministic_arrow(Next::Terminal, et),
        ],
    ];
    let labels = ["A", "B", "C", "D", "E"].map(String::from).to_vec();
    Mdp::new(N_STATES, N_ACTIONS, A, transitions, Some(labels)).expect("catalog MDP is valid")
}

/// The aggregation partition {A}, {B,E}, {C,D} as one-hot features.
pub fn aggregation_feature_map() -> FeatureMap {
    FeatureMap::aggregation(N_STATES, &[vec![A], vec![B, E], vec![C, D]])
        .expect("catalog partition is valid")
}

/// Build a counterexample together with its aggregation features.
pub fn make_counterexample(kind: CounterexampleKind) -> (Mdp, FeatureMap) {
    (build_mdp(kind, 0.0), aggregation_feature_map())
}

/// Deterministic policy taking the left action everywhere.
pub fn policy_left() -> TabularPolicy {
    TabularPolicy::deterministic(N_ACTIONS, &[LEFT; N_STATES]).unwrap()
}

/// Deterministic policy taking the right action in A (and the canonical left
/// action elsewhere, where the choice is irrelevant).
pub fn policy_right() -> TabularPolicy {
    TabularPolicy::deterministic(N_ACTIONS, &[RIGHT, LEFT, LEFT, LEFT, LEFT]).unwrap()
}

/// Stochastic policy with P(right | A) = rho and the left action elsewhere.
pub fn policy_rho(rho: f64) -> Result<TabularPolicy> {
    if !rho.is_finite() || !(0.0..=1.0).contains(&rho) {
        return Err(Error::RhoOutOfRange(rho));
    }
    let mut probs = vec![vec![0.0; N_ACTIONS]; N_STATES];
    probs[A][LEFT] = 1.0 - rho;
    probs[A][RIGHT] = rho;
    for row in probs.iter_mut().skip(1) {
        row[LEFT] = 1.0;
    }
    TabularPolicy::new(probs)
}

/// Closed-form optimum of the weighted evaluation objective at
/// rho = P(right | A):
/// [rho v(C) + (1-rho) v(B), rho v(E) + (1-rho) v(B), rho v(C) + (1-rho) v(D)].
pub fn closed_form_theta_star(kind: CounterexampleKind, rho: f64) -> Result<LinearValue> {
    if !rho.is_finite() || !(0.0..=1.0).contains(&rho) {
        return Err(Error::RhoOutOfRange(rho));
    }
    let [vb, vc, vd, ve] = true_path_values(kind);
    Ok(LinearValue::new(vec![
        rho * vc + (1.0 - rho) * vb,
        rho * ve + (1.0 - rho) * vb,
        rho * vc + (1.0 - rho) * vd,
    ]))
}

/// How the continuous observation intervals are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalLayout {
    /// B and E share one interval, C and D share another (default).
    SharedPairs,
    /// Each state has its own half of the pair's interval, adjacent on the
    /// line, so the pairs remain inseparable by two thresholds but the states
    /// are formally distinct.
    SplitPairs,
}

/// A counterexample with scalar observations drawn from per-state intervals.
///
/// The logical MDP is the discrete counterexample with an extra -1 reward on
/// both arrows out of A, so that the start state's value differs from its
/// successor's and the approximator has to separate them. Observation layout
/// on the line: the point for A, then the C/D region, then the B/E region.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousObsProblem {
    kind: CounterexampleKind,
    layout: IntervalLayout,
    mdp: Mdp,
    intervals: [(f64, f64); N_STATES],
}

pub const START_PENALTY: f64 = -1.0;

impl ContinuousObsProblem {
    pub fn kind(&self) -> CounterexampleKind {
        self.kind
    }

    pub fn layout(&self) -> IntervalLayout {
        self.layout
    }

    pub fn mdp(&self) -> &Mdp {
        &self.mdp
    }

    /// Observation interval [lo, hi] for a state; A is the point {0}.
    pub fn interval(&self, s: usize) -> (f64, f64) {
        self.intervals[s]
    }

    pub fn start_penalty(&self) -> f64 {
        START_PENALTY
    }
}

/// Continuous-observation variant with the default shared-interval layout.
pub fn make_continuous_variant(kind: CounterexampleKind) -> ContinuousObsProblem {
    make_continuous_variant_with_layout(kind, IntervalLayout::SharedPairs)
}

pub fn make_continuous_variant_with_layout(
    kind: CounterexampleKind,
    layout: IntervalLayout,
) -> ContinuousObsProblem {
    let intervals = match layout {
        IntervalLayout::SharedPairs => [
            (0.0, 0.0), // A
            (3.0, 4.0), // B
            (1.0, 2.0), // C
            (1.0, 2.0), // D
            (3.0, 4.0), // E
        ],
        IntervalLayout::SplitPairs => [
            (0.0, 0.0), // A
            (3.0, 3.5), // B
            (1.0, 1.5), // C
            (1.5, 2.0), // D
            (3.5, 4.0), // E
        ],
    };
    ContinuousObsProblem {
        kind,
        layout,
        mdp: build_mdp(kind, START_PENALTY),
        intervals,
    }
}

/// Draw an observation for a state: uniform over its interval, or the point
/// itself for a degenerate interval.
pub fn observe(problem: &ContinuousObsProblem, s: usize, rng: &mut impl Rng) -> f64 {
    let (lo, hi) = problem.interval(s);
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{evaluate_exact, sample_episode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn right_is_always_worth_two_and_left_zero() {
        for kind in CounterexampleKind::ALL {
            let (mdp, _) = make_counterexample(kind);
            let vr = evaluate_exact(&mdp, &policy_right()).unwrap();
            let vl = evaluate_exact(&mdp, &policy_left()).unwrap();
            assert!((vr[0] - 2.0).abs() < 1e-12, "{kind}: right value {}", vr[0]);
            assert!((vl[0] - 0.0).abs() < 1e-12, "{kind}: left value {}", vl[0]);
        }
    }

    #[test]
    fn stated_path_values_match_exact_evaluation() {
        for kind in CounterexampleKind::ALL {
            let (mdp, _) = make_counterexample(kind);
            let v = evaluate_exact(&mdp, &policy_rho(0.37).unwrap()).unwrap();
            let [vb, vc, vd, ve] = true_path_values(kind);
            assert!((v[1] - vb).abs() < 1e-12);
            assert!((v[2] - vc).abs() < 1e-12);
            assert!((v[3] - vd).abs() < 1e-12);
            assert!((v[4] - ve).abs() < 1e-12);
        }
    }

    #[test]
    fn multiple_example_left_fit_aliases_c_to_minus_one() {
        use crate::linear::{fit_weighted_least_squares, predict};
        use crate::mdp::on_policy_distribution;
        let (mdp, fm) = make_counterexample(CounterexampleKind::MultipleFixedPoint);
        let left = policy_left();
        let targets = evaluate_exact(&mdp, &left).unwrap();
        let weights = on_policy_distribution(&mdp, &left).unwrap();
        let theta = fit_weighted_least_squares(&fm, &targets, &weights).unwrap();
        assert!((predict(&theta, &fm, 1) - 0.0).abs() < 1e-12); // B
        assert!((predict(&theta, &fm, 2) - -1.0).abs() < 1e-12); // C aliases D
    }

    #[test]
    fn closed_form_spot_checks() {
        let t = closed_form_theta_star(CounterexampleKind::Oscillating, 1.0).unwrap();
        assert_eq!(t.theta(), &[2.0, 3.0, 2.0]);
        let t = closed_form_theta_star(CounterexampleKind::WorstCase, 0.0).unwrap();
        assert_eq!(t.theta(), &[0.0, 0.0, -1.0]);
        let t = closed_form_theta_star(CounterexampleKind::MultipleFixedPoint, 0.25).unwrap();
        assert_eq!(t.theta(), &[0.5, -0.25, -0.25]);
    }

    #[test]
    fn closed_form_instantiations_over_the_grid() {
        for i in 0..=100 {
            let rho = i as f64 / 100.0;
            let expected: [(CounterexampleKind, [f64; 3]); 3] = [
                (
                    CounterexampleKind::Oscillating,
                    [2.0 * rho, 3.0 * rho, 1.0 + rho],
                ),
                (
                    CounterexampleKind::MultipleFixedPoint,
                    [2.0 * rho, -rho, 3.0 * rho - 1.0],
                ),
                (
                    CounterexampleKind::WorstCase,
                    [2.0 * rho, 3.0 * rho, 3.0 * rho - 1.0],
                ),
            ];
            for (kind, want) in expected {
                let got = closed_form_theta_star(kind, rho).unwrap();
                for (g, w) in got.theta().iter().zip(&want) {
                    assert!(
                        (g - w).abs() < 1e-12,
                        "{kind} rho={rho}: {:?} vs {:?}",
                        got.theta(),
                        want
                    );
                }
            }
        }
    }

    #[test]
    fn closed_form_rejects_rho_outside_unit_interval() {
        assert!(closed_form_theta_star(CounterexampleKind::Oscillating, -0.01).is_err());
        assert!(closed_form_theta_star(CounterexampleKind::Oscillating, 1.01).is_err());
        assert!(policy_rho(f64::NAN).is_err());
    }

    #[test]
    fn closed_form_matches_substituting_values_into_the_general_form() {
        // Oracle: substitute the backward-induction state values into the
        // general expression component by component.
        for kind in CounterexampleKind::ALL {
            let (mdp, _) = make_counterexample(kind);
            let v = evaluate_exact(&mdp, &policy_rho(0.5).unwrap()).unwrap();
            for i in 0..=20 {
                let rho = i as f64 / 20.0;
                let t = closed_form_theta_star(kind, rho).unwrap();
                let expected = [
                    rho * v[2] + (1.0 - rho) * v[1],
                    rho * v[4] + (1.0 - rho) * v[1],
                    rho * v[2] + (1.0 - rho) * v[3],
                ];
                for (got, want) in t.theta().iter().zip(&expected) {
                    assert!((got - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn continuous_variant_returns_are_shifted_by_the_start_penalty() {
        for kind in CounterexampleKind::ALL {
            let p = make_continuous_variant(kind);
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let right = sample_episode(p.mdp(), &policy_right(), &mut rng).unwrap();
            assert!((right.return_() - 1.0).abs() < 1e-12, "{kind}");
            let left = sample_episode(p.mdp(), &policy_left(), &mut rng).unwrap();
            assert!((left.return_() - -1.0).abs() < 1e-12, "{kind}");
        }
    }

    #[test]
    fn observation_of_a_is_the_deterministic_point() {
        let p = make_continuous_variant(CounterexampleKind::WorstCase);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(observe(&p, 0, &mut rng), 0.0);
        }
    }

    #[test]
    fn observation_of_c_is_uniform_on_its_interval() {
        let p = make_continuous_variant(CounterexampleKind::Oscillating);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 10_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = observe(&p, 2, &mut rng);
            assert!((1.0..2.0).contains(&x));
            sum += x;
        }
        let mean = sum / n as f64;
        // Uniform on [1,2]: mean 1.5, sigma 1/sqrt(12); 0.03 is > 10 standard
        // errors at n = 10^4.
        assert!((mean - 1.5).abs() < 0.03, "mean {mean}");
    }

    #[test]
    fn aliased_pairs_share_intervals_in_the_default_layout() {
        let p = make_continuous_variant(CounterexampleKind::MultipleFixedPoint);
        assert_eq!(p.interval(1), p.interval(4)); // B and E
        assert_eq!(p.interval(2), p.interval(3)); // C and D
        let (alo, ahi) = p.interval(0);
        assert_eq!((alo, ahi), (0.0, 0.0));
        // Ordering on the line: A-point < C/D < B/E.
        assert!(ahi < p.interval(2).0);
        assert!(p.interval(2).1 < p.interval(1).0);
    }

    #[test]
    fn split_layout_keeps_pairs_adjacent_and_disjoint() {
        let p = make_continuous_variant_with_layout(
            CounterexampleKind::WorstCase,
            IntervalLayout::SplitPairs,
        );
        assert_ne!(p.interval(1), p.interval(4));
        assert_eq!(p.interval(2).1, p.interval(3).0); // C meets D
        assert_eq!(p.interval(1).1, p.interval(4).0); // B meets E
    }

    #[test]
    fn kind_parses_cli_names() {
        for kind in CounterexampleKind::ALL {
            let parsed: CounterexampleKind = kind.to_string().parse().unwrap();
            assert_eq!(parsed, kind);
        }
        assert!("banana".parse::<CounterexampleKind>().is_err());
    }
}
