//! Browser bindings for the greedlab core: three interactive operations
//! returning JSON for a static page to render.
//!
//! Build with `wasm-pack build --target web crates/wasm-demo` and serve
//! `crates/wasm-demo/www/` next to the generated `pkg/` directory.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use greedlab::agents::{actor_critic_run, q_learning_run, AgentConfig, CriticMode};
use greedlab::catalog::{self, CounterexampleKind};
use greedlab::dp::{run_api, run_avi, DpOutcome, DpTrace};
use greedlab::linear::LinearValue;
use greedlab::mdp::evaluate_exact;
use greedlab::record::RunRecord;

/// Closed-form fitted weights and the one-round greedification decision over
/// an evenly spaced grid of start policies.
#[wasm_bindgen]
pub fn closed_form_sweep(problem: &str, points: usize) -> Result<String, JsValue> {
    closed_form_sweep_impl(problem, points).map_err(|e| JsValue::from_str(&e))
}

/// Run policy iteration ("api") or value iteration ("avi") from the start
/// policy with P(right) = rho, returning the iterates and classification.
/// For value iteration the initial weights are theta0 (three components).
#[wasm_bindgen]
pub fn dp_trace(
    problem: &str,
    algorithm: &str,
    rho: f64,
    theta0: Vec<f64>,
    max_iters: usize,
) -> Result<String, JsValue> {
    dp_trace_impl(problem, algorithm, rho, theta0, max_iters).map_err(|e| JsValue::from_str(&e))
}

/// Train one agent ("qlearning" | "ac-mc" | "ac-td0") for `episodes`
/// episodes and return at most `max_points` evenly spaced per-episode
/// records.
#[wasm_bindgen]
pub fn learning_curves(
    problem: &str,
    algorithm: &str,
    seed: u64,
    episodes: usize,
    alpha: f64,
    epsilon: f64,
    max_points: usize,
) -> Result<String, JsValue> {
    learning_curves_impl(problem, algorithm, seed, episodes, alpha, epsilon, max_points)
        .map_err(|e| JsValue::from_str(&e))
}

fn parse_kind(problem: &str) -> Result<CounterexampleKind, String> {
    problem
        .parse::<CounterexampleKind>()
        .map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SweepPoint {
    rho: f64,
    theta: Vec<f64>,
    /// Action one evaluation-plus-greedification round selects at the start
    /// state: 0 = left, 1 = right.
    action_after_one_round: usize,
}

fn closed_form_sweep_impl(problem: &str, points: usize) -> Result<String, String> {
    let kind = parse_kind(problem)?;
    let (mdp, fm) = catalog::make_counterexample(kind);
    let points = points.clamp(2, 2001);
    let mut out = Vec::with_capacity(points);
    for i in 0..points {
        let rho = i as f64 / (points - 1) as f64;
        let theta = catalog::closed_form_theta_star(kind, rho).map_err(|e| e.to_string())?;
        let policy = catalog::policy_rho(rho).map_err(|e| e.to_string())?;
        let trace = run_api(&mdp, &fm, &policy, 1).map_err(|e| e.to_string())?;
        out.push(SweepPoint {
            rho,
            theta: theta.theta().to_vec(),
            action_after_one_round: trace.iterations[0].1.mode_action(mdp.start_state()),
        });
    }
    to_json(&out)
}

#[derive(Serialize)]
struct TraceStep {
    iteration: usize,
    theta: Vec<f64>,
    action_at_start: usize,
    start_value: f64,
}

#[derive(Serialize)]
struct TraceResponse {
    outcome: String,
    steps: Vec<TraceStep>,
}

fn trace_response(trace: &DpTrace, mdp: &greedlab::mdp::Mdp) -> Result<TraceResponse, String> {
    let mut steps = Vec::with_capacity(trace.iterations.len());
    for (i, (theta, policy)) in trace.iterations.iter().enumerate() {
        let v = evaluate_exact(mdp, policy).map_err(|e| e.to_string())?;
        steps.push(TraceStep {
            iteration: i,
            theta: theta.theta().to_vec(),
            action_at_start: policy.mode_action(mdp.start_state()),
            start_value: v[mdp.start_state()],
        });
    }
    let outcome = match trace.outcome {
        DpOutcome::FixedPoint { at } => format!("fixed point (iteration {at})"),
        DpOutcome::Cycle { period, .. } => format!("cycle of period {period}"),
        DpOutcome::MaxIters => "no repeat within the budget".to_string(),
    };
    Ok(TraceResponse { outcome, steps })
}

fn dp_trace_impl(
    problem: &str,
    algorithm: &str,
    rho: f64,
    theta0: Vec<f64>,
    max_iters: usize,
) -> Result<String, String> {
    let kind = parse_kind(problem)?;
    let (mdp, fm) = catalog::make_counterexample(kind);
    let policy = catalog::policy_rho(rho).map_err(|e| e.to_string())?;
    let max_iters = max_iters.clamp(1, 10_000);
    let trace = match algorithm {
        "api" => run_api(&mdp, &fm, &policy, max_iters),
        "avi" => {
            if theta0.len() != fm.dim() {
                return Err("theta0 must have three components".to_string());
            }
            run_avi(&mdp, &fm, &LinearValue::new(theta0), &policy, max_iters)
        }
        other => return Err(format!("unknown algorithm {other:?}")),
    }
    .map_err(|e| e.to_string())?;
    to_json(&trace_response(&trace, &mdp)?)
}

#[derive(Serialize)]
struct CurvePoint {
    episode: usize,
    #[serde(rename = "return")]
    return_: f64,
    tracked_value_1: f64,
    tracked_value_2: f64,
    policy_stat: Option<f64>,
}

fn learning_curves_impl(
    problem: &str,
    algorithm: &str,
    seed: u64,
    episodes: usize,
    alpha: f64,
    epsilon: f64,
    max_points: usize,
) -> Result<String, String> {
    let kind = parse_kind(problem)?;
    let (mdp, fm) = catalog::make_counterexample(kind);
    let cfg = AgentConfig {
        alpha,
        epsilon,
        n_episodes: episodes.clamp(1, 200_000),
        seed,
        ..AgentConfig::default()
    };
    let records = match algorithm {
        "qlearning" => q_learning_run(&mdp, &fm, &cfg),
        "ac-mc" => actor_critic_run(&mdp, &fm, &cfg, CriticMode::MonteCarlo),
        "ac-td0" => actor_critic_run(&mdp, &fm, &cfg, CriticMode::Td0),
        other => return Err(format!("unknown algorithm {other:?}")),
    }
    .map_err(|e| e.to_string())?;
    let stride = records.len().div_ceil(max_points.clamp(10, 20_000));
    let points: Vec<CurvePoint> = records
        .iter()
        .enumerate()
        .filter(|(i, _)| i % stride == 0 || *i == records.len() - 1)
        .map(|(_, r): (usize, &RunRecord)| CurvePoint {
            episode: r.episode,
            return_: r.return_,
            tracked_value_1: r.tracked_value_1,
            tracked_value_2: r.tracked_value_2,
            policy_stat: r.policy_stat,
        })
        .collect();
    to_json(&points)
}
