//! Batch experiment runner: multi-seed orchestration, CSV emission, and
//! machine-readable summaries.
//!
//! Every experiment writes into its output directory:
//!   runs/run_###.csv      one CSV per run (RL and DQN algorithms)
//!   traces/run_###.csv    one trace per start (DP algorithms)
//!   runs.csv              all run records combined
//!   aggregate.csv         per-episode mean and standard error
//!   outcomes.csv          per-run outcome rows (DP algorithms)
//!   report.csv            per-policy fixed-point rows (enumerate)
//!   summary.json          the SuiteSummary

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{actor_critic_run, q_learning_run, AgentConfig, CriticMode};
use crate::catalog::{self, CounterexampleKind, IntervalLayout};
use crate::dp::{enumerate_fixed_points, run_api, run_avi, DpOutcome, DpTrace};
use crate::dqn::{dqn_run, final_window_mean_return, DqnConfig};
use crate::error::{Error, Result};
use crate::linear::{FeatureMap, LinearValue};
use crate::mdp::{Mdp, MdpSpec, TabularPolicy};
use crate::record::{self, RunRecord};

/// Which engine an experiment drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Api,
    Avi,
    Qlearning,
    AcMc,
    AcTd0,
    Dqn,
    Enumerate,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "api" => Ok(Algorithm::Api),
            "avi" => Ok(Algorithm::Avi),
            "qlearning" => Ok(Algorithm::Qlearning),
            "ac-mc" => Ok(Algorithm::AcMc),
            "ac-td0" => Ok(Algorithm::AcTd0),
            "dqn" => Ok(Algorithm::Dqn),
            "enumerate" => Ok(Algorithm::Enumerate),
            other => Err(Error::Config(format!(
                "unknown algorithm {other:?}; expected api|avi|qlearning|ac-mc|ac-td0|dqn|enumerate"
            ))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Algorithm::Api => "api",
            Algorithm::Avi => "avi",
            Algorithm::Qlearning => "qlearning",
            Algorithm::AcMc => "ac-mc",
            Algorithm::AcTd0 => "ac-td0",
            Algorithm::Dqn => "dqn",
            Algorithm::Enumerate => "enumerate",
        };
        f.write_str(name)
    }
}

/// Full experiment description; also the schema of `--config` documents.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    /// Built-in problem; ignored when an explicit `mdp` is given.
    #[serde(default)]
    pub problem: Option<CounterexampleKind>,
    /// Use the continuous-observation variant (DQN only).
    #[serde(default)]
    pub continuous: bool,
    #[serde(default)]
    pub interval_layout: Option<IntervalLayout>,
    /// A user MDP replacing the built-in problem (DP algorithms and agents).
    #[serde(default)]
    pub mdp: Option<MdpSpec>,
    /// Aggregation partition by state label (or decimal index), one list per
    /// group; defaults to the built-in partition for catalog problems and to
    /// exact one-state groups for user MDPs.
    #[serde(default)]
    pub aggregation: Option<Vec<Vec<String>>>,
    /// Number of runs (RL/DQN: seeds; DP: evenly spaced start policies).
    #[serde(default)]
    pub n_runs: Option<usize>,
    /// Episodes per run (RL/DQN) or iteration budget (DP).
    #[serde(default)]
    pub n_episodes: Option<usize>,
    /// Fixed start-policy parameter P(right at start); DP only. When set,
    /// exactly one run from this start is executed.
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub init_scale: Option<f64>,
    #[serde(default)]
    pub advantage_baseline: Option<bool>,
    /// DQN hidden width.
    #[serde(default)]
    pub hidden_units: Option<usize>,
    #[serde(default)]
    pub step_size: Option<f64>,
    #[serde(default)]
    pub l2_coeff: Option<f64>,
    #[serde(default)]
    pub batch: Option<usize>,
    #[serde(default)]
    pub replay_capacity: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; defaults to available parallelism.
    #[serde(default)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            algorithm,
            problem: None,
            continuous: false,
            interval_layout: None,
            mdp: None,
            aggregation: None,
            n_runs: None,
            n_episodes: None,
            rho: None,
            alpha: None,
            epsilon: None,
            init_scale: None,
            advantage_baseline: None,
            hidden_units: None,
            step_size: None,
            l2_coeff: None,
            batch: None,
            replay_capacity: None,
            seed: 0,
            out_dir: out_dir.into(),
            workers: None,
        }
    }

    /// Check algorithm/parameter compatibility before any run starts.
    pub fn validate(&self) -> Result<()> {
        let is_dqn = self.algorithm == Algorithm::Dqn;
        if self.continuous && !is_dqn {
            return Err(Error::Config(
                "continuous observations are only supported by the dqn algorithm".into(),
            ));
        }
        if is_dqn {
            if self.mdp.is_some() {
                return Err(Error::Config(
                    "dqn runs on the built-in continuous problems, not a custom mdp".into(),
                ));
            }
            if self.problem.is_none() {
                return Err(Error::Config("dqn requires a problem".into()));
            }
        }
        if self.problem.is_none() && self.mdp.is_none() {
            return Err(Error::Config(
                "either a built-in problem or an mdp must be given".into(),
            ));
        }
        if self.problem.is_some() && self.mdp.is_some() {
            return Err(Error::Config(
                "give either a built-in problem or an mdp, not both".into(),
            ));
        }
        if let Some(rho) = self.rho {
            if !(0.0..=1.0).contains(&rho) {
                return Err(Error::RhoOutOfRange(rho));
            }
            if !matches!(self.algorithm, Algorithm::Api | Algorithm::Avi) {
                return Err(Error::Config(
                    "rho only parameterizes the dp algorithms' start policy".into(),
                ));
            }
        }
        if self.rho.is_some() && self.mdp.is_some() {
            return Err(Error::Config(
                "rho start policies require a two-action catalog problem".into(),
            ));
        }
        if let Some(n) = self.n_runs {
            if n == 0 {
                return Err(Error::Config("n_runs must be positive".into()));
            }
        }
        if self.algorithm == Algorithm::Enumerate && self.rho.is_some() {
            return Err(Error::Config("enumerate takes no start policy".into()));
        }
        Ok(())
    }

    fn build_problem(&self) -> Result<(Mdp, FeatureMap)> {
        if let Some(spec) = &self.mdp {
            let mdp = Mdp::from_spec(spec.clone())?;
            let fm = match &self.aggregation {
                Some(groups) => resolve_aggregation(&mdp, groups)?,
                None => FeatureMap::identity(mdp.n_states()),
            };
            if fm.n_states() != mdp.n_states() {
                return Err(Error::Config(
                    "aggregation does not cover the mdp's states".into(),
                ));
            }
            return Ok((mdp, fm));
        }
        let kind = self.problem.expect("validated");
        let (mdp, default_fm) = catalog::make_counterexample(kind);
        let fm = match &self.aggregation {
            Some(groups) => resolve_aggregation(&mdp, groups)?,
            None => default_fm,
        };
        Ok((mdp, fm))
    }

    fn agent_config(&self, seed: u64) -> AgentConfig {
        let defaults = AgentConfig::default();
        AgentConfig {
            alpha: self.alpha.unwrap_or(defaults.alpha),
            epsilon: self.epsilon.unwrap_or(defaults.epsilon),
            n_episodes: self.n_episodes.unwrap_or(defaults.n_episodes),
            init_scale: self.init_scale.unwrap_or(defaults.init_scale),
            seed,
            advantage_baseline: self
                .advantage_baseline
                .unwrap_or(defaults.advantage_baseline),
        }
    }

    fn dqn_config(&self, seed: u64) -> DqnConfig {
        let defaults = DqnConfig::default();
        DqnConfig {
            epsilon: self.epsilon.unwrap_or(defaults.epsilon),
            batch: self.batch.unwrap_or(defaults.batch),
            l2_coeff: self.l2_coeff.unwrap_or(defaults.l2_coeff),
            step_size: self.step_size.unwrap_or(defaults.step_size),
            n_episodes: self.n_episodes.unwrap_or(defaults.n_episodes),
            seed,
            replay_capacity: self.replay_capacity.unwrap_or(defaults.replay_capacity),
        }
    }
}

/// Resolve a partition given by state labels (or decimal indices).
fn resolve_aggregation(mdp: &Mdp, groups: &[Vec<String>]) -> Result<FeatureMap> {
    let mut resolved = Vec::with_capacity(groups.len());
    for group in groups {
        let mut members = Vec::with_capacity(group.len());
        for name in group {
            let s = mdp
                .state_by_name(name)
                .ok_or_else(|| Error::Config(format!("unknown state {name:?} in aggregation")))?;
            members.push(s);
        }
        resolved.push(members);
    }
    FeatureMap::aggregation(mdp.n_states(), &resolved)
}

/// Per-episode aggregate across runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub episode: usize,
    pub mean_return: f64,
    pub se_return: f64,
    pub mean_tracked_value_1: f64,
    pub se_tracked_value_1: f64,
    pub mean_tracked_value_2: f64,
    pub se_tracked_value_2: f64,
    pub mean_policy_stat: Option<f64>,
    pub se_policy_stat: Option<f64>,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Standard error: sample standard deviation over sqrt(n); zero for n = 1.
pub fn standard_error(values: &[f64]) -> f64 {
    let n = values.len();
    if n <= 1 {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Aggregate per-run records episode by episode. All runs must have the same
/// episode count.
pub fn aggregate_records(runs: &[Vec<RunRecord>]) -> Result<Vec<AggregateRow>> {
    let Some(first) = runs.first() else {
        return Err(Error::Config("no runs to aggregate".into()));
    };
    if runs.iter().any(|r| r.len() != first.len()) {
        return Err(Error::Config("runs have differing episode counts".into()));
    }
    let mut rows = Vec::with_capacity(first.len());
    for e in 0..first.len() {
        let returns: Vec<f64> = runs.iter().map(|r| r[e].return_).collect();
        let tv1: Vec<f64> = runs.iter().map(|r| r[e].tracked_value_1).collect();
        let tv2: Vec<f64> = runs.iter().map(|r| r[e].tracked_value_2).collect();
        let ps: Option<Vec<f64>> = runs.iter().map(|r| r[e].policy_stat).collect();
        rows.push(AggregateRow {
            episode: first[e].episode,
            mean_return: mean(&returns),
            se_return: standard_error(&returns),
            mean_tracked_value_1: mean(&tv1),
            se_tracked_value_1: standard_error(&tv1),
            mean_tracked_value_2: mean(&tv2),
            se_tracked_value_2: standard_error(&tv2),
            mean_policy_stat: ps.as_deref().map(mean),
            se_policy_stat: ps.as_deref().map(standard_error),
        });
    }
    Ok(rows)
}

pub fn aggregate_to_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(
        "episode,mean_return,se_return,mean_tracked_value_1,se_tracked_value_1,\
         mean_tracked_value_2,se_tracked_value_2,mean_policy_stat,se_policy_stat\n",
    );
    for r in rows {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.episode,
            r.mean_return,
            r.se_return,
            r.mean_tracked_value_1,
            r.se_tracked_value_1,
            r.mean_tracked_value_2,
            r.se_tracked_value_2,
            opt(r.mean_policy_stat),
            opt(r.se_policy_stat)
        ));
    }
    out
}

/// Machine-readable result of one experiment.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub algorithm: Algorithm,
    pub problem: Option<CounterexampleKind>,
    pub n_runs: usize,
    /// Outcome tallies: DP trajectory classifications, or final-policy
    /// statistics for the learning algorithms.
    pub tallies: BTreeMap<String, usize>,
    /// Grand mean return over the final 5% of episodes (learning algorithms).
    pub mean_final_return: Option<f64>,
    /// Mean over runs of the final-episode policy statistic (actor-critic).
    pub mean_final_policy_stat: Option<f64>,
    /// Fixed-point counts (enumerate).
    pub api_fixed_points: Option<usize>,
    pub avi_fixed_points: Option<usize>,
    pub fixed_point_sets_equal: Option<bool>,
    pub files: Vec<PathBuf>,
}

impl SuiteSummary {
    fn new(algorithm: Algorithm, problem: Option<CounterexampleKind>, n_runs: usize) -> Self {
        SuiteSummary {
            algorithm,
            problem,
            n_runs,
            tallies: BTreeMap::new(),
            mean_final_return: None,
            mean_final_policy_stat: None,
            api_fixed_points: None,
            avi_fixed_points: None,
            fixed_point_sets_equal: None,
            files: Vec::new(),
        }
    }
}

/// Map worker: applies `f` to 0..n on a small thread pool, returning results
/// in index order regardless of scheduling.
fn parallel_map<T, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let workers = workers.max(1).min(n.max(1));
    if workers <= 1 {
        return (0..n).map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<T>>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    return;
                }
                let out = f(i);
                results.lock().expect("worker poisoned the results")[i] = Some(out);
            });
        }
    });
    results
        .into_inner()
        .expect("worker poisoned the results")
        .into_iter()
        .map(|slot| slot.expect("every index was produced"))
        .collect()
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Execute an experiment, write its files, and return the summary.
pub fn run_experiment_suite(cfg: &ExperimentConfig) -> Result<SuiteSummary> {
    cfg.validate()?;
    match cfg.algorithm {
        Algorithm::Api | Algorithm::Avi => run_dp_suite(cfg),
        Algorithm::Qlearning | Algorithm::AcMc | Algorithm::AcTd0 => run_agent_suite(cfg),
        Algorithm::Dqn => run_dqn_suite(cfg),
        Algorithm::Enumerate => run_enumerate_suite(cfg),
    }
}

fn outcome_tally_key(trace: &DpTrace, mdp: &Mdp) -> String {
    match trace.outcome {
        DpOutcome::FixedPoint { .. } => format!(
            "fixed_point(action_at_start={})",
            trace.final_policy().mode_action(mdp.start_state())
        ),
        DpOutcome::Cycle { period, .. } => format!("cycle(period={period})"),
        DpOutcome::MaxIters => "max_iters".to_string(),
    }
}

fn run_dp_suite(cfg: &ExperimentConfig) -> Result<SuiteSummary> {
    let (mdp, fm) = cfg.build_problem()?;
    let max_iters = cfg.n_episodes.unwrap_or(1_000);
    // One run per start: a fixed rho, or an evenly spaced grid of starts.
    let n_runs = if cfg.rho.is_some() {
        1
    } else {
        cfg.n_runs.unwrap_or(101)
    };
    let start_rho = |i: usize| -> f64 {
        match cfg.rho {
            Some(r) => r,
            None if n_runs == 1 => 0.5,
            None => i as f64 / (n_runs - 1) as f64,
        }
    };
    let workers = cfg.workers.unwrap_or_else(default_workers);
    let algorithm = cfg.algorithm;
    // Catalog problems sweep the start-policy parameter over a grid; custom
    // MDPs draw a random stochastic start per run (run 0 starts uniform).
    let custom_starts = cfg.mdp.is_some();
    let seed = cfg.seed;
    let traces = parallel_map(n_runs, workers, |i| {
        let initial = if custom_starts {
            if i == 0 {
                TabularPolicy::uniform(mdp.n_states(), mdp.n_actions())
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed + i as u64);
                random_stochastic_policy(mdp.n_states(), mdp.n_actions(), &mut rng)
            }
        } else {
            catalog::policy_rho(start_rho(i))?
        };
        match algorithm {
            Algorithm::Api => run_api(&mdp, &fm, &initial, max_iters),
            Algorithm::Avi => {
                // Random weight initialization, one stream per run.
                let mut rng = ChaCha8Rng::seed_from_u64(seed + i as u64);
                let scale = cfg.init_scale.unwrap_or(1.0);
                let theta0 = LinearValue::new(
                    (0..fm.dim()).map(|_| scale * box_muller(&mut rng)).collect(),
                );
                run_avi(&mdp, &fm, &theta0, &initial, max_iters)
            }
            _ => unreachable!(),
        }
    })?;

    let mut summary = SuiteSummary::new(cfg.algorithm, cfg.problem, n_runs);
    let mut outcomes_csv = String::from("run,rho,outcome,iterations,action_at_start,start_value\n");
    for (i, trace) in traces.iter().enumerate() {
        *summary
            .tallies
            .entry(outcome_tally_key(trace, &mdp))
            .or_insert(0) += 1;
        let v = crate::mdp::evaluate_exact(&mdp, trace.final_policy())?;
        outcomes_csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            i,
            if custom_starts {
                String::new()
            } else {
                start_rho(i).to_string()
            },
            trace.outcome,
            trace.iterations.len(),
            trace.final_policy().mode_action(mdp.start_state()),
            v[mdp.start_state()]
        ));
        let path = cfg.out_dir.join(format!("traces/run_{i:03}.csv"));
        write_file(&path, &trace.to_csv(&mdp)?)?;
        summary.files.push(path);
    }
    let outcomes_path = cfg.out_dir.join("outcomes.csv");
    write_file(&outcomes_path, &outcomes_csv)?;
    summary.files.push(outcomes_path);
    finish_summary(cfg, summary)
}

/// Uniform-simplex random policy rows via normalized exponential spacings.
fn random_stochastic_policy(
    n_states: usize,
    n_actions: usize,
    rng: &mut impl Rng,
) -> TabularPolicy {
    let probs = (0..n_states)
        .map(|_| {
            let mut row: Vec<f64> = (0..n_actions)
                .map(|_| -(rng.gen::<f64>().max(f64::MIN_POSITIVE)).ln())
                .collect();
            let total: f64 = row.iter().sum();
            for p in &mut row {
                *p /= total;
            }
            let head: f64 = row[..n_actions - 1].iter().sum();
            row[n_actions - 1] = 1.0 - head;
            row
        })
        .collect();
    TabularPolicy::new(probs).expect("generated policy is valid")
}

fn box_muller(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn run_agent_suite(cfg: &ExperimentConfig) -> Result<SuiteSummary> {
    let (mdp, fm) = cfg.build_problem()?;
    let n_runs = cfg.n_runs.unwrap_or(30);
    let workers = cfg.workers.unwrap_or_else(default_workers);
    let algorithm = cfg.algorithm;
    let runs = parallel_map(n_runs, workers, |i| {
        let agent_cfg = cfg.agent_config(cfg.seed + i as u64);
        match algorithm {
            Algorithm::Qlearning => q_learning_run(&mdp, &fm, &agent_cfg),
            Algorithm::AcMc => actor_critic_run(&mdp, &fm, &agent_cfg, CriticMode::MonteCarlo),
            Algorithm::AcTd0 => actor_critic_run(&mdp, &fm, &agent_cfg, CriticMode::Td0),
            _ => unreachable!(),
        }
    })?;
    write_learning_suite(cfg, runs)
}

fn run_dqn_suite(cfg: &ExperimentConfig) -> Result<SuiteSummary> {
    let kind = cfg.problem.expect("validated");
    // Split intervals give every state its own observation region, so an
    // overparameterized network can actually separate the aliased pairs;
    // with shared intervals no amount of capacity can.
    let layout = cfg.interval_layout.unwrap_or(IntervalLayout::SplitPairs);
    let problem = catalog::make_continuous_variant_with_layout(kind, layout);
    let hidden = cfg.hidden_units.unwrap_or(4);
    let n_runs = cfg.n_runs.unwrap_or(30);
    let workers = cfg.workers.unwrap_or_else(default_workers);
    let runs = parallel_map(n_runs, workers, |i| {
        dqn_run(&problem, hidden, &cfg.dqn_config(cfg.seed + i as u64))
    })?;
    write_learning_suite(cfg, runs)
}

/// Shared tail for the learning algorithms: per-run files, combined CSV,
/// aggregate CSV, and summary statistics.
fn write_learning_suite(cfg: &ExperimentConfig, runs: Vec<Vec<RunRecord>>) -> Result<SuiteSummary> {
    let mut summary = SuiteSummary::new(cfg.algorithm, cfg.problem, runs.len());
    let mut combined = String::from(record::CSV_HEADER);
    combined.push('\n');
    for (i, run) in runs.iter().enumerate() {
        let text = record::to_csv(run);
        combined.push_str(text.split_once('\n').map(|(_, rest)| rest).unwrap_or(""));
        let path = cfg.out_dir.join(format!("runs/run_{i:03}.csv"));
        write_file(&path, &text)?;
        summary.files.push(path);
    }
    let runs_path = cfg.out_dir.join("runs.csv");
    write_file(&runs_path, &combined)?;
    summary.files.push(runs_path);

    let aggregate = aggregate_records(&runs)?;
    let aggregate_path = cfg.out_dir.join("aggregate.csv");
    write_file(&aggregate_path, &aggregate_to_csv(&aggregate))?;
    summary.files.push(aggregate_path);

    let mut final_left = 0usize;
    let mut final_right = 0usize;
    let mut final_returns = Vec::new();
    let mut final_stats = Vec::new();
    for run in &runs {
        let last = run.last().expect("non-empty run");
        if last.tracked_value_1 >= last.tracked_value_2 {
            final_left += 1;
        } else {
            final_right += 1;
        }
        final_returns.push(final_window_mean_return(run));
        if let Some(p) = last.policy_stat {
            final_stats.push(p);
        }
    }
    summary
        .tallies
        .insert("final_tracked_left_geq_right".into(), final_left);
    summary
        .tallies
        .insert("final_tracked_right_gt_left".into(), final_right);
    summary.mean_final_return = Some(mean(&final_returns));
    if !final_stats.is_empty() {
        summary.mean_final_policy_stat = Some(mean(&final_stats));
    }
    finish_summary(cfg, summary)
}

fn run_enumerate_suite(cfg: &ExperimentConfig) -> Result<SuiteSummary> {
    let (mdp, fm) = cfg.build_problem()?;
    let report = enumerate_fixed_points(&mdp, &fm)?;
    let mut summary = SuiteSummary::new(cfg.algorithm, cfg.problem, 0);
    summary.api_fixed_points = Some(report.api_fixed_count());
    summary.avi_fixed_points = Some(report.avi_fixed_count());
    summary.fixed_point_sets_equal = Some(report.sets_equal());
    let path = cfg.out_dir.join("report.csv");
    write_file(&path, &report.to_csv())?;
    summary.files.push(path);
    finish_summary(cfg, summary)
}

fn finish_summary(cfg: &ExperimentConfig, mut summary: SuiteSummary) -> Result<SuiteSummary> {
    let path = cfg.out_dir.join("summary.json");
    summary.files.push(path.clone());
    let json = serde_json::to_string_pretty(&summary)?;
    write_file(&path, &json)?;
    Ok(summary)
}
