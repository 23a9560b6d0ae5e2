//! Seeded multi-trial experiments, regret aggregation, Gram-matrix
//! eigenvalue checks and result files.
//!
//! Every trial owns three independent ChaCha8 streams derived from
//! `base_seed + trial_index`: the context path, the per-trial reward
//! coefficients and the observation noise. All policies in a trial see the
//! same path, the same rewards and the same noise sequence.

use std::collections::btree_map::{BTreeMap, Entry};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandit::{Algorithm, FeatureMode, Policy, PolicyConfig};
use crate::envs::{
    self, context_window, demand_from_window, eval_rewards, instant_regret, load_replay, observe,
    simulate_process, EnvSpec, Process, ReplayData, RewardConfig, RoundOutcome,
};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, SymMatrix};
use crate::path::Window;
use crate::signature::{feature_vector, unpruned_feature_vector};

const PATH_STREAM: u64 = 0;
const REWARD_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn trial_seed(base_seed: u64, trial_index: usize) -> u64 {
    base_seed.wrapping_add(trial_index as u64)
}

/// Relative replay CSV paths are taken relative to the config file.
fn resolve_replay_paths(env: &mut EnvSpec, config_path: &Path) {
    let Some(base) = config_path.parent() else {
        return;
    };
    if let Process::Replay { context, rewards } = &mut env.process {
        for p in [context, rewards] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

fn default_lambda() -> f64 {
    1.0
}

fn default_gamma() -> f64 {
    1.0
}

fn default_trials() -> usize {
    1
}

/// A named policy as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub name: String,
    #[serde(flatten)]
    pub algorithm: Algorithm,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

impl PolicySpec {
    pub fn config(&self, arms: usize) -> PolicyConfig {
        PolicyConfig {
            lambda: self.lambda,
            gamma: self.gamma,
            arms,
            algorithm: self.algorithm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub env: EnvSpec,
    /// Required for synthetic processes; replay rewards come from the file.
    #[serde(default)]
    pub reward: Option<RewardConfig>,
    pub policies: Vec<PolicySpec>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: path.into(),
                message: e.to_string(),
            })?
        } else {
            toml::from_str(&text).map_err(|e| Error::Parse {
                path: path.into(),
                message: e.to_string(),
            })?
        };
        resolve_replay_paths(&mut cfg.env, path);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        if self.trials == 0 {
            return Err(Error::config("trials must be >= 1"));
        }
        if self.policies.is_empty() {
            return Err(Error::config("at least one policy is required"));
        }
        for (i, p) in self.policies.iter().enumerate() {
            if self.policies[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::config(format!("duplicate policy name {:?}", p.name)));
            }
            p.config(1).validate()?;
        }
        match (&self.env.process, &self.reward) {
            (Process::Replay { .. }, _) => Ok(()),
            (_, None) => Err(Error::config(
                "synthetic environments need a [reward] section",
            )),
            (_, Some(r)) => r.validate(),
        }
    }

    fn load_replay(&self) -> Result<Option<ReplayData>> {
        match &self.env.process {
            Process::Replay { context, rewards } => Ok(Some(load_replay(context, rewards)?)),
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub arm: usize,
    pub regret: f64,
    pub cum_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyTrace {
    pub policy: String,
    pub records: Vec<RoundRecord>,
}

impl PolicyTrace {
    pub fn total_regret(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_regret)
    }

    /// Cumulative regret after `round`, if that round was played.
    pub fn regret_at(&self, round: usize) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.round == round)
            .map(|r| r.cum_regret)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub policies: Vec<PolicyTrace>,
}

impl TrialResult {
    pub fn trace(&self, policy: &str) -> Option<&PolicyTrace> {
        self.policies.iter().find(|p| p.policy == policy)
    }
}

/// Builds the window sequence of one trial. For newsvendor rewards the path
/// is simulated one window past the horizon so the last round has a demand.
fn synthetic_outcomes(
    env: &EnvSpec,
    reward: &RewardConfig,
    seed: u64,
) -> Result<Vec<RoundOutcome>> {
    let reward = reward.instantiate(&mut stream(seed, REWARD_STREAM))?;
    let mut sim = env.clone();
    if reward.needs_demand() {
        sim.horizon += env.window;
    }
    let path = simulate_process(&sim, &mut stream(seed, PATH_STREAM))?;
    let windows = (env.window..=sim.horizon)
        .map(|r| context_window(&path, &sim, r))
        .collect::<Result<Vec<Window>>>()?;
    let rounds = env.horizon - env.window + 1;
    (0..rounds)
        .map(|i| {
            let demand = reward
                .needs_demand()
                .then(|| demand_from_window(&windows[i + env.window]));
            let rewards = eval_rewards(&windows[i], &reward, demand)?;
            Ok(RoundOutcome::new(windows[i].clone(), rewards))
        })
        .collect()
}

fn trial_outcomes(
    config: &ExperimentConfig,
    replay: Option<&ReplayData>,
    seed: u64,
) -> Result<Vec<RoundOutcome>> {
    match replay {
        Some(data) => Ok(data.outcomes()),
        None => {
            let reward = config
                .reward
                .as_ref()
                .ok_or_else(|| Error::config("synthetic environments need a [reward] section"))?;
            synthetic_outcomes(&config.env, reward, seed)
        }
    }
}

fn features(window: &Window, mode: FeatureMode) -> Result<Vec<f64>> {
    match mode {
        FeatureMode::Signature { depth } => Ok(feature_vector(window, depth)?.coords),
        FeatureMode::WindowMean => Ok(window.path.mean_value()),
    }
}

fn run_trial_with(
    config: &ExperimentConfig,
    trial_index: usize,
    replay: Option<&ReplayData>,
) -> Result<TrialResult> {
    let seed = trial_seed(config.base_seed, trial_index);
    let outcomes = trial_outcomes(config, replay, seed)?;
    let Some(first) = outcomes.first() else {
        return Err(Error::config("environment produced no rounds"));
    };
    let channels = first.window.path.channels();
    let arms = first.true_rewards.len();

    let mut cache: BTreeMap<FeatureMode, Vec<Vec<f64>>> = BTreeMap::new();
    let mut traces = Vec::with_capacity(config.policies.len());
    for spec in &config.policies {
        let pc = spec.config(arms);
        let mode = pc.feature_mode();
        let xs = match cache.entry(mode) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => e.insert(
                outcomes
                    .iter()
                    .map(|o| features(&o.window, mode))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        let mut policy = Policy::new(pc, mode.dim(channels))?;
        let mut noise = stream(seed, NOISE_STREAM);
        let mut cum = 0.0;
        let mut records = Vec::with_capacity(outcomes.len());
        for (o, x) in outcomes.iter().zip(xs) {
            let arm = policy.select(x)?;
            let r = observe(&o.true_rewards, arm, config.env.noise_std, &mut noise)?;
            policy.update(arm, x, r)?;
            let regret = instant_regret(&o.true_rewards, arm)?;
            cum += regret;
            records.push(RoundRecord {
                round: o.window.round,
                arm,
                regret,
                cum_regret: cum,
            });
        }
        traces.push(PolicyTrace {
            policy: spec.name.clone(),
            records,
        });
    }
    Ok(TrialResult {
        trial: trial_index,
        policies: traces,
    })
}

/// Runs every policy on trial `trial_index`. Deterministic in
/// `(config, trial_index)`.
pub fn run_trial(config: &ExperimentConfig, trial_index: usize) -> Result<TrialResult> {
    config.validate()?;
    let replay = config.load_replay()?;
    run_trial_with(config, trial_index, replay.as_ref())
}

/// Linear interpolation between order statistics of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

impl Band {
    pub fn of(values: &[f64]) -> Band {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Band {
            q25: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q75: quantile(&v, 0.75),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub policy: String,
    pub round: usize,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

/// Cross-trial quartiles of cumulative regret, per policy and round.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateCurves {
    pub rows: Vec<AggregateRow>,
}

impl AggregateCurves {
    pub fn from_trials(policies: &[String], trials: &[TrialResult]) -> Self {
        let mut rows = Vec::new();
        for name in policies {
            let traces: Vec<&PolicyTrace> = trials.iter().filter_map(|t| t.trace(name)).collect();
            let Some(first) = traces.first() else {
                continue;
            };
            for (i, rec) in first.records.iter().enumerate() {
                let vals: Vec<f64> = traces.iter().map(|t| t.records[i].cum_regret).collect();
                let b = Band::of(&vals);
                rows.push(AggregateRow {
                    policy: name.clone(),
                    round: rec.round,
                    q25: b.q25,
                    median: b.median,
                    q75: b.q75,
                });
            }
        }
        Self { rows }
    }

    pub fn get(&self, policy: &str, round: usize) -> Option<&AggregateRow> {
        self.rows
            .iter()
            .find(|r| r.policy == policy && r.round == round)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedTrial {
    pub trial: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub policies: Vec<String>,
    pub trials: Vec<TrialResult>,
    pub failed: Vec<FailedTrial>,
    pub aggregate: AggregateCurves,
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))
}

/// Runs all trials on up to `jobs` workers (`0` = one per core) and merges
/// them in trial order. Failed trials are listed and left out of the
/// aggregates; configuration and replay-loading errors abort the whole run.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<ExperimentOutput> {
    config.validate()?;
    let replay = config.load_replay()?;
    let results: Vec<Result<TrialResult>> = pool(jobs)?.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|i| run_trial_with(config, i, replay.as_ref()))
            .collect()
    });
    let mut trials = Vec::new();
    let mut failed = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(t) => trials.push(t),
            Err(e @ (Error::BadConfig(_) | Error::ShapeMismatch(_))) => return Err(e),
            Err(e) => failed.push(FailedTrial {
                trial: i,
                error: e.to_string(),
            }),
        }
    }
    let policies: Vec<String> = config.policies.iter().map(|p| p.name.clone()).collect();
    let aggregate = AggregateCurves::from_trials(&policies, &trials);
    Ok(ExperimentOutput {
        policies,
        trials,
        failed,
        aggregate,
    })
}

/// `ceil(((B²√(2α) + B√(2B²α + 8ρα/3)) / ρ)²)` with `α = ln(dim·T/δ)`.
pub fn t0_theoretical(b: f64, rho: f64, dim: usize, horizon: usize, delta: f64) -> Result<u64> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::config(format!("B must be > 0, got {b}")));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::config(format!("rho must be > 0, got {rho}")));
    }
    if dim == 0 || horizon == 0 {
        return Err(Error::config("dim and T must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::config(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let alpha = (dim as f64 * horizon as f64 / delta).ln();
    if !(alpha > 0.0) {
        return Err(Error::config(format!("alpha = {alpha} must be positive")));
    }
    let b2 = b * b;
    let root =
        (b2 * (2.0 * alpha).sqrt() + b * (2.0 * b2 * alpha + 8.0 * rho * alpha / 3.0).sqrt()) / rho;
    Ok(((root * root).ceil() as u64).max(1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigencheckConfig {
    pub env: EnvSpec,
    pub depths: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl EigencheckConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: path.into(),
                message: e.to_string(),
            })?
        } else {
            toml::from_str(&text).map_err(|e| Error::Parse {
                path: path.into(),
                message: e.to_string(),
            })?
        };
        resolve_replay_paths(&mut cfg.env, path);
        Ok(cfg)
    }
}

/// Gram diagnostics of one trial at one depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramStats {
    pub depth: usize,
    pub trial: usize,
    /// `(round, λ_min(Σ̂_round))` with `Σ̂_t` the average of `x̄ x̄ᵀ` over rounds up to `t`.
    pub lambda_min: Vec<(usize, f64)>,
    /// Running maximum of `|x̄_t|`.
    pub b_hat: f64,
    /// `λ_min(Σ̂_T)`.
    pub rho_hat: f64,
    /// Extreme eigenvalues of `Σ̂_T` built from unpruned signature features.
    pub unpruned_lambda_min: f64,
    pub unpruned_lambda_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenAggregateRow {
    pub depth: usize,
    pub round: usize,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub stats: Vec<GramStats>,
    pub aggregate: Vec<EigenAggregateRow>,
    pub failed: Vec<FailedTrial>,
}

fn trial_windows(env: &EnvSpec, replay: Option<&ReplayData>, seed: u64) -> Result<Vec<Window>> {
    if let Some(data) = replay {
        return Ok(data.windows.clone());
    }
    let path = simulate_process(env, &mut stream(seed, PATH_STREAM))?;
    (env.window..=env.horizon)
        .map(|r| context_window(&path, env, r))
        .collect()
}

/// Running Gram-matrix eigenvalues for pruned features of one trial.
pub fn gram_stats(windows: &[Window], depth: usize, trial: usize) -> Result<GramStats> {
    let pruned = windows
        .iter()
        .map(|w| feature_vector(w, depth).map(|f| f.coords))
        .collect::<Result<Vec<_>>>()?;
    let unpruned = windows
        .iter()
        .map(|w| unpruned_feature_vector(w, depth).map(|f| f.coords))
        .collect::<Result<Vec<_>>>()?;
    let dim = pruned.first().map_or(0, Vec::len);
    let mut sum = SymMatrix::zeros(dim);
    let mut lambda_min = Vec::with_capacity(windows.len());
    let mut b_hat: f64 = 0.0;
    for (i, (w, x)) in windows.iter().zip(&pruned).enumerate() {
        sum.add_outer(x)?;
        b_hat = b_hat.max(x.iter().map(|v| v * v).sum::<f64>().sqrt());
        let mut avg = sum.clone();
        avg.scale(1.0 / (i + 1) as f64);
        lambda_min.push((w.round, eigenvalues(&avg).first().copied().unwrap_or(0.0)));
    }
    let rho_hat = lambda_min.last().map_or(0.0, |(_, l)| *l);

    let udim = unpruned.first().map_or(0, Vec::len);
    let mut usum = SymMatrix::zeros(udim);
    for x in &unpruned {
        usum.add_outer(x)?;
    }
    usum.scale(1.0 / unpruned.len().max(1) as f64);
    let ueig = eigenvalues(&usum);
    Ok(GramStats {
        depth,
        trial,
        lambda_min,
        b_hat,
        rho_hat,
        unpruned_lambda_min: ueig.first().copied().unwrap_or(0.0),
        unpruned_lambda_max: ueig.last().copied().unwrap_or(0.0),
    })
}

/// Empirical non-degeneracy check of pruned signature features over
/// `trials` seeded paths, for each depth.
pub fn eigencheck(
    env: &EnvSpec,
    depths: &[usize],
    trials: usize,
    base_seed: u64,
    jobs: usize,
) -> Result<EigenReport> {
    env.validate()?;
    if depths.is_empty() || depths.contains(&0) {
        return Err(Error::config("depths must be non-empty and >= 1"));
    }
    if trials == 0 {
        return Err(Error::config("trials must be >= 1"));
    }
    let replay = match &env.process {
        Process::Replay { context, rewards } => Some(envs::load_replay(context, rewards)?),
        _ => None,
    };
    let per_trial: Vec<Result<Vec<GramStats>>> = pool(jobs)?.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let windows = trial_windows(env, replay.as_ref(), trial_seed(base_seed, t))?;
                depths.iter().map(|&n| gram_stats(&windows, n, t)).collect()
            })
            .collect()
    });
    let mut stats = Vec::new();
    let mut failed = Vec::new();
    for (t, r) in per_trial.into_iter().enumerate() {
        match r {
            Ok(s) => stats.extend(s),
            Err(e) => failed.push(FailedTrial {
                trial: t,
                error: e.to_string(),
            }),
        }
    }
    stats.sort_by_key(|s| (s.depth, s.trial));
    let mut aggregate = Vec::new();
    for &depth in depths {
        let group: Vec<&GramStats> = stats.iter().filter(|s| s.depth == depth).collect();
        let Some(first) = group.first() else { continue };
        for (i, (round, _)) in first.lambda_min.iter().enumerate() {
            let vals: Vec<f64> = group.iter().map(|s| s.lambda_min[i].1).collect();
            let b = Band::of(&vals);
            aggregate.push(EigenAggregateRow {
                depth,
                round: *round,
                q25: b.q25,
                median: b.median,
                q75: b.q75,
            });
        }
    }
    Ok(EigenReport {
        stats,
        aggregate,
        failed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

pub const TRIALS_CSV: &str = "trials.csv";
pub const AGGREGATE_CSV: &str = "aggregate.csv";
pub const RESULTS_JSON: &str = "results.json";
pub const EIGEN_TRIALS_CSV: &str = "eigen_trials.csv";
pub const EIGEN_AGGREGATE_CSV: &str = "eigen_aggregate.csv";
pub const EIGEN_SUMMARY_CSV: &str = "eigen_summary.csv";
pub const EIGEN_JSON: &str = "eigen.json";

fn write_file(path: &Path, contents: &[u8]) -> Result<PathBuf> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Shortest representation that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

/// A flat per-round log row as written to `trials.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub policy: String,
    pub trial: usize,
    pub round: usize,
    pub arm: usize,
    pub regret: f64,
    pub cum_regret: f64,
}

pub fn trial_rows(trials: &[TrialResult]) -> Vec<TrialRow> {
    let mut rows = Vec::new();
    for t in trials {
        for p in &t.policies {
            rows.extend(p.records.iter().map(|r| TrialRow {
                policy: p.policy.clone(),
                trial: t.trial,
                round: r.round,
                arm: r.arm,
                regret: r.regret,
                cum_regret: r.cum_regret,
            }));
        }
    }
    rows
}

#[derive(Serialize)]
struct ResultsJson<'a> {
    trials: Vec<TrialRow>,
    aggregate: &'a [AggregateRow],
    failed: &'a [FailedTrial],
}

/// Writes per-round logs and aggregates into `dir` and returns the written
/// paths. Floats use shortest round-trip formatting.
pub fn write_results(
    out: &ExperimentOutput,
    format: OutputFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    match format {
        OutputFormat::Csv => {
            let trials = csv_bytes(
                &["policy", "trial", "round", "arm", "regret", "cum_regret"],
                trial_rows(&out.trials).into_iter().map(|r| {
                    vec![
                        r.policy,
                        r.trial.to_string(),
                        r.round.to_string(),
                        r.arm.to_string(),
                        num(r.regret),
                        num(r.cum_regret),
                    ]
                }),
            );
            let agg = csv_bytes(
                &["policy", "round", "q25", "median", "q75"],
                out.aggregate.rows.iter().map(|r| {
                    vec![
                        r.policy.clone(),
                        r.round.to_string(),
                        num(r.q25),
                        num(r.median),
                        num(r.q75),
                    ]
                }),
            );
            Ok(vec![
                write_file(&dir.join(TRIALS_CSV), &trials)?,
                write_file(&dir.join(AGGREGATE_CSV), &agg)?,
            ])
        }
        OutputFormat::Json => {
            let doc = ResultsJson {
                trials: trial_rows(&out.trials),
                aggregate: &out.aggregate.rows,
                failed: &out.failed,
            };
            let text = serde_json::to_vec_pretty(&doc).expect("results serialize");
            Ok(vec![write_file(&dir.join(RESULTS_JSON), &text)?])
        }
    }
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::Parse {
            path: path.into(),
            message: e.to_string(),
        })
}

pub fn read_trials_csv(path: &Path) -> Result<Vec<TrialRow>> {
    read_rows(path)
}

pub fn read_aggregate_csv(path: &Path) -> Result<Vec<AggregateRow>> {
    read_rows(path)
}

pub fn write_eigen_report(
    report: &EigenReport,
    format: OutputFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    match format {
        OutputFormat::Csv => {
            let trials = csv_bytes(
                &["depth", "trial", "round", "lambda_min"],
                report.stats.iter().flat_map(|s| {
                    s.lambda_min.iter().map(move |(round, l)| {
                        vec![
                            s.depth.to_string(),
                            s.trial.to_string(),
                            round.to_string(),
                            num(*l),
                        ]
                    })
                }),
            );
            let agg = csv_bytes(
                &["depth", "round", "q25", "median", "q75"],
                report.aggregate.iter().map(|r| {
                    vec![
                        r.depth.to_string(),
                        r.round.to_string(),
                        num(r.q25),
                        num(r.median),
                        num(r.q75),
                    ]
                }),
            );
            let summary = csv_bytes(
                &[
                    "depth",
                    "trial",
                    "b_hat",
                    "rho_hat",
                    "unpruned_lambda_min",
                    "unpruned_lambda_max",
                ],
                report.stats.iter().map(|s| {
                    vec![
                        s.depth.to_string(),
                        s.trial.to_string(),
                        num(s.b_hat),
                        num(s.rho_hat),
                        num(s.unpruned_lambda_min),
                        num(s.unpruned_lambda_max),
                    ]
                }),
            );
            Ok(vec![
                write_file(&dir.join(EIGEN_TRIALS_CSV), &trials)?,
                write_file(&dir.join(EIGEN_AGGREGATE_CSV), &agg)?,
                write_file(&dir.join(EIGEN_SUMMARY_CSV), &summary)?,
            ])
        }
        OutputFormat::Json => {
            let text = serde_json::to_vec_pretty(report).expect("report serializes");
            Ok(vec![write_file(&dir.join(EIGEN_JSON), &text)?])
        }
    }
}
