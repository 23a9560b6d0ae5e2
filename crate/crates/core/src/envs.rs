//! Context processes and reward functionals.
//!
//! Synthetic processes are simulated with Euler–Maruyama on a uniform grid of
//! `steps_per_unit` steps per time unit; replay environments read recorded
//! windows and per-arm rewards from CSV.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bandit::argmax;
use crate::error::{Error, Result};
use crate::path::{DiscretePath, Extremum, Window};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Process {
    /// Standard Brownian motion from 0.
    Bm,
    /// Geometric Brownian motion from 1, observed as per-window log returns.
    Gbm { alpha: f64, nu: f64 },
    /// Ornstein–Uhlenbeck started from a standard normal draw.
    Ou { theta: f64, mu: f64, sigma: f64 },
    /// Recorded windows and rewards.
    Replay { context: PathBuf, rewards: PathBuf },
}

fn default_steps() -> usize {
    1000
}

fn default_noise() -> f64 {
    0.1
}

fn default_channels() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub process: Process,
    /// Last round `T`; rounds run `window..=horizon`.
    pub horizon: usize,
    /// Window length `L` in time units.
    pub window: usize,
    #[serde(default = "default_steps")]
    pub steps_per_unit: usize,
    #[serde(default = "default_noise")]
    pub noise_std: f64,
    #[serde(default = "default_channels")]
    pub channels: usize,
}

impl EnvSpec {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_unit == 0 {
            return Err(Error::config("steps_per_unit must be >= 1"));
        }
        if !(self.noise_std >= 0.0) || !self.noise_std.is_finite() {
            return Err(Error::config(format!(
                "noise_std must be >= 0, got {}",
                self.noise_std
            )));
        }
        if self.channels == 0 {
            return Err(Error::config("channels must be >= 1"));
        }
        if matches!(self.process, Process::Replay { .. }) {
            return Ok(());
        }
        if self.window == 0 || self.horizon < self.window {
            return Err(Error::config(format!(
                "need 1 <= window <= horizon, got window={} horizon={}",
                self.window, self.horizon
            )));
        }
        match self.process {
            Process::Gbm { alpha, nu } if !alpha.is_finite() || !nu.is_finite() => {
                Err(Error::config("GBM alpha and nu must be finite"))
            }
            Process::Ou { theta, mu, sigma }
                if !theta.is_finite() || !mu.is_finite() || !sigma.is_finite() =>
            {
                Err(Error::config("OU parameters must be finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn is_replay(&self) -> bool {
        matches!(self.process, Process::Replay { .. })
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.steps_per_unit as f64
    }
}

/// One Euler–Maruyama recursion driven by the given `N(0, Δt)` increments.
/// Returns `increments.len() + 1` samples starting at `x0`.
pub fn euler_maruyama(process: &Process, x0: f64, increments: &[f64], dt: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    out.push(x0);
    let mut x = x0;
    for (k, eps) in increments.iter().enumerate() {
        x = match *process {
            Process::Bm => x + eps,
            Process::Gbm { alpha, nu } => {
                let next = x + alpha * x * dt + nu * x * eps;
                if !(next > 0.0) {
                    return Err(Error::NonPositiveGbm {
                        step: k + 1,
                        value: next,
                    });
                }
                next
            }
            Process::Ou { theta, mu, sigma } => x + theta * (mu - x) * dt + sigma * eps,
            Process::Replay { .. } => {
                return Err(Error::config("replay environments are not simulated"))
            }
        };
        out.push(x);
    }
    Ok(out)
}

/// Simulates the full path on `[0, T]` (`T · steps_per_unit + 1` samples).
/// Channels are independent copies of the process, drawn channel by channel.
pub fn simulate_process<R: Rng + ?Sized>(spec: &EnvSpec, rng: &mut R) -> Result<DiscretePath> {
    spec.validate()?;
    let steps = spec.horizon * spec.steps_per_unit;
    let dt = spec.dt();
    let sd = dt.sqrt();
    let mut columns = Vec::with_capacity(spec.channels);
    for _ in 0..spec.channels {
        let x0 = match spec.process {
            Process::Bm => 0.0,
            Process::Gbm { .. } => 1.0,
            Process::Ou { .. } => rng.sample::<f64, _>(StandardNormal),
            Process::Replay { .. } => {
                return Err(Error::config("replay environments are not simulated"))
            }
        };
        let eps: Vec<f64> = (0..steps)
            .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        columns.push(euler_maruyama(&spec.process, x0, &eps, dt)?);
    }
    let times = (0..=steps)
        .map(|k| k as f64 / spec.steps_per_unit as f64)
        .collect();
    let values = (0..=steps)
        .flat_map(|k| columns.iter().map(move |c| c[k]))
        .collect();
    DiscretePath::from_flat(times, values, spec.channels)
}

/// The window `[round - L, round]`, log-normalized for GBM.
pub fn context_window(path: &DiscretePath, spec: &EnvSpec, round: usize) -> Result<Window> {
    if round < spec.window || round > spec.horizon {
        return Err(Error::BadRound {
            round,
            first: spec.window,
            last: spec.horizon,
        });
    }
    let mut w = path.slice_window((round - spec.window) as f64, round as f64)?;
    if matches!(spec.process, Process::Gbm { .. }) {
        w = w.log_normalize()?;
    }
    Ok(Window::new(round, w))
}

/// Reward functional as written in a config file. `Linear` without explicit
/// coefficients draws them per trial from `Uniform(-1, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RewardConfig {
    Linear {
        arms: usize,
        #[serde(default)]
        betas: Option<Vec<f64>>,
    },
    Maxmin,
    Newsvendor {
        /// Underage cost `b`.
        underage: f64,
        /// Overage cost `h`.
        overage: f64,
        /// Strictly increasing action levels, one per arm.
        levels: Vec<f64>,
    },
}

impl RewardConfig {
    pub fn arms(&self) -> usize {
        match self {
            RewardConfig::Linear { arms, .. } => *arms,
            RewardConfig::Maxmin => 2,
            RewardConfig::Newsvendor { levels, .. } => levels.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RewardConfig::Linear { arms, betas } => {
                if *arms == 0 {
                    return Err(Error::config("linear reward needs at least one arm"));
                }
                if let Some(b) = betas {
                    if b.len() != *arms || b.iter().any(|v| !v.is_finite()) {
                        return Err(Error::config("linear reward needs one finite beta per arm"));
                    }
                }
                Ok(())
            }
            RewardConfig::Maxmin => Ok(()),
            RewardConfig::Newsvendor {
                underage,
                overage,
                levels,
            } => {
                if !(*underage > 0.0) || !(*overage > 0.0) {
                    return Err(Error::config("newsvendor costs must be > 0"));
                }
                if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::config(
                        "newsvendor action levels must be non-empty and strictly increasing",
                    ));
                }
                Ok(())
            }
        }
    }

    /// Fixes the per-trial randomness (linear coefficients) from `rng`.
    pub fn instantiate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<RewardSpec> {
        self.validate()?;
        Ok(match self {
            RewardConfig::Linear { betas: Some(b), .. } => RewardSpec::Linear { betas: b.clone() },
            RewardConfig::Linear { arms, betas: None } => RewardSpec::Linear {
                betas: (0..*arms).map(|_| rng.random_range(-1.0..1.0)).collect(),
            },
            RewardConfig::Maxmin => RewardSpec::Maxmin,
            RewardConfig::Newsvendor {
                underage,
                overage,
                levels,
            } => RewardSpec::Newsvendor {
                underage: *underage,
                overage: *overage,
                levels: levels.clone(),
            },
        })
    }
}

/// A fully determined reward functional. All kinds read channel 0 of the
/// window.
#[derive(Debug, Clone, PartialEq)]
pub enum RewardSpec {
    /// `f_a = β_a · mean(window)`.
    Linear { betas: Vec<f64> },
    /// `f_1 = |max window|`, `f_2 = |min window|`.
    Maxmin,
    /// `f_a = −(b (D − A_a)₊ + h (A_a − D)₊)` against the next-window demand `D`.
    Newsvendor {
        underage: f64,
        overage: f64,
        levels: Vec<f64>,
    },
}

impl RewardSpec {
    pub fn arms(&self) -> usize {
        match self {
            RewardSpec::Linear { betas } => betas.len(),
            RewardSpec::Maxmin => 2,
            RewardSpec::Newsvendor { levels, .. } => levels.len(),
        }
    }

    pub fn needs_demand(&self) -> bool {
        matches!(self, RewardSpec::Newsvendor { .. })
    }
}

pub fn newsvendor_reward(underage: f64, overage: f64, action: f64, demand: f64) -> f64 {
    -(underage * (demand - action).max(0.0) + overage * (action - demand).max(0.0))
}

/// Noiseless per-arm rewards for one window.
pub fn eval_rewards(window: &Window, reward: &RewardSpec, demand: Option<f64>) -> Result<Vec<f64>> {
    let path = &window.path;
    match reward {
        RewardSpec::Linear { betas } => {
            let mean = path.mean_value()[0];
            Ok(betas.iter().map(|b| b * mean).collect())
        }
        RewardSpec::Maxmin => Ok(vec![
            path.channel_extremum(0, Extremum::Max)?.abs(),
            path.channel_extremum(0, Extremum::Min)?.abs(),
        ]),
        RewardSpec::Newsvendor {
            underage,
            overage,
            levels,
        } => {
            let d = demand.ok_or(Error::MissingDemand)?;
            Ok(levels
                .iter()
                .map(|a| newsvendor_reward(*underage, *overage, *a, d))
                .collect())
        }
    }
}

/// Demand revealed after round `t`: the channel-0 mean of the following window.
pub fn demand_from_window(next: &Window) -> f64 {
    next.path.mean_value()[0]
}

fn check_arm(true_rewards: &[f64], chosen: usize) -> Result<()> {
    if chosen >= true_rewards.len() {
        return Err(Error::BadArm {
            arm: chosen,
            arms: true_rewards.len(),
        });
    }
    Ok(())
}

/// `f_chosen + η` for a given noise draw `η`.
pub fn observe_with(true_rewards: &[f64], chosen: usize, eta: f64) -> Result<f64> {
    check_arm(true_rewards, chosen)?;
    Ok(true_rewards[chosen] + eta)
}

/// `f_chosen + η`, `η ~ N(0, noise_std²)`. Exactly one normal is drawn per
/// call, also when `noise_std = 0`, so stream positions do not depend on the
/// noise level.
pub fn observe<R: Rng + ?Sized>(
    true_rewards: &[f64],
    chosen: usize,
    noise_std: f64,
    rng: &mut R,
) -> Result<f64> {
    check_arm(true_rewards, chosen)?;
    let z: f64 = rng.sample(StandardNormal);
    observe_with(true_rewards, chosen, noise_std * z)
}

pub fn optimal_arm(true_rewards: &[f64]) -> usize {
    argmax(true_rewards)
}

/// `max_a f_a − f_chosen` on noiseless rewards.
pub fn instant_regret(true_rewards: &[f64], chosen: usize) -> Result<f64> {
    check_arm(true_rewards, chosen)?;
    let best = true_rewards[optimal_arm(true_rewards)];
    Ok(best - true_rewards[chosen])
}

/// Windows and true rewards of one environment realization, round by round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub window: Window,
    pub true_rewards: Vec<f64>,
    pub optimal_arm: usize,
}

impl RoundOutcome {
    pub fn new(window: Window, true_rewards: Vec<f64>) -> Self {
        let optimal_arm = optimal_arm(&true_rewards);
        Self {
            window,
            true_rewards,
            optimal_arm,
        }
    }
}

fn replay_err(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::ReplayFormat(format!("{}: {msg}", path.display()))
}

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| replay_err(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| replay_err(path, e))?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| replay_err(path, format!("row {}: bad number {f:?}", i + 2)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

fn check_header(path: &Path, header: &[String], first: &[&str], prefix: &str) -> Result<usize> {
    if header.len() <= first.len() {
        return Err(replay_err(
            path,
            format!("header {header:?} has no data columns"),
        ));
    }
    for (got, want) in header.iter().zip(first) {
        if got != want {
            return Err(replay_err(
                path,
                format!("expected column {want:?}, found {got:?}"),
            ));
        }
    }
    for (i, got) in header[first.len()..].iter().enumerate() {
        let want = format!("{prefix}{}", i + 1);
        if *got != want {
            return Err(replay_err(
                path,
                format!("expected column {want:?}, found {got:?}"),
            ));
        }
    }
    Ok(header.len() - first.len())
}

fn as_round(path: &Path, v: f64) -> Result<usize> {
    if v < 0.0 || v.fract() != 0.0 {
        return Err(replay_err(
            path,
            format!("round {v} is not a non-negative integer"),
        ));
    }
    Ok(v as usize)
}

/// Recorded environment: one window and one reward row per round.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayData {
    pub windows: Vec<Window>,
    pub rewards: Vec<Vec<f64>>,
}

impl ReplayData {
    pub fn channels(&self) -> usize {
        self.windows[0].path.channels()
    }

    pub fn arms(&self) -> usize {
        self.rewards[0].len()
    }

    pub fn outcomes(&self) -> Vec<RoundOutcome> {
        self.windows
            .iter()
            .zip(&self.rewards)
            .map(|(w, r)| RoundOutcome::new(w.clone(), r.clone()))
            .collect()
    }
}

/// Reads a context file (`round,time,x_1,...,x_d`, sorted by round then
/// time) and a rewards file (`round,r_arm_1,...,r_arm_K`, one row per round).
pub fn load_replay(context_csv: &Path, rewards_csv: &Path) -> Result<ReplayData> {
    let (header, rows) = read_csv(context_csv)?;
    let channels = check_header(context_csv, &header, &["round", "time"], "x_")?;
    let mut windows = Vec::new();
    let mut current: Option<(usize, Vec<f64>, Vec<f64>)> = None;
    let flush = |cur: (usize, Vec<f64>, Vec<f64>), windows: &mut Vec<Window>| -> Result<()> {
        let (round, times, values) = cur;
        if times.len() < 2 {
            return Err(replay_err(
                context_csv,
                format!("round {round} has fewer than 2 samples"),
            ));
        }
        let path = DiscretePath::from_flat(times, values, channels)
            .map_err(|e| replay_err(context_csv, format!("round {round}: {e}")))?;
        windows.push(Window::new(round, path));
        Ok(())
    };
    for row in rows {
        let round = as_round(context_csv, row[0])?;
        match &mut current {
            Some((r, times, values)) if *r == round => {
                if row[1] <= *times.last().unwrap() {
                    return Err(replay_err(
                        context_csv,
                        format!("round {round}: time {} does not increase", row[1]),
                    ));
                }
                times.push(row[1]);
                values.extend_from_slice(&row[2..]);
            }
            _ => {
                if let Some((r, ..)) = &current {
                    if round != r + 1 {
                        return Err(replay_err(
                            context_csv,
                            format!("round {round} follows round {r}; rounds must be contiguous"),
                        ));
                    }
                }
                if let Some(done) = current.take() {
                    flush(done, &mut windows)?;
                }
                current = Some((round, vec![row[1]], row[2..].to_vec()));
            }
        }
    }
    match current {
        Some(done) => flush(done, &mut windows)?,
        None => return Err(replay_err(context_csv, "no rows")),
    }

    let (header, rows) = read_csv(rewards_csv)?;
    check_header(rewards_csv, &header, &["round"], "r_arm_")?;
    if rows.len() != windows.len() {
        return Err(replay_err(
            rewards_csv,
            format!(
                "{} reward rows for {} context rounds",
                rows.len(),
                windows.len()
            ),
        ));
    }
    let mut rewards = Vec::with_capacity(rows.len());
    for (row, w) in rows.into_iter().zip(&windows) {
        let round = as_round(rewards_csv, row[0])?;
        if round != w.round {
            return Err(replay_err(
                rewards_csv,
                format!(
                    "reward row for round {round} where round {} was expected",
                    w.round
                ),
            ));
        }
        rewards.push(row[1..].to_vec());
    }
    Ok(ReplayData { windows, rewards })
}
