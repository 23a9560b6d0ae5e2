//! Disjoint-arm UCB policies.
//!
//! [`Policy`] wraps two engines behind one select/update interface:
//!
//! * a per-arm ridge-regression UCB, used as DisSigUCB on signature features
//!   and as DisLinUCB on window-mean features;
//! * a per-arm Gaussian-kernel UCB on window-mean features.
//!
//! Ties in the arg max go to the lowest arm index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CholeskyFactor, SymMatrix};
use crate::signature;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum Algorithm {
    /// Ridge UCB on `[X_start, pruned signature]` features.
    DisSigUcb { depth: usize },
    /// Ridge UCB on the window mean.
    DisLinUcb,
    /// RBF-kernel UCB on the window mean.
    KernelUcb { bandwidth: f64 },
}

/// Which context representation a policy consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureMode {
    Signature { depth: usize },
    WindowMean,
}

impl FeatureMode {
    pub fn dim(self, channels: usize) -> usize {
        match self {
            FeatureMode::Signature { depth } => signature::feature_dim(channels, depth),
            FeatureMode::WindowMean => channels,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyConfig {
    /// Ridge regularizer, also the kernel regularizer for `KernelUcb`.
    pub lambda: f64,
    pub gamma: f64,
    pub arms: usize,
    pub algorithm: Algorithm,
}

impl PolicyConfig {
    pub fn feature_mode(&self) -> FeatureMode {
        match self.algorithm {
            Algorithm::DisSigUcb { depth } => FeatureMode::Signature { depth },
            Algorithm::DisLinUcb | Algorithm::KernelUcb { .. } => FeatureMode::WindowMean,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::config(format!(
                "lambda must be > 0, got {}",
                self.lambda
            )));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::config(format!(
                "gamma must be >= 0, got {}",
                self.gamma
            )));
        }
        if self.arms == 0 {
            return Err(Error::config("at least one arm is required"));
        }
        match self.algorithm {
            Algorithm::DisSigUcb { depth: 0 } => Err(Error::config("signature depth must be >= 1")),
            Algorithm::KernelUcb { bandwidth } if !(bandwidth > 0.0) || !bandwidth.is_finite() => {
                Err(Error::config(format!(
                    "kernel bandwidth must be > 0, got {bandwidth}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Ridge sufficient statistics of one arm: `M = λI + Σ x xᵀ`, `u = Σ r x`,
/// `β̂ = M⁻¹u`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmState {
    m: SymMatrix,
    u: Vec<f64>,
    beta_hat: Vec<f64>,
    pulls: usize,
    factor: CholeskyFactor,
}

impl ArmState {
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        let m = SymMatrix::scaled_identity(dim, lambda);
        let factor = CholeskyFactor::new(&m)?;
        Ok(Self {
            m,
            u: vec![0.0; dim],
            beta_hat: vec![0.0; dim],
            pulls: 0,
            factor,
        })
    }

    pub fn gram(&self) -> &SymMatrix {
        &self.m
    }

    pub fn moments(&self) -> &[f64] {
        &self.u
    }

    pub fn beta_hat(&self) -> &[f64] {
        &self.beta_hat
    }

    pub fn pulls(&self) -> usize {
        self.pulls
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::shape(format!(
                "feature of length {} for an arm of dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Adds one observation and re-solves `β̂` from a fresh factorization.
    pub fn update(&mut self, x: &[f64], reward: f64) -> Result<()> {
        self.check(x)?;
        self.m.add_outer(x)?;
        for (u, xi) in self.u.iter_mut().zip(x) {
            *u += reward * xi;
        }
        self.factor = CholeskyFactor::new(&self.m)?;
        self.beta_hat = self.factor.solve(&self.u)?;
        self.pulls += 1;
        Ok(())
    }
}

/// `⟨x, β̂⟩ + γ ‖x‖_{M⁻¹}`.
pub fn ucb_score(arm: &ArmState, x: &[f64], gamma: f64) -> Result<f64> {
    arm.check(x)?;
    let mean: f64 = x.iter().zip(&arm.beta_hat).map(|(a, b)| a * b).sum();
    Ok(mean + gamma * arm.factor.inv_quad_norm(x)?)
}

fn rbf(a: &[f64], b: &[f64], bandwidth: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-d2 / (2.0 * bandwidth * bandwidth)).exp()
}

#[derive(Debug, Clone)]
struct KernelCache {
    lambda: f64,
    bandwidth: f64,
    factor: CholeskyFactor,
    weights: Vec<f64>,
}

/// History of one arm for the kernel baseline, with the factorization of
/// `K + λI` over the stored contexts.
#[derive(Debug, Clone)]
pub struct KernelArmState {
    contexts: Vec<Vec<f64>>,
    rewards: Vec<f64>,
    cache: Option<KernelCache>,
}

impl KernelArmState {
    pub fn new() -> Self {
        Self {
            contexts: Vec::new(),
            rewards: Vec::new(),
            cache: None,
        }
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    /// Regularized Gram matrix `K + λI` over the stored contexts.
    pub fn regularized_gram(&self, lambda: f64, bandwidth: f64) -> SymMatrix {
        let mut g = SymMatrix::from_fn(self.len(), |i, j| {
            rbf(&self.contexts[i], &self.contexts[j], bandwidth)
        });
        g.add_diagonal(lambda);
        g
    }

    pub fn update(&mut self, z: &[f64], reward: f64, lambda: f64, bandwidth: f64) -> Result<()> {
        if let Some(first) = self.contexts.first() {
            if first.len() != z.len() {
                return Err(Error::shape(format!(
                    "context of length {} for a kernel arm of dimension {}",
                    z.len(),
                    first.len()
                )));
            }
        }
        self.contexts.push(z.to_vec());
        self.rewards.push(reward);
        self.cache = Some(self.factorize(lambda, bandwidth)?);
        Ok(())
    }

    fn factorize(&self, lambda: f64, bandwidth: f64) -> Result<KernelCache> {
        let factor = CholeskyFactor::new(&self.regularized_gram(lambda, bandwidth))?;
        let weights = factor.solve(&self.rewards)?;
        Ok(KernelCache {
            lambda,
            bandwidth,
            factor,
            weights,
        })
    }
}

impl Default for KernelArmState {
    fn default() -> Self {
        Self::new()
    }
}

/// GP-style score `μ + γσ` with `μ = k_zᵀ(K + λI)⁻¹r` and
/// `σ² = k(z,z) − k_zᵀ(K + λI)⁻¹k_z`. An empty arm scores `γ`.
pub fn kernel_ucb_score(
    arm: &KernelArmState,
    z: &[f64],
    gamma: f64,
    lambda: f64,
    bandwidth: f64,
) -> Result<f64> {
    if !(bandwidth > 0.0) {
        return Err(Error::config(format!(
            "kernel bandwidth must be > 0, got {bandwidth}"
        )));
    }
    if arm.is_empty() {
        return Ok(gamma);
    }
    let fresh;
    let cache = match &arm.cache {
        Some(c) if c.lambda == lambda && c.bandwidth == bandwidth => c,
        _ => {
            fresh = arm.factorize(lambda, bandwidth)?;
            &fresh
        }
    };
    if arm.contexts[0].len() != z.len() {
        return Err(Error::shape(format!(
            "context of length {} for a kernel arm of dimension {}",
            z.len(),
            arm.contexts[0].len()
        )));
    }
    let kz: Vec<f64> = arm.contexts.iter().map(|c| rbf(c, z, bandwidth)).collect();
    let mean: f64 = kz.iter().zip(&cache.weights).map(|(a, b)| a * b).sum();
    let explained: f64 = cache.factor.forward(&kz)?.iter().map(|v| v * v).sum();
    let sigma = (1.0 - explained).max(0.0).sqrt();
    Ok(mean + gamma * sigma)
}

#[derive(Debug, Clone)]
enum Engine {
    Ridge(Vec<ArmState>),
    Kernel {
        arms: Vec<KernelArmState>,
        bandwidth: f64,
    },
}

/// A K-armed policy. Single-writer: `select` and `update` on one instance
/// must be serialized.
#[derive(Debug, Clone)]
pub struct Policy {
    config: PolicyConfig,
    dim: usize,
    engine: Engine,
}

fn is_signature_dim(depth: usize, dim: usize) -> bool {
    (1..=dim).any(|d| signature::feature_dim(d, depth) == dim)
}

impl Policy {
    /// Fresh policy: every ridge arm starts at `M = λI, u = 0, β̂ = 0`.
    pub fn new(config: PolicyConfig, feature_dim: usize) -> Result<Self> {
        config.validate()?;
        if feature_dim == 0 {
            return Err(Error::config("feature dimension must be >= 1"));
        }
        if let Algorithm::DisSigUcb { depth } = config.algorithm {
            if !is_signature_dim(depth, feature_dim) {
                return Err(Error::config(format!(
                    "dimension {feature_dim} is not d + (d+1)^{depth} for any d"
                )));
            }
        }
        let engine = match config.algorithm {
            Algorithm::KernelUcb { bandwidth } => Engine::Kernel {
                arms: vec![KernelArmState::new(); config.arms],
                bandwidth,
            },
            _ => Engine::Ridge(
                (0..config.arms)
                    .map(|_| ArmState::new(feature_dim, config.lambda))
                    .collect::<Result<_>>()?,
            ),
        };
        Ok(Self {
            config,
            dim: feature_dim,
            engine,
        })
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    pub fn feature_mode(&self) -> FeatureMode {
        self.config.feature_mode()
    }

    pub fn feature_dim(&self) -> usize {
        self.dim
    }

    pub fn arms(&self) -> usize {
        self.config.arms
    }

    /// Ridge state of `arm`; `None` for the kernel baseline.
    pub fn arm_state(&self, arm: usize) -> Option<&ArmState> {
        match &self.engine {
            Engine::Ridge(arms) => arms.get(arm),
            Engine::Kernel { .. } => None,
        }
    }

    pub fn kernel_arm_state(&self, arm: usize) -> Option<&KernelArmState> {
        match &self.engine {
            Engine::Kernel { arms, .. } => arms.get(arm),
            Engine::Ridge(_) => None,
        }
    }

    pub fn total_pulls(&self) -> usize {
        match &self.engine {
            Engine::Ridge(arms) => arms.iter().map(ArmState::pulls).sum(),
            Engine::Kernel { arms, .. } => arms.iter().map(KernelArmState::len).sum(),
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::shape(format!(
                "feature of length {} for a policy of dimension {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let gamma = self.config.gamma;
        match &self.engine {
            Engine::Ridge(arms) => arms.iter().map(|a| ucb_score(a, x, gamma)).collect(),
            Engine::Kernel { arms, bandwidth } => arms
                .iter()
                .map(|a| kernel_ucb_score(a, x, gamma, self.config.lambda, *bandwidth))
                .collect(),
        }
    }

    pub fn select(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.scores(x)?))
    }

    /// Feeds the observed reward to `arm`; every other arm is left untouched.
    pub fn update(&mut self, arm: usize, x: &[f64], reward: f64) -> Result<()> {
        self.check(x)?;
        if arm >= self.config.arms {
            return Err(Error::BadArm {
                arm,
                arms: self.config.arms,
            });
        }
        match &mut self.engine {
            Engine::Ridge(arms) => arms[arm].update(x, reward),
            Engine::Kernel { arms, bandwidth } => {
                arms[arm].update(x, reward, self.config.lambda, *bandwidth)
            }
        }
    }
}

/// Index of the first maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Exploration coefficient from the regret analysis (with `λ = 1`):
/// `sqrt(dim · ln(K(1 + T B²)/δ)) + S`.
pub fn gamma_theoretical(
    dim: usize,
    arms: usize,
    horizon: usize,
    b: f64,
    delta: f64,
    s: f64,
) -> Result<f64> {
    if dim == 0 || arms == 0 || horizon == 0 {
        return Err(Error::config("dim, K and T must be positive"));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::config(format!("B must be > 0, got {b}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::config(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::config(format!("S must be >= 0, got {s}")));
    }
    let arg = arms as f64 * (1.0 + horizon as f64 * b * b) / delta;
    if !(arg > 1.0) {
        return Err(Error::config(format!("log argument {arg} must exceed 1")));
    }
    Ok((dim as f64 * arg.ln()).sqrt() + s)
}
