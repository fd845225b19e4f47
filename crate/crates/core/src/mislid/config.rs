use serde::{Deserialize, Serialize};

use super::thresholds::ThresholdMode;
use crate::error::{param, Result};
use crate::learner::LearnerKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainMode {
    /// `(|μ̃_k - λ_k| + √c_k)²`
    #[default]
    Optimistic,
    /// `(μ̃_k - λ_k)² + c_k`
    Aggressive,
    /// `(μ̃_k - λ_k)²`, no bonus.
    Empirical,
}

impl GainMode {
    pub fn uses_bonus(self) -> bool {
        self != GainMode::Empirical
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingConfig {
    #[serde(default)]
    pub mode: ThresholdMode,
    /// Checks happen at `t₀, ⌈γ t₀⌉, ...`; `1` checks every round.
    #[serde(default = "one")]
    pub gamma: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for StoppingConfig {
    fn default() -> Self {
        Self { mode: ThresholdMode::default(), gamma: 1.0 }
    }
}

pub const DEFAULT_SAFETY_CAP: u64 = 10_000_000;

fn default_cap() -> u64 {
    DEFAULT_SAFETY_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MislidConfig {
    #[serde(default)]
    pub gain_mode: GainMode,
    #[serde(default)]
    pub learner: LearnerKind,
    #[serde(default)]
    pub stopping: StoppingConfig,
    /// Restrict the sampling-side alternative to a small working set of arms.
    #[serde(default)]
    pub restricted_arms: bool,
    #[serde(default = "default_cap")]
    pub safety_cap: u64,
}

impl Default for MislidConfig {
    fn default() -> Self {
        Self {
            gain_mode: GainMode::default(),
            learner: LearnerKind::default(),
            stopping: StoppingConfig::default(),
            restricted_arms: false,
            safety_cap: DEFAULT_SAFETY_CAP,
        }
    }
}

impl MislidConfig {
    pub fn validate(&self) -> Result<()> {
        let g = self.stopping.gamma;
        if !(1.0..=1.3).contains(&g) {
            return param(format!("grid factor {g} outside [1, 1.3]"));
        }
        if self.safety_cap == 0 {
            return param("safety cap must be positive");
        }
        Ok(())
    }
}

/// Wall-clock seconds spent per phase of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub init: f64,
    pub stopping: f64,
    pub sampling: f64,
    pub estimation: f64,
}

/// Outcome of one run of any algorithm in the crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: String,
    pub tau: u64,
    pub answer: Vec<usize>,
    pub correct: bool,
    pub seed: u64,
    pub generator: String,
    /// The safety cap was reached before the stopping rule fired.
    pub incomplete: bool,
    pub wall_time: f64,
    #[serde(default)]
    pub timings: PhaseTimings,
}

impl RunResult {
    /// Equality on everything except timing.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.algorithm == other.algorithm
            && self.tau == other.tau
            && self.answer == other.answer
            && self.correct == other.correct
            && self.seed == other.seed
            && self.generator == other.generator
            && self.incomplete == other.incomplete
    }
}
