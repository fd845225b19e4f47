//! The MisLid sampling rule: a learner plays weights over arms against the
//! closest alternative to the projected estimate, and a GLR-type statistic
//! decides when to stop.

mod algorithm;
mod bonus;
mod config;
mod thresholds;

pub use algorithm::{init_sequence, run, sample_arm, AlgorithmState, Phase, RestrictedArms};
pub use bonus::{bonus, bonuses, gain_vector};
pub use config::{GainMode, MislidConfig, PhaseTimings, RunResult, StoppingConfig, DEFAULT_SAFETY_CAP};
pub use thresholds::{alpha_lin, alpha_uns, beta_lin, beta_uns, heuristic_threshold, stopping_threshold, ThresholdMode};
