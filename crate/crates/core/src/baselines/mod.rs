//! Comparison algorithms: unstructured LUCB and the linear gap-based LinGapE.

#[cfg(feature = "lingape")]
mod lingape;
mod lucb;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::mislid::{ThresholdMode, DEFAULT_SAFETY_CAP};

#[cfg(feature = "lingape")]
pub use lingape::lingape_run;
pub use lucb::{lucb_exploration_rate, lucb_run};

fn default_cap() -> u64 {
    DEFAULT_SAFETY_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    /// `heuristic` shares the MisLid heuristic rate; `theoretical` uses a
    /// union bound over arms and time.
    #[serde(default)]
    pub exploration: ThresholdMode,
    /// Stop once the critical gap is certified up to this slack.
    #[serde(default)]
    pub pac_epsilon: f64,
    #[serde(default = "default_cap")]
    pub safety_cap: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { exploration: ThresholdMode::Heuristic, pac_epsilon: 0.0, safety_cap: DEFAULT_SAFETY_CAP }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pac_epsilon >= 0.0) {
            return param("pac_epsilon must be non-negative");
        }
        if self.safety_cap == 0 {
            return param("safety cap must be positive");
        }
        Ok(())
    }
}
