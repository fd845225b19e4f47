use serde::{Deserialize, Serialize};

use crate::model::{ModelSet, TopMQuery};
use crate::numeric::lambert_w_bar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// `min(β^uns, β^lin)`, which makes the algorithm δ-correct.
    Theoretical,
    /// `ln((1 + ln(t + 1)) / δ)`.
    #[default]
    Heuristic,
}

/// `W̄` with its argument clamped to the domain `[1, ∞)`.
fn w_bar_clamped(x: f64) -> f64 {
    lambert_w_bar(x.max(1.0)).expect("clamped argument is in the domain")
}

/// `2K W̄( ln(2e/δ)/(2K) + ½ ln(8eK ln t) )`, infinite for `t <= 1`.
pub fn beta_uns(t: f64, delta: f64, arms: usize) -> f64 {
    beta_uns_log(t, (2.0 * std::f64::consts::E / delta).ln(), arms)
}

/// `β^uns` with `ln(2e/δ)` supplied directly, so tiny `δ` stay representable.
fn beta_uns_log(t: f64, log_term: f64, arms: usize) -> f64 {
    if t <= 1.0 {
        return f64::INFINITY;
    }
    let k = arms as f64;
    let e = std::f64::consts::E;
    let x = log_term / (2.0 * k) + 0.5 * (8.0 * e * k * t.ln()).ln();
    2.0 * k * w_bar_clamped(x)
}

/// `½ (4√t ε + √2 √(1 + ln(1/δ) + (1 + 1/ln(1/δ)) (d/2) ln(1 + t ln(1/δ)/(2d))))²`.
pub fn beta_lin(t: f64, delta: f64, dim: usize, epsilon: f64) -> f64 {
    let d = dim as f64;
    let l = (1.0 / delta).ln();
    let inner = 1.0 + l + (1.0 + 1.0 / l) * (d / 2.0) * (1.0 + t / (2.0 * d) * l).ln();
    let root = 4.0 * t.sqrt() * epsilon + 2f64.sqrt() * inner.sqrt();
    0.5 * root * root
}

pub fn heuristic_threshold(t: f64, delta: f64) -> f64 {
    ((1.0 + (t + 1.0).ln()) / delta).ln()
}

pub fn stopping_threshold(t: f64, query: &TopMQuery, model: &ModelSet, mode: ThresholdMode) -> f64 {
    match mode {
        ThresholdMode::Heuristic => heuristic_threshold(t, query.delta),
        ThresholdMode::Theoretical => {
            beta_uns(t, query.delta, model.arms()).min(beta_lin(t, query.delta, model.dim(), model.epsilon))
        }
    }
}

/// `ln(5s²) + d ln(1 + s/(2d))`.
pub fn alpha_lin(s: f64, dim: usize) -> f64 {
    let d = dim as f64;
    (5.0 * s * s).ln() + d * (1.0 + s / (2.0 * d)).ln()
}

/// `β^uns_{s, 1/(5s³)}`.
pub fn alpha_uns(s: f64, arms: usize) -> f64 {
    let log_term = (10.0 * std::f64::consts::E).ln() + 3.0 * s.ln();
    beta_uns_log(s, log_term, arms)
}
