//! Online learners on the simplex, fed with per-arm gains (to be maximized).

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::model::Weights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    #[default]
    Adahedge,
    /// Follow-the-leader: a point mass on the best arm so far.
    Ftl,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState {
    pub kind: LearnerKind,
    pub cumulative_gains: Vec<f64>,
    /// AdaHedge's `Δ`: the summed mixability gaps.
    pub cumulative_mixability_gap: f64,
    pub t: u64,
    /// `Σ_s ω_s · g_s`.
    pub realized_gain: f64,
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + xs.map(|x| (x - top).exp()).sum::<f64>().ln()
}

fn argmax_lowest(v: &[f64]) -> usize {
    v.iter().enumerate().fold(0, |best, (k, x)| if *x > v[best] { k } else { best })
}

impl LearnerState {
    pub fn new(kind: LearnerKind, arms: usize) -> Self {
        Self { kind, cumulative_gains: vec![0.0; arms], cumulative_mixability_gap: 0.0, t: 0, realized_gain: 0.0 }
    }

    pub fn arms(&self) -> usize {
        self.cumulative_gains.len()
    }

    /// `ln K / Δ`, infinite while no gap has accrued.
    pub fn learning_rate(&self) -> f64 {
        let k = self.arms() as f64;
        if self.cumulative_mixability_gap > 0.0 {
            k.ln() / self.cumulative_mixability_gap
        } else {
            f64::INFINITY
        }
    }

    fn raw_weights(&self) -> Vec<f64> {
        let g = &self.cumulative_gains;
        let k = g.len();
        match self.kind {
            LearnerKind::Ftl => {
                let mut w = vec![0.0; k];
                w[argmax_lowest(g)] = 1.0;
                w
            }
            LearnerKind::Adahedge => {
                let top = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let eta = self.learning_rate();
                let mut w: Vec<f64> = if eta.is_infinite() {
                    g.iter().map(|x| if *x == top { 1.0 } else { 0.0 }).collect()
                } else {
                    g.iter().map(|x| (eta * (x - top)).exp()).collect()
                };
                let total: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= total);
                w
            }
        }
    }

    pub fn propose(&self) -> Weights {
        Weights::normalized(self.raw_weights()).expect("learner weights have positive mass")
    }

    pub fn update(&mut self, gains: &[f64]) -> Result<()> {
        if gains.len() != self.arms() {
            return param("gain vector length does not match arm count");
        }
        if gains.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numeric("non-finite gain".into()));
        }
        let w = self.raw_weights();
        let expected: f64 = w.iter().zip(gains).map(|(a, b)| a * b).sum();
        if self.kind == LearnerKind::Adahedge {
            let g = &self.cumulative_gains;
            let eta = self.learning_rate();
            let mix = if eta.is_infinite() {
                let before = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let after = g.iter().zip(gains).map(|(a, b)| a + b).fold(f64::NEG_INFINITY, f64::max);
                after - before
            } else {
                let after = log_sum_exp(g.iter().zip(gains).map(|(a, b)| eta * (a + b)));
                let before = log_sum_exp(g.iter().map(|a| eta * a));
                (after - before) / eta
            };
            self.cumulative_mixability_gap += (mix - expected).max(0.0);
        }
        for (c, g) in self.cumulative_gains.iter_mut().zip(gains) {
            *c += g;
        }
        self.realized_gain += expected;
        self.t += 1;
        Ok(())
    }
}

/// Best fixed arm's cumulative gain minus the learner's realized gain.
///
/// The history is replayed from scratch, so it must be exactly the sequence
/// of gains this state has seen.
pub fn regret(state: &LearnerState, gains_history: &[Vec<f64>]) -> Result<f64> {
    if gains_history.len() as u64 != state.t {
        return param(format!("history has {} rounds, state has {}", gains_history.len(), state.t));
    }
    let mut replay = LearnerState::new(state.kind, state.arms());
    for g in gains_history {
        replay.update(g)?;
    }
    let best = replay.cumulative_gains.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(best - replay.realized_gain)
}

/// Regret guarantee of AdaHedge for gains whose per-round spread is at most `sigma`:
/// `2σ sqrt(t ln K) + 16σ(2 + ln K / 3)`.
pub fn adahedge_regret_bound(sigma: f64, t: u64, arms: usize) -> f64 {
    let lk = (arms as f64).ln();
    2.0 * sigma * (t as f64 * lk).sqrt() + 16.0 * sigma * (2.0 + lk / 3.0)
}
