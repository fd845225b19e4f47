use std::time::Instant;

use super::BaselineConfig;
use crate::error::{Error, Result};
use crate::mislid::{heuristic_threshold, PhaseTimings, RunResult, ThresholdMode};
use crate::model::{is_correct_answer, top_m_answer, GaussianEnv, Instance, TopMQuery};
use crate::rng::GENERATOR;

/// `β(t, δ)` in the radius `√(2β / N_k)`.
pub fn lucb_exploration_rate(t: f64, delta: f64, arms: usize, mode: ThresholdMode) -> f64 {
    match mode {
        ThresholdMode::Heuristic => heuristic_threshold(t, delta),
        // union bound over arms and rounds
        ThresholdMode::Theoretical => (5.0 * arms as f64 * t.powi(4) / (4.0 * delta)).ln().max(0.0),
    }
}

/// Top-m LUCB: pull the weakest empirical member and the strongest outsider
/// until their confidence intervals separate.
pub fn lucb_run(instance: &Instance, query: &TopMQuery, config: &BaselineConfig, seed: u64) -> Result<RunResult> {
    config.validate()?;
    let started = Instant::now();
    let k = instance.arms();
    if query.m >= k {
        return Err(Error::Parameter("m must be smaller than the number of arms".into()));
    }
    let mut env = GaussianEnv::new(instance.clone(), seed);
    let mut counts = vec![0.0; k];
    let mut sums = vec![0.0; k];
    let mut pull = |arm: usize, counts: &mut Vec<f64>, sums: &mut Vec<f64>| {
        sums[arm] += env.pull(arm);
        counts[arm] += 1.0;
    };
    for arm in 0..k {
        pull(arm, &mut counts, &mut sums);
    }
    let mut timings = PhaseTimings::default();
    let mut t = k as u64;
    let (answer, incomplete) = loop {
        let tick = Instant::now();
        let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, n)| s / n).collect();
        let answer = top_m_answer(&means, query.m)?;
        let beta = lucb_exploration_rate(t as f64, query.delta, k, config.exploration);
        let radius = |a: usize| (2.0 * beta / counts[a]).sqrt();
        let mut inside = vec![false; k];
        for &a in &answer {
            inside[a] = true;
        }
        let weakest = *answer
            .iter()
            .min_by(|&&a, &&b| (means[a] - radius(a)).total_cmp(&(means[b] - radius(b))).then(a.cmp(&b)))
            .unwrap();
        let strongest = (0..k)
            .filter(|&a| !inside[a])
            .max_by(|&a, &b| (means[a] + radius(a)).total_cmp(&(means[b] + radius(b))).then(b.cmp(&a)))
            .unwrap();
        let overlap = (means[strongest] + radius(strongest)) - (means[weakest] - radius(weakest));
        timings.stopping += tick.elapsed().as_secs_f64();
        if overlap <= config.pac_epsilon {
            break (answer, false);
        }
        if t + 2 > config.safety_cap {
            break (answer, true);
        }
        pull(weakest, &mut counts, &mut sums);
        pull(strongest, &mut counts, &mut sums);
        t += 2;
    };
    Ok(RunResult {
        algorithm: "lucb".into(),
        tau: t,
        correct: !incomplete && is_correct_answer(&answer, &instance.mu, query.m),
        answer,
        seed,
        generator: GENERATOR.into(),
        incomplete,
        wall_time: started.elapsed().as_secs_f64(),
        timings,
    })
}
