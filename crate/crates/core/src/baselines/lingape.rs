use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use super::BaselineConfig;
use super::lucb::lucb_exploration_rate;
use crate::error::{Error, Result};
use crate::mislid::{PhaseTimings, RunResult};
use crate::model::{is_correct_answer, top_m_answer, FeatureMatrix, GaussianEnv, Instance, TopMQuery};
use crate::numeric::cholesky;
use crate::rng::GENERATOR;

/// Ridge added to the design matrix.
const RIDGE: f64 = 1.0;

/// Top-m LinGapE: least squares under an exactly linear model. The most
/// ambiguous (member, outsider) pair drives a greedy design choice, and the
/// run stops once that pair's gap index drops below the slack.
pub fn lingape_run(
    instance: &Instance,
    features: &FeatureMatrix,
    query: &TopMQuery,
    config: &BaselineConfig,
    seed: u64,
) -> Result<RunResult> {
    config.validate()?;
    let started = Instant::now();
    let (k, d) = (features.arms(), features.dim());
    if instance.arms() != k {
        return Err(Error::Parameter("instance and features disagree on the number of arms".into()));
    }
    if query.m >= k {
        return Err(Error::Parameter("m must be smaller than the number of arms".into()));
    }
    let phi: Vec<DVector<f64>> = (0..k).map(|a| DVector::from_column_slice(features.row(a))).collect();
    let mut env = GaussianEnv::new(instance.clone(), seed);
    let mut v = DMatrix::<f64>::identity(d, d) * RIDGE;
    let mut b = DVector::<f64>::zeros(d);
    let mut pull = |arm: usize, v: &mut DMatrix<f64>, b: &mut DVector<f64>| {
        let r = env.pull(arm);
        *v += &phi[arm] * phi[arm].transpose();
        *b += &phi[arm] * r;
    };
    for arm in 0..k {
        pull(arm, &mut v, &mut b);
    }
    let mut t = k as u64;
    let mut timings = PhaseTimings::default();
    let (answer, incomplete) = loop {
        let tick = Instant::now();
        let chol = cholesky(&v)?;
        let theta = chol.solve(&b);
        let means: Vec<f64> = phi.iter().map(|p| p.dot(&theta)).collect();
        let answer = top_m_answer(&means, query.m)?;
        let width = (2.0 * lucb_exploration_rate(t as f64, query.delta, k, config.exploration)).sqrt();
        let mut inside = vec![false; k];
        for &a in &answer {
            inside[a] = true;
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for &i in &answer {
            for j in (0..k).filter(|&j| !inside[j]) {
                let y = &phi[i] - &phi[j];
                let index = means[j] - means[i] + width * y.dot(&chol.solve(&y)).max(0.0).sqrt();
                if best.is_none_or(|(bv, _, _)| index > bv) {
                    best = Some((index, i, j));
                }
            }
        }
        let (index, i, j) = best.expect("at least one pair");
        timings.stopping += tick.elapsed().as_secs_f64();
        if index <= config.pac_epsilon {
            break (answer, false);
        }
        if t >= config.safety_cap {
            break (answer, true);
        }
        let tick = Instant::now();
        // greedy: the pull that most shrinks ||φ_i - φ_j||_{V⁻¹}
        let y = &phi[i] - &phi[j];
        let vy = chol.solve(&y);
        let arm = (0..k)
            .map(|a| {
                let va = chol.solve(&phi[a]);
                (a, vy.dot(&phi[a]).powi(2) / (1.0 + phi[a].dot(&va)))
            })
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc })
            .0;
        timings.sampling += tick.elapsed().as_secs_f64();
        pull(arm, &mut v, &mut b);
        t += 1;
    };
    Ok(RunResult {
        algorithm: "lingape".into(),
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
