use std::collections::VecDeque;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::bonus::{bonuses, gain_vector};
use super::config::{MislidConfig, PhaseTimings, RunResult};
use super::thresholds::stopping_threshold;
use crate::error::{Error, Result};
use crate::geometry::{closest_alternative_restricted, exceeds_threshold, project_onto_model, AlternativeSolution, ProjectedEstimate};
use crate::learner::LearnerState;
use crate::model::{is_correct_answer, top_m_answer, FeatureMatrix, GaussianEnv, Instance, ModelSet, SufficientStats, TopMQuery, Weights};
use crate::numeric::{barycentric_spanner, min_eigenvalue};
use crate::rng::{stream, Purpose, GENERATOR};

/// Round-robin pulls of a barycentric spanner, cut at the first prefix with
/// `λ_min(V) >= 2L²`.
pub fn init_sequence(features: &FeatureMatrix) -> Result<Vec<usize>> {
    let spanner = barycentric_spanner(features)?;
    let target = 2.0 * features.max_norm().powi(2);
    let d = features.dim();
    let mut v = nalgebra::DMatrix::<f64>::zeros(d, d);
    let mut seq = Vec::new();
    loop {
        for &k in &spanner {
            let phi = nalgebra::DVector::from_column_slice(features.row(k));
            v += &phi * phi.transpose();
            seq.push(k);
            // rank is d only once the whole spanner has been pulled
            if seq.len() >= d && min_eigenvalue(&v)? >= target * (1.0 - 1e-12) {
                return Ok(seq);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Phase {
    Initializing { remaining: VecDeque<usize> },
    Running,
    Stopped { answer: Vec<usize> },
}

/// Sampling-side working set: recent argmin arms plus fresh random outsiders.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedArms {
    pub memory: VecDeque<usize>,
    pub capacity: usize,
    pub fresh: usize,
}

impl RestrictedArms {
    fn remember(&mut self, arm: usize) {
        self.memory.retain(|&a| a != arm);
        self.memory.push_front(arm);
        self.memory.truncate(self.capacity);
    }

    /// Outside arms to consider this round.
    fn working_set(&self, answer: &[usize], arms: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let mut excluded = vec![false; arms];
        for &a in answer {
            excluded[a] = true;
        }
        let mut set: Vec<usize> = self.memory.iter().copied().filter(|&a| !excluded[a]).collect();
        for &a in &set {
            excluded[a] = true;
        }
        let pool: Vec<usize> = (0..arms).filter(|&a| !excluded[a]).collect();
        let take = self.fresh.min(pool.len());
        set.extend(sample(rng, pool.len(), take).into_iter().map(|i| pool[i]));
        set
    }
}

pub struct AlgorithmState {
    pub stats: SufficientStats,
    /// Available once the initialization sequence is done.
    pub estimate: Option<ProjectedEstimate>,
    pub learner: LearnerState,
    pub phase: Phase,
    pub restricted: Option<RestrictedArms>,
    pub rng: ChaCha8Rng,
    /// Pull count at which the stopping rule is evaluated next.
    pub next_check: u64,
    pub last_alternative: Option<AlternativeSolution>,
    pub timings: PhaseTimings,
}

impl AlgorithmState {
    pub fn new(model: &ModelSet, query: &TopMQuery, config: &MislidConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let k = model.arms();
        if query.m >= k {
            return Err(Error::Parameter("m must be smaller than the number of arms".into()));
        }
        let remaining = init_sequence(&model.features)?.into();
        let restricted = config.restricted_arms.then(|| RestrictedArms {
            memory: VecDeque::new(),
            capacity: query.m + model.dim(),
            fresh: model.dim(),
        });
        Ok(Self {
            stats: SufficientStats::new(k, model.dim()),
            estimate: None,
            learner: LearnerState::new(config.learner, k),
            phase: Phase::Initializing { remaining },
            restricted,
            rng: stream(seed, Purpose::Algorithm, 0),
            next_check: 0,
            last_alternative: None,
            timings: PhaseTimings::default(),
        })
    }

    pub fn pulls(&self) -> u64 {
        self.stats.t as u64
    }

    pub fn answer(&self) -> Option<&[usize]> {
        match &self.phase {
            Phase::Stopped { answer } => Some(answer),
            _ => None,
        }
    }

    fn estimate(&self) -> Result<&ProjectedEstimate> {
        self.estimate.as_ref().ok_or_else(|| Error::Precondition("no estimate before initialization ends".into()))
    }

    fn reestimate(&mut self, model: &ModelSet) -> Result<()> {
        let started = Instant::now();
        let means = self.stats.empirical_means();
        self.estimate = Some(project_onto_model(&means, &self.stats.counts, model)?);
        self.timings.estimation += started.elapsed().as_secs_f64();
        Ok(())
    }

    /// Whether `inf_{λ ∈ Λ_m(μ̃)} ||μ̃ - λ||²_{D_N} > 2β_{t,δ}` for the current
    /// counts and estimate; the alternative set is never restricted here.
    pub fn stopping_statistic_exceeds(&self, query: &TopMQuery, model: &ModelSet, config: &MislidConfig) -> Result<bool> {
        let est = self.estimate()?;
        let answer = top_m_answer(&est.mu_tilde, query.m)?;
        let beta = stopping_threshold(self.stats.t, query, model, config.stopping.mode);
        exceeds_threshold(&est.mu_tilde, Some(&est.theta_tilde), &self.stats.counts, &answer, model, 2.0 * beta)
    }

    /// One round: a stopping check when due, otherwise one pull.
    pub fn step(&mut self, env: &mut GaussianEnv, query: &TopMQuery, model: &ModelSet, config: &MislidConfig) -> Result<()> {
        match &mut self.phase {
            Phase::Stopped { .. } => Err(Error::Precondition("run already stopped".into())),
            Phase::Initializing { remaining } => {
                let started = Instant::now();
                let arm = remaining.pop_front().expect("initialization sequence is never empty here");
                let done = remaining.is_empty();
                let reward = env.pull(arm);
                self.stats.record(&model.features, arm, reward);
                self.timings.init += started.elapsed().as_secs_f64();
                if done {
                    self.reestimate(model)?;
                    self.phase = Phase::Running;
                    self.next_check = self.pulls();
                }
                Ok(())
            }
            Phase::Running => {
                let n = self.pulls();
                if n >= self.next_check {
                    let started = Instant::now();
                    let stop = self.stopping_statistic_exceeds(query, model, config)?;
                    self.timings.stopping += started.elapsed().as_secs_f64();
                    if stop {
                        let answer = top_m_answer(&self.estimate()?.mu_tilde, query.m)?;
                        self.phase = Phase::Stopped { answer };
                        return Ok(());
                    }
                    self.next_check = (n + 1).max((config.stopping.gamma * n as f64).ceil() as u64);
                }
                self.sample_and_pull(env, query, model, config)
            }
        }
    }

    fn sample_and_pull(&mut self, env: &mut GaussianEnv, query: &TopMQuery, model: &ModelSet, config: &MislidConfig) -> Result<()> {
        let started = Instant::now();
        let est = self.estimate()?.clone();
        let omega = self.learner.propose();
        let answer = top_m_answer(&est.mu_tilde, query.m)?;
        let outsiders = match &self.restricted {
            Some(r) => Some(r.working_set(&answer, model.arms(), &mut self.rng)),
            None => None,
        };
        let alt = sampling_alternative(&est, omega.as_slice(), &answer, outsiders.as_deref(), model)?;
        let c = if config.gain_mode.uses_bonus() { bonuses(&self.stats, model)? } else { vec![0.0; model.arms()] };
        let gains = gain_vector(&est, &alt, &c, config.gain_mode);
        self.learner.update(&gains)?;
        if let Some(r) = &mut self.restricted {
            r.remember(alt.pair.i);
        }
        self.last_alternative = Some(alt);
        let arm = sample_arm(&omega, &mut self.rng);
        self.timings.sampling += started.elapsed().as_secs_f64();

        let reward = env.pull(arm);
        self.stats.record(&model.features, arm, reward);
        self.reestimate(model)
    }
}

/// Closest alternative under `D_ω`. A learner weight vector whose design is
/// singular (a corner, say) is mixed with a vanishing amount of uniform mass.
fn sampling_alternative(
    est: &ProjectedEstimate,
    omega: &[f64],
    answer: &[usize],
    outsiders: Option<&[usize]>,
    model: &ModelSet,
) -> Result<AlternativeSolution> {
    let solve = |w: &[f64]| closest_alternative_restricted(&est.mu_tilde, Some(&est.theta_tilde), w, answer, outsiders, model);
    match solve(omega) {
        Err(Error::Precondition(_)) => {
            let k = omega.len() as f64;
            let mixed: Vec<f64> = omega.iter().map(|w| (1.0 - 1e-6) * w + 1e-6 / k).collect();
            solve(&mixed)
        }
        other => other,
    }
}

/// Inverse-CDF draw from `ω`.
pub fn sample_arm(omega: &Weights, rng: &mut ChaCha8Rng) -> usize {
    let w = omega.as_slice();
    let u: f64 = rng.random::<f64>() * w.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &wk) in w.iter().enumerate() {
        if wk > 0.0 {
            acc += wk;
            last = k;
            if u < acc {
                return k;
            }
        }
    }
    last
}

/// Runs the algorithm until it stops or pulls `config.safety_cap` times.
pub fn run(instance: &Instance, query: &TopMQuery, model: &ModelSet, config: &MislidConfig, seed: u64) -> Result<RunResult> {
    let started = Instant::now();
    if instance.arms() != model.arms() {
        return Err(Error::Parameter("instance and model disagree on the number of arms".into()));
    }
    let mut env = GaussianEnv::new(instance.clone(), seed);
    let mut state = AlgorithmState::new(model, query, config, seed)?;
    while state.answer().is_none() && state.pulls() < config.safety_cap {
        state.step(&mut env, query, model, config)?;
    }
    let (answer, incomplete) = match state.answer() {
        Some(a) => (a.to_vec(), false),
        None => match &state.estimate {
            Some(e) => (top_m_answer(&e.mu_tilde, query.m)?, true),
            None => (Vec::new(), true),
        },
    };
    Ok(RunResult {
        algorithm: "mislid".into(),
        tau: state.pulls(),
        correct: !incomplete && is_correct_answer(&answer, &instance.mu, query.m),
        answer,
        seed,
        generator: GENERATOR.into(),
        incomplete,
        wall_time: started.elapsed().as_secs_f64(),
        timings: state.timings,
    })
}
