//! Seeded Monte Carlo harness: instance generators, repeated runs and reports.

mod generators;
mod report;

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use generators::{gen_experiment_a, gen_experiment_b, gen_experiment_c, top_m_gap, Normalization, Problem};
pub use report::{emit_report, quantile, read_jsonl, summarize, write_csv, write_jsonl, ReportFormat, Summary};

use crate::baselines::{lucb_run, BaselineConfig};
use crate::error::{Error, Result};
use crate::mislid::{self, MislidConfig, PhaseTimings, RunResult};
use crate::model::{InstanceFile, TopMQuery};
use crate::rng::{derive, Purpose, GENERATOR};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorSpec {
    ExpA {
        epsilon: f64,
        #[serde(default)]
        gap_band: Option<[f64; 2]>,
        #[serde(default)]
        normalization: Normalization,
    },
    ExpB {
        epsilon_user: f64,
        #[serde(default = "unit")]
        epsilon_star: f64,
        #[serde(default)]
        gap_band: Option<[f64; 2]>,
        #[serde(default)]
        normalization: Normalization,
    },
    ExpC {
        #[serde(default)]
        gap_band: Option<[f64; 2]>,
        #[serde(default)]
        normalization: Normalization,
    },
    /// An instance file; relative paths resolve against the working directory.
    Custom { path: PathBuf, m: usize },
}

fn unit() -> f64 {
    1.0
}

impl GeneratorSpec {
    /// Builds the problem; the instance depends on `seed` only.
    pub fn generate(&self, seed: u64, delta: f64) -> Result<Problem> {
        let mut p = match self {
            GeneratorSpec::ExpA { epsilon, gap_band, normalization } => {
                gen_experiment_a(seed, *epsilon, *gap_band, *normalization)?
            }
            GeneratorSpec::ExpB { epsilon_user, epsilon_star, gap_band, normalization } => {
                gen_experiment_b(seed, *epsilon_user, *epsilon_star, *gap_band, *normalization)?
            }
            GeneratorSpec::ExpC { gap_band, normalization } => gen_experiment_c(seed, *gap_band, *normalization)?,
            GeneratorSpec::Custom { path, m } => {
                let (instance, model) = InstanceFile::load(path)?.into_parts()?;
                let query = TopMQuery::new(*m, delta, model.arms())?;
                Problem { instance, model, query }
            }
        };
        p.query = TopMQuery::new(p.query.m, delta, p.model.arms())?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum AlgorithmConfig {
    Mislid(MislidConfig),
    Lucb(BaselineConfig),
    Lingape(BaselineConfig),
}

impl AlgorithmConfig {
    pub fn tag(&self) -> &'static str {
        match self {
            AlgorithmConfig::Mislid(_) => "mislid",
            AlgorithmConfig::Lucb(_) => "lucb",
            AlgorithmConfig::Lingape(_) => "lingape",
        }
    }

    pub fn run(&self, problem: &Problem, seed: u64) -> Result<RunResult> {
        let Problem { instance, model, query } = problem;
        match self {
            AlgorithmConfig::Mislid(c) => mislid::run(instance, query, model, c, seed),
            AlgorithmConfig::Lucb(c) => lucb_run(instance, query, c, seed),
            #[cfg(feature = "lingape")]
            AlgorithmConfig::Lingape(c) => crate::baselines::lingape_run(instance, &model.features, query, c, seed),
            #[cfg(not(feature = "lingape"))]
            AlgorithmConfig::Lingape(_) => Err(Error::Parameter("built without the lingape feature".into())),
        }
    }
}

/// An algorithm entry of an experiment, with an optional display name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedAlgorithm {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub config: AlgorithmConfig,
}

impl NamedAlgorithm {
    pub fn new(name: &str, config: AlgorithmConfig) -> Self {
        Self { name: Some(name.into()), config }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.config.tag().into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub generator: GeneratorSpec,
    pub algorithms: Vec<NamedAlgorithm>,
    pub repetitions: u64,
    /// Base seed: fixes the instance and, through derivation, every run.
    pub seed: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_delta() -> f64 {
    0.05
}

impl ExperimentSpec {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Parameter("repetitions must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Parameter("no algorithms".into()));
        }
        Ok(())
    }
}

/// Seed of repetition `rep`. All algorithms of an experiment share it, so the
/// comparison is paired on reward noise.
pub fn repetition_seed(base: u64, rep: u64) -> u64 {
    derive(base, Purpose::Repetition, rep)
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub algorithm_index: usize,
    pub repetition: u64,
    pub instance_seed: u64,
    #[serde(flatten)]
    pub result: RunResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Runs every algorithm `repetitions` times on the instance fixed by
/// `spec.seed`. Failed runs are recorded with their error and flagged
/// incomplete. Records come back sorted by `(repetition, algorithm_index)`.
pub fn run_monte_carlo(spec: &ExperimentSpec, jobs: usize) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let problem = spec.generator.generate(spec.seed, spec.delta)?;
    let tasks: Vec<(u64, usize)> =
        (0..spec.repetitions).flat_map(|r| (0..spec.algorithms.len()).map(move |a| (r, a))).collect();
    let execute = |&(rep, idx): &(u64, usize)| {
        let alg = &spec.algorithms[idx];
        let seed = repetition_seed(spec.seed, rep);
        let started = Instant::now();
        let (result, error) = match alg.config.run(&problem, seed) {
            Ok(r) => (r, None),
            Err(e) => (
                RunResult {
                    algorithm: alg.config.tag().into(),
                    tau: 0,
                    answer: Vec::new(),
                    correct: false,
                    seed,
                    generator: GENERATOR.into(),
                    incomplete: true,
                    wall_time: started.elapsed().as_secs_f64(),
                    timings: PhaseTimings::default(),
                },
                Some(e.to_string()),
            ),
        };
        RunRecord { label: alg.label(), algorithm_index: idx, repetition: rep, instance_seed: spec.seed, result, error }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    let mut records: Vec<RunRecord> = pool.install(|| tasks.par_iter().map(execute).collect());
    records.sort_by_key(|r| (r.repetition, r.algorithm_index));
    Ok(records)
}
