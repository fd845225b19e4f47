//! Fixed-confidence Top-m arm identification in misspecified linear bandits.
//!
//! Means follow `μ = Aθ + η` with known features `A` and an unknown deviation
//! `||η||_∞ <= ε`. The crate provides the sampling algorithm ([`mislid`]), the
//! characteristic-time lower bound ([`bounds`]), LUCB and LinGapE baselines
//! ([`baselines`]) and a seeded Monte Carlo harness ([`bench`]).

pub mod baselines;
pub mod bench;
pub mod bounds;
pub mod error;
pub mod geometry;
pub mod learner;
pub mod mislid;
pub mod model;
pub mod numeric;
pub mod rng;

pub use error::{Error, Result};
pub use model::{
    is_alternative, is_correct_answer, optimal_set, sample_reward, top_m_answer, FeatureMatrix, GaussianEnv,
    Instance, InstanceFile, ModelSet, SufficientStats, TopMQuery, Weights,
};
