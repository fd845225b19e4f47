use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{has_tie_at, top_m_answer, FeatureMatrix, Instance, ModelSet, TopMQuery};
use crate::rng::{stream, Purpose};

// Narrow gap bands can reject most draws; a draw costs microseconds.
const MAX_TRIES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divide `A` by its largest absolute entry.
    #[default]
    WholeMatrix,
    /// Divide each row by its own largest absolute entry.
    PerRow,
}

/// A generated problem: ground truth, the model set handed to the learner and the query.
#[derive(Debug, Clone)]
pub struct Problem {
    pub instance: Instance,
    pub model: ModelSet,
    pub query: TopMQuery,
}

/// Gap `Δ` between the m-th and (m+1)-th largest values.
pub fn top_m_gap(nu: &[f64], m: usize) -> f64 {
    let mut s = nu.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    s[m - 1] - s[m]
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn scale_to_sup(v: &mut [f64], target: f64) {
    let sup = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    v.iter_mut().for_each(|x| *x *= target / sup);
}

fn random_features(rng: &mut ChaCha8Rng, k: usize, d: usize, norm: Normalization) -> Option<FeatureMatrix> {
    let mut rows: Vec<Vec<f64>> = (0..k).map(|_| gaussian(rng, d)).collect();
    match norm {
        Normalization::WholeMatrix => {
            let sup = rows.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
            rows.iter_mut().flatten().for_each(|x| *x /= sup);
        }
        Normalization::PerRow => rows.iter_mut().for_each(|r| scale_to_sup(r, 1.0)),
    }
    FeatureMatrix::new(rows).ok()
}

fn in_band(gap: f64, band: Option<[f64; 2]>) -> bool {
    band.is_none_or(|[lo, hi]| lo <= gap && gap <= hi)
}

/// Bound on `|μ|` for sup-normalized `A` and `θ`.
fn mean_bound(d: usize, eps: f64) -> f64 {
    d as f64 + eps
}

/// Linear instance with sup-normalized `θ` and `A`; the fourth-best arm of
/// `Aθ` is shifted up by `ε`. `gap_band` filters on the gap of `Aθ`.
pub fn gen_experiment_a(seed: u64, epsilon: f64, gap_band: Option<[f64; 2]>, norm: Normalization) -> Result<Problem> {
    if !(epsilon >= 0.0) {
        return Err(Error::Parameter("epsilon must be non-negative".into()));
    }
    let (k, d, m) = (10, 5, 3);
    let mut rng = stream(seed, Purpose::Instance, 0);
    for _ in 0..MAX_TRIES {
        let Some(f) = random_features(&mut rng, k, d, norm) else { continue };
        let mut theta = gaussian(&mut rng, d);
        scale_to_sup(&mut theta, 1.0);
        let lin = f.apply(&theta);
        if has_tie_at(&lin, m) || !in_band(top_m_gap(&lin, m), gap_band) {
            continue;
        }
        let fourth = top_m_answer(&lin, 4)?[3];
        let mut eta = vec![0.0; k];
        eta[fourth] = epsilon;
        let mu: Vec<f64> = lin.iter().zip(&eta).map(|(l, e)| l + e).collect();
        if has_tie_at(&mu, m) {
            continue;
        }
        let model = ModelSet::new(f, epsilon, mean_bound(d, epsilon))?;
        return Ok(Problem {
            instance: Instance::with_witness(mu, theta, eta),
            model,
            query: TopMQuery::new(m, 0.05, k)?,
        });
    }
    Err(Error::Numeric(format!("no admissible instance after {MAX_TRIES} draws")))
}

/// Random `θ`, `A`, `η` with `||η||_∞ = ε*`; the model set uses the user's `ε`.
pub fn gen_experiment_b(
    seed: u64,
    epsilon_user: f64,
    epsilon_star: f64,
    gap_band: Option<[f64; 2]>,
    norm: Normalization,
) -> Result<Problem> {
    if !(epsilon_star > 0.0) || !(epsilon_user >= 0.0) {
        return Err(Error::Parameter("need epsilon_star > 0 and epsilon_user >= 0".into()));
    }
    let (k, d, m) = (15, 8, 3);
    let mut rng = stream(seed, Purpose::Instance, 1);
    for _ in 0..MAX_TRIES {
        let Some(f) = random_features(&mut rng, k, d, norm) else { continue };
        let mut theta = gaussian(&mut rng, d);
        scale_to_sup(&mut theta, 1.0);
        let mut eta = gaussian(&mut rng, k);
        scale_to_sup(&mut eta, epsilon_star);
        let mu: Vec<f64> = f.apply(&theta).iter().zip(&eta).map(|(l, e)| l + e).collect();
        if has_tie_at(&mu, m) || !in_band(top_m_gap(&mu, m), gap_band) {
            continue;
        }
        let model = ModelSet::new(f, epsilon_user, mean_bound(d, epsilon_user.max(epsilon_star)))?;
        return Ok(Problem {
            instance: Instance::with_witness(mu, theta, eta),
            model,
            query: TopMQuery::new(m, 0.05, k)?,
        });
    }
    Err(Error::Numeric(format!("no admissible instance after {MAX_TRIES} draws")))
}

/// The comparison-of-gains setting: the second generator with `ε = ε* = 1`.
pub fn gen_experiment_c(seed: u64, gap_band: Option<[f64; 2]>, norm: Normalization) -> Result<Problem> {
    gen_experiment_b(seed, 1.0, 1.0, gap_band, norm)
}
