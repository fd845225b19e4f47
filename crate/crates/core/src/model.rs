//! Problem description: arm features, the realizable model set, instances,
//! queries, sufficient statistics and the simulated Gaussian environment.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{param, Error, Result};

/// Relative singular-value threshold used for rank decisions.
const RANK_TOL: f64 = 1e-10;

/// Arm features `A` (one row per arm) with the cached maximal row norm `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    arms: usize,
    dim: usize,
    /// Row-major copy for hot loops.
    data: Vec<f64>,
    matrix: DMatrix<f64>,
    max_norm: f64,
}

impl FeatureMatrix {
    /// Builds the matrix from its rows. Rows must have equal length `d`,
    /// `1 <= d <= K`, and span `R^d`.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let arms = rows.len();
        if arms == 0 {
            return param("feature matrix needs at least one arm");
        }
        let dim = rows[0].len();
        if dim == 0 || dim > arms {
            return param(format!("need 1 <= d <= K, got d={dim}, K={arms}"));
        }
        if rows.iter().any(|r| r.len() != dim) {
            return param("feature rows have inconsistent lengths");
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return param("feature entries must be finite");
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        let matrix = DMatrix::from_row_slice(arms, dim, &data);
        let rank = numerical_rank(&matrix);
        if rank < dim {
            return Err(Error::Rank { rank, dim });
        }
        let max_norm = (0..arms)
            .map(|k| data[k * dim..(k + 1) * dim].iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        Ok(Self { arms, dim, data, matrix, max_norm })
    }

    /// `K x K` identity features: the unstructured model.
    pub fn identity(arms: usize) -> Self {
        let rows = (0..arms)
            .map(|k| (0..arms).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(rows).expect("identity has full rank")
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `L = max_k ||phi_k||_2`.
    pub fn max_norm(&self) -> f64 {
        self.max_norm
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.arms).map(|k| self.row(k).to_vec()).collect()
    }

    /// `A theta`.
    pub fn apply(&self, theta: &[f64]) -> Vec<f64> {
        (0..self.arms).map(|k| dot(self.row(k), theta)).collect()
    }

    /// `sum_k w_k phi_k phi_k^T`.
    pub fn design(&self, weights: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        let mut v = DMatrix::zeros(d, d);
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let phi = self.row(k);
            for a in 0..d {
                let wa = w * phi[a];
                for b in a..d {
                    v[(a, b)] += wa * phi[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                v[(a, b)] = v[(b, a)];
            }
        }
        v
    }

    /// Rows permuted so that row `k` of the result is row `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Self::new(perm.iter().map(|&k| self.row(k).to_vec()).collect())
    }
}

pub(crate) fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * top).count()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The realizable family `{ A theta + eta : ||eta||_inf <= epsilon, ||.||_inf <= M }`.
#[derive(Debug, Clone)]
pub struct ModelSet {
    pub features: FeatureMatrix,
    pub epsilon: f64,
    pub mean_bound: f64,
    /// When false (the default) the `||mu||_inf <= M` constraint is dropped
    /// from projections and alternative computations.
    pub enforce_mean_bound: bool,
}

impl ModelSet {
    pub fn new(features: FeatureMatrix, epsilon: f64, mean_bound: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return param(format!("epsilon must be finite and >= 0, got {epsilon}"));
        }
        if !(mean_bound > 0.0) {
            return param(format!("mean bound must be > 0, got {mean_bound}"));
        }
        Ok(Self { features, epsilon, mean_bound, enforce_mean_bound: false })
    }

    pub fn with_mean_bound_enforced(mut self, enforce: bool) -> Self {
        self.enforce_mean_bound = enforce;
        self
    }

    /// Same features, different misspecification level.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Ok(Self::new(self.features.clone(), epsilon, self.mean_bound)?
            .with_mean_bound_enforced(self.enforce_mean_bound))
    }

    pub fn arms(&self) -> usize {
        self.features.arms()
    }

    pub fn dim(&self) -> usize {
        self.features.dim()
    }

    /// Membership test up to `tol` in the sup norm.
    pub fn contains(&self, nu: &[f64], tol: f64) -> Result<bool> {
        if nu.len() != self.arms() {
            return param("vector length does not match arm count");
        }
        if self.enforce_mean_bound && nu.iter().any(|v| v.abs() > self.mean_bound + tol) {
            return Ok(false);
        }
        let dist = crate::geometry::chebyshev_residual(&self.features, nu)?;
        Ok(dist <= self.epsilon + tol)
    }

    /// Checks a `(theta, eta)` witness: `nu = A theta + eta` and `||eta||_inf <= epsilon`.
    pub fn check_witness(&self, nu: &[f64], theta: &[f64], eta: &[f64], tol: f64) -> bool {
        if theta.len() != self.dim() || eta.len() != self.arms() || nu.len() != self.arms() {
            return false;
        }
        let lin = self.features.apply(theta);
        let scale = nu.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let decomposes = nu
            .iter()
            .zip(&lin)
            .zip(eta)
            .all(|((n, l), e)| (n - l - e).abs() <= tol * scale);
        decomposes && eta.iter().all(|e| e.abs() <= self.epsilon + tol)
    }
}

/// Ground-truth means with an optional `(theta, eta)` decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub mu: Vec<f64>,
    pub witness_theta: Option<Vec<f64>>,
    pub witness_eta: Option<Vec<f64>>,
}

impl Instance {
    pub fn new(mu: Vec<f64>) -> Self {
        Self { mu, witness_theta: None, witness_eta: None }
    }

    pub fn with_witness(mu: Vec<f64>, theta: Vec<f64>, eta: Vec<f64>) -> Self {
        Self { mu, witness_theta: Some(theta), witness_eta: Some(eta) }
    }

    pub fn arms(&self) -> usize {
        self.mu.len()
    }

    /// Validates the witness (if any) against the model set.
    pub fn validate(&self, model: &ModelSet) -> Result<()> {
        if self.mu.len() != model.arms() {
            return param("instance and model have different arm counts");
        }
        if let (Some(theta), Some(eta)) = (&self.witness_theta, &self.witness_eta) {
            if !model.check_witness(&self.mu, theta, eta, 1e-12) {
                return Err(Error::Precondition("witness does not decompose mu within epsilon".into()));
            }
        }
        Ok(())
    }
}

/// Top-m query with confidence `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopMQuery {
    pub m: usize,
    pub delta: f64,
}

impl TopMQuery {
    pub fn new(m: usize, delta: f64, arms: usize) -> Result<Self> {
        if m < 1 || m >= arms {
            return param(format!("need 1 <= m < K, got m={m}, K={arms}"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return param(format!("need 0 < delta < 1, got {delta}"));
        }
        Ok(Self { m, delta })
    }
}

/// A point of the simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return param("weights must be finite and non-negative");
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return param(format!("weights must sum to 1, got {total}"));
        }
        Ok(Self(w))
    }

    /// Normalizes non-negative masses onto the simplex.
    pub fn normalized(mut w: Vec<f64>) -> Result<Self> {
        let total: f64 = w.iter().sum();
        if !(total > 0.0) || w.iter().any(|x| *x < 0.0) {
            return param("cannot normalize: need non-negative masses with positive sum");
        }
        w.iter_mut().for_each(|x| *x /= total);
        Ok(Self(w))
    }

    pub fn uniform(k: usize) -> Self {
        Self(vec![1.0 / k as f64; k])
    }

    pub fn corner(k: usize, arm: usize) -> Self {
        let mut w = vec![0.0; k];
        w[arm] = 1.0;
        Self(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Pull counts, reward sums and the design matrix `V_t`.
///
/// Counts are reals so the same type holds fractional allocations.
#[derive(Debug, Clone)]
pub struct SufficientStats {
    pub counts: Vec<f64>,
    pub reward_sums: Vec<f64>,
    pub design: DMatrix<f64>,
    pub t: f64,
}

impl SufficientStats {
    pub fn new(arms: usize, dim: usize) -> Self {
        Self {
            counts: vec![0.0; arms],
            reward_sums: vec![0.0; arms],
            design: DMatrix::zeros(dim, dim),
            t: 0.0,
        }
    }

    /// Stats for a fixed allocation with given per-arm means (no noise).
    pub fn from_counts(features: &FeatureMatrix, counts: Vec<f64>, means: &[f64]) -> Result<Self> {
        if counts.len() != features.arms() || means.len() != features.arms() {
            return param("counts/means length mismatch");
        }
        if counts.iter().any(|c| !(*c >= 0.0)) {
            return param("counts must be non-negative");
        }
        let design = features.design(&counts);
        let reward_sums = counts.iter().zip(means).map(|(c, m)| c * m).collect();
        let t = counts.iter().sum();
        Ok(Self { counts, reward_sums, design, t })
    }

    pub fn record(&mut self, features: &FeatureMatrix, arm: usize, reward: f64) {
        self.counts[arm] += 1.0;
        self.reward_sums[arm] += reward;
        self.t += 1.0;
        let phi = features.row(arm);
        let d = phi.len();
        for a in 0..d {
            for b in 0..d {
                self.design[(a, b)] += phi[a] * phi[b];
            }
        }
    }

    /// Empirical mean of one arm, `None` if it was never pulled.
    pub fn mean(&self, arm: usize) -> Option<f64> {
        (self.counts[arm] > 0.0).then(|| self.reward_sums[arm] / self.counts[arm])
    }

    /// Empirical means with unpulled arms set to zero (they carry zero weight).
    pub fn empirical_means(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|k| self.mean(k).unwrap_or(0.0)).collect()
    }

    /// `sum_k N_k r_k phi_k`, i.e. `A^T D_N mu_hat`.
    pub fn feature_rewards(&self, features: &FeatureMatrix) -> DVector<f64> {
        let mut out = DVector::zeros(features.dim());
        for k in 0..features.arms() {
            if self.reward_sums[k] != 0.0 {
                for (o, p) in out.iter_mut().zip(features.row(k)) {
                    *o += self.reward_sums[k] * p;
                }
            }
        }
        out
    }
}

/// Index of the `m` largest entries, ties broken by lowest index; sorted ascending.
pub fn top_m_answer(nu: &[f64], m: usize) -> Result<Vec<usize>> {
    if m < 1 || m >= nu.len() {
        return param(format!("need 1 <= m < K, got m={m}, K={}", nu.len()));
    }
    if nu.iter().any(|v| v.is_nan()) {
        return param("NaN in mean vector");
    }
    let mut order = ranking(nu);
    order.truncate(m);
    order.sort_unstable();
    Ok(order)
}

/// Arms sorted by decreasing value, ties by increasing index.
pub(crate) fn ranking(nu: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..nu.len()).collect();
    order.sort_by(|&a, &b| nu[b].partial_cmp(&nu[a]).unwrap().then(a.cmp(&b)));
    order
}

/// Whether the `m`-th and `(m+1)`-th largest values coincide.
pub fn has_tie_at(nu: &[f64], m: usize) -> bool {
    let order = ranking(nu);
    nu[order[m - 1]] == nu[order[m]]
}

/// `S*(nu)`: every arm whose value is at least the `m`-th largest (may exceed `m` arms).
pub fn optimal_set(nu: &[f64], m: usize) -> Result<Vec<usize>> {
    if m < 1 || m > nu.len() {
        return param("m out of range");
    }
    let order = ranking(nu);
    let threshold = nu[order[m - 1]];
    Ok((0..nu.len()).filter(|&k| nu[k] >= threshold).collect())
}

/// Whether `answer` is a correct Top-m answer for means `mu`.
pub fn is_correct_answer(answer: &[usize], mu: &[f64], m: usize) -> bool {
    match optimal_set(mu, m) {
        Ok(best) => answer.len() == m && answer.iter().all(|a| best.contains(a)),
        Err(_) => false,
    }
}

/// `S_m(lambda) ∩ S_m(mu) = ∅`, tested through the pairwise characterization:
/// some arm outside `S*(mu)` strictly beats some arm inside it under `lambda`.
pub fn is_alternative(mu: &[f64], lambda: &[f64], m: usize) -> Result<bool> {
    if mu.len() != lambda.len() {
        return param("mu and lambda lengths differ");
    }
    let answer = top_m_answer(mu, m)?;
    if has_tie_at(mu, m) {
        return Err(Error::Precondition(format!("mu has a tie at position {m}")));
    }
    let inside_min = answer.iter().map(|&j| lambda[j]).fold(f64::INFINITY, f64::min);
    let outside_max = (0..mu.len())
        .filter(|k| !answer.contains(k))
        .map(|i| lambda[i])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(outside_max > inside_min)
}

/// One unit-variance Gaussian observation of `arm`.
pub fn sample_reward<R: Rng + ?Sized>(instance: &Instance, arm: usize, rng: &mut R) -> f64 {
    let noise: f64 = rng.sample(StandardNormal);
    instance.mu[arm] + noise
}

/// Simulated bandit with one independent reward stream per arm, so that the
/// `n`-th pull of an arm yields the same reward in paired runs.
#[derive(Debug, Clone)]
pub struct GaussianEnv {
    instance: Instance,
    streams: Vec<ChaCha8Rng>,
}

impl GaussianEnv {
    pub fn new(instance: Instance, seed: u64) -> Self {
        let streams = (0..instance.arms())
            .map(|k| crate::rng::stream(seed, crate::rng::Purpose::Reward, k as u64))
            .collect();
        Self { instance, streams }
    }

    pub fn pull(&mut self, arm: usize) -> f64 {
        sample_reward(&self.instance, arm, &mut self.streams[arm])
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }
}

/// On-disk instance description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(rename = "K")]
    pub arms: usize,
    pub d: usize,
    pub features: Vec<Vec<f64>>,
    pub epsilon: f64,
    pub mean_bound: f64,
    pub mu: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
}

impl InstanceFile {
    pub fn from_parts(instance: &Instance, model: &ModelSet) -> Self {
        Self {
            arms: model.arms(),
            d: model.dim(),
            features: model.features.rows(),
            epsilon: model.epsilon,
            mean_bound: model.mean_bound,
            mu: instance.mu.clone(),
            theta: instance.witness_theta.clone(),
            eta: instance.witness_eta.clone(),
        }
    }

    pub fn into_parts(self) -> Result<(Instance, ModelSet)> {
        if self.features.len() != self.arms || self.mu.len() != self.arms {
            return param("K does not match features/mu lengths");
        }
        if self.features.iter().any(|r| r.len() != self.d) {
            return param("d does not match feature row length");
        }
        let model = ModelSet::new(FeatureMatrix::new(self.features)?, self.epsilon, self.mean_bound)?;
        let instance = Instance { mu: self.mu, witness_theta: self.theta, witness_eta: self.eta };
        instance.validate(&model)?;
        Ok((instance, model))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
