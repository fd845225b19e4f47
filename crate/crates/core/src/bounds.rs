//! Characteristic constant `H_μ = sup_ω min_{(i,j)} inf_{λ ∈ M, λ_i >= λ_j} ½ Σ_k ω_k (μ_k - λ_k)²`
//! and the resulting sample-complexity floor.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::geometry::{chebyshev_fit, closest_alternative_with_witness};
use crate::model::{has_tie_at, top_m_answer, FeatureMatrix, Instance, ModelSet, Weights};
use crate::numeric::{solve_qp, InequalityQp};

/// Mass moved to the uniform distribution before evaluating the inner
/// minimum, so that the weighted design stays invertible on the boundary.
const INTERIOR_MIX: f64 = 1e-7;
/// Fraction of the current gap at which the level set is placed.
const LEVEL: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleResult {
    /// Best certified lower estimate of `H_μ` (value at `omega_star`).
    pub h_mu: f64,
    pub omega_star: Weights,
    /// Upper estimate minus `h_mu`.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Inner value `min_pairs inf_λ ½ Σ ω_k (μ_k - λ_k)²` together with the
/// supergradient `½ (μ_k - λ*_k)²`.
pub(crate) struct InnerOracle<'a> {
    mu: &'a [f64],
    model: &'a ModelSet,
    answer: Vec<usize>,
    witness: Option<Vec<f64>>,
}

impl<'a> InnerOracle<'a> {
    pub fn new(instance: &'a Instance, model: &'a ModelSet, m: usize) -> Result<Self> {
        let mu = &instance.mu;
        if mu.len() != model.arms() {
            return param("instance and model have different arm counts");
        }
        let answer = top_m_answer(mu, m)?;
        let witness = match &instance.witness_theta {
            Some(t) if t.len() == model.dim() => Some(t.clone()),
            _ => {
                let (theta, r) = chebyshev_fit(&model.features, mu)?;
                (r <= model.epsilon).then_some(theta)
            }
        };
        Ok(Self { mu, model, answer, witness })
    }

    pub fn evaluate(&self, omega: &[f64]) -> Result<(f64, Vec<f64>)> {
        let k = omega.len();
        let w: Vec<f64> = omega.iter().map(|x| (1.0 - INTERIOR_MIX) * x + INTERIOR_MIX / k as f64).collect();
        let alt = closest_alternative_with_witness(self.mu, self.witness.as_deref(), &w, &self.answer, self.model)?;
        let grad = self.mu.iter().zip(&alt.lambda).map(|(a, b)| 0.5 * (a - b) * (a - b)).collect();
        Ok((0.5 * alt.value, grad))
    }
}

/// Bundle of supergradient cuts `F(ω) <= g_s · ω`.
struct Cuts {
    k: usize,
    grads: Vec<Vec<f64>>,
}

impl Cuts {
    /// Rows in reduced coordinates `x = ω_{1..K-1}` (with `ω_K = 1 - Σx`) plus `z`.
    fn simplex_rows(&self, with_z: bool) -> (Vec<Vec<f64>>, Vec<f64>) {
        let n = self.k - 1 + usize::from(with_z);
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for c in 0..self.k - 1 {
            let mut r = vec![0.0; n];
            r[c] = -1.0;
            rows.push(r);
            rhs.push(0.0);
        }
        let mut r = vec![0.0; n];
        r[..self.k - 1].iter_mut().for_each(|v| *v = 1.0);
        rows.push(r);
        rhs.push(1.0);
        (rows, rhs)
    }

    /// `g·ω = g_K + Σ_{c<K} (g_c - g_K) x_c`.
    fn reduced(&self, g: &[f64]) -> (Vec<f64>, f64) {
        let last = g[self.k - 1];
        (g[..self.k - 1].iter().map(|v| v - last).collect(), last)
    }

    fn to_qp(rows: Vec<Vec<f64>>, rhs: Vec<f64>, hessian: DMatrix<f64>, linear: DVector<f64>) -> InequalityQp {
        let n = linear.len();
        let g = DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
        InequalityQp { hessian, linear, constraints: g, rhs: DVector::from_vec(rhs) }
    }

    fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut w: Vec<f64> = x[..self.k - 1].iter().map(|v| v.max(0.0)).collect();
        w.push((1.0 - w.iter().sum::<f64>()).max(0.0));
        let total: f64 = w.iter().sum();
        w.iter().map(|v| v / total).collect()
    }

    /// `max_ω min_s g_s · ω` and its maximizer.
    fn upper(&self) -> Result<(f64, Vec<f64>)> {
        let n = self.k;
        let (mut rows, mut rhs) = self.simplex_rows(true);
        for g in &self.grads {
            let (coef, last) = self.reduced(g);
            let mut r: Vec<f64> = coef.iter().map(|v| -v).collect();
            r.push(1.0);
            rows.push(r);
            rhs.push(last);
        }
        let mut linear = DVector::zeros(n);
        linear[n - 1] = -1.0;
        let qp = Self::to_qp(rows, rhs, DMatrix::zeros(n, n), linear);
        let sol = solve_qp(&qp, 1e-12)?;
        let omega = self.expand(sol.x.as_slice());
        let value = self.grads.iter().map(|g| dot(g, &omega)).fold(f64::INFINITY, f64::min);
        Ok((value, omega))
    }

    /// Euclidean projection of `center` onto `{ω : g_s·ω >= level ∀s}`.
    fn project_to_level(&self, center: &[f64], level: f64) -> Result<Vec<f64>> {
        let n = self.k - 1;
        let (mut rows, mut rhs) = self.simplex_rows(false);
        for g in &self.grads {
            let (coef, last) = self.reduced(g);
            rows.push(coef.iter().map(|v| -v).collect());
            rhs.push(last - level);
        }
        let hessian = (DMatrix::identity(n, n) + DMatrix::from_element(n, n, 1.0)) * 2.0;
        let c = 1.0 - center[n];
        let linear = DVector::from_fn(n, |r, _| -2.0 * (center[r] + c));
        let sol = solve_qp(&Self::to_qp(rows, rhs, hessian, linear), 1e-12)?;
        Ok(self.expand(sol.x.as_slice()))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `H_μ` by a level-bundle method on the concave map `ω -> F(ω)`.
///
/// Every evaluated `ω` yields a lower bound `F(ω)` and a cut
/// `F(ω') <= g·ω'`; the cutting-plane model maximum is an upper bound.
/// Stops when the two are within `tol`.
pub fn characteristic_value(
    instance: &Instance,
    model: &ModelSet,
    m: usize,
    tol: f64,
    max_iter: usize,
) -> Result<SaddleResult> {
    let k = model.arms();
    if !(tol > 0.0) {
        return param("tolerance must be positive");
    }
    top_m_answer(&instance.mu, m)?;
    if has_tie_at(&instance.mu, m) {
        // a tied candidate answer sits on the boundary of the alternative set
        return Ok(SaddleResult { h_mu: 0.0, omega_star: Weights::uniform(k), gap: 0.0, iterations: 0, converged: true });
    }
    let oracle = InnerOracle::new(instance, model, m)?;
    let mut cuts = Cuts { k, grads: Vec::new() };
    let mut best_omega = vec![1.0 / k as f64; k];
    let mut best = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut omega = best_omega.clone();
    let mut iterations = 0;

    for it in 0..max_iter.max(1) {
        iterations = it + 1;
        let (value, grad) = oracle.evaluate(&omega)?;
        if value > best {
            best = value;
            best_omega = omega.clone();
        }
        cuts.grads.push(grad);
        if k == 1 {
            break;
        }
        let (model_max, argmax) = cuts.upper()?;
        upper = upper.min(model_max);
        if upper - best <= tol {
            break;
        }
        let level = best + LEVEL * (upper - best);
        omega = match cuts.project_to_level(&best_omega, level) {
            Ok(w) => w,
            Err(_) => argmax,
        };
    }
    let gap = (upper - best).max(0.0);
    Ok(SaddleResult {
        h_mu: best.max(0.0),
        omega_star: Weights::normalized(best_omega)?,
        gap,
        iterations,
        converged: gap <= tol,
    })
}

/// `H_μ` of the unstructured model: identity features and a deviation bound
/// above the spread of the means.
pub fn unstructured_characteristic_value(
    instance: &Instance,
    m: usize,
    tol: f64,
    max_iter: usize,
) -> Result<SaddleResult> {
    let mu = &instance.mu;
    let range = mu.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - mu.iter().cloned().fold(f64::INFINITY, f64::min);
    let bound = mu.iter().fold(1.0_f64, |a, v| a.max(v.abs())) * 2.0;
    let model = ModelSet::new(FeatureMatrix::identity(mu.len()), range + 1.0, bound)?;
    characteristic_value(&Instance::new(mu.clone()), &model, m, tol, max_iter)
}

/// `log(1/(2.4δ)) / H_μ`, infinite when `H_μ = 0`.
pub fn sample_complexity_floor(h_mu: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 0.5) {
        return param(format!("need 0 < delta <= 1/2, got {delta}"));
    }
    if !(h_mu >= 0.0) {
        return param("h_mu must be non-negative");
    }
    if h_mu == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((1.0 / (2.4 * delta)).ln() / h_mu)
}
