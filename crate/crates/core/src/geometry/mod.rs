//! Orthogonal parametrization, projection onto the model set and closest
//! alternatives over the half-spaces `{λ : λ_i >= λ_j}`.

mod alternative;
mod orthogonal;
mod projection;
pub mod reference;

pub use alternative::{
    closest_alternative, closest_alternative_halfspace, closest_alternative_restricted, closest_alternative_with_witness, exceeds_threshold, pair_lower_bound,
    AlternativeSolution, HalfSpacePair, KktCase,
};
pub use orthogonal::{orthogonal_decompose, residual_projector, OrthogonalParam};
pub use projection::{project_onto_model, ProjectedEstimate};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{param, Error, Result};
use crate::model::{FeatureMatrix, ModelSet};
use crate::numeric::{cholesky, solve_qp, InequalityQp};

/// Interior-point accuracy for projections and alternatives.
pub(crate) const QP_TOL: f64 = 1e-11;

/// `Σ_k w_k (a_k - b_k)²`.
pub fn weighted_sq_distance(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), w)| w * (x - y) * (x - y)).sum()
}

/// `min_θ ||ν - Aθ||_∞`, the smallest ε for which `ν` is realizable.
pub fn chebyshev_residual(features: &FeatureMatrix, nu: &[f64]) -> Result<f64> {
    chebyshev_fit(features, nu).map(|(_, r)| r)
}

/// Minimizer and value of `||ν - Aθ||_∞`.
pub fn chebyshev_fit(features: &FeatureMatrix, nu: &[f64]) -> Result<(Vec<f64>, f64)> {
    let (k, d) = (features.arms(), features.dim());
    if nu.len() != k {
        return param("vector length does not match arm count");
    }
    // variables (θ, r): minimize r subject to ±(ν_k - a_k θ) <= r
    let mut g = DMatrix::zeros(2 * k, d + 1);
    let mut h = DVector::zeros(2 * k);
    for a in 0..k {
        for (c, v) in features.row(a).iter().enumerate() {
            g[(2 * a, c)] = *v;
            g[(2 * a + 1, c)] = -v;
        }
        g[(2 * a, d)] = -1.0;
        g[(2 * a + 1, d)] = -1.0;
        h[2 * a] = nu[a];
        h[2 * a + 1] = -nu[a];
    }
    let mut linear = DVector::zeros(d + 1);
    linear[d] = 1.0;
    let qp = InequalityQp { hessian: DMatrix::zeros(d + 1, d + 1), linear, constraints: g, rhs: h };
    let sol = solve_qp(&qp, 1e-12)?;
    // report the exact residual of the returned θ
    let theta: Vec<f64> = sol.x.iter().take(d).copied().collect();
    let fit = features.apply(&theta);
    let r = nu.iter().zip(&fit).map(|(n, f)| (n - f).abs()).fold(0.0, f64::max);
    Ok((theta, r))
}

pub(crate) fn singular_design(e: Error) -> Error {
    match e {
        Error::Singular(p) => Error::Precondition(format!("singular design matrix (pivot {p:e})")),
        other => other,
    }
}

/// Weighted design `V_w` (for weights normalized to unit mass) with its factor.
pub(crate) struct WeightedDesign {
    /// Weights divided by their total.
    pub w: Vec<f64>,
    pub total: f64,
    pub chol: Cholesky<f64, Dyn>,
}

impl WeightedDesign {
    pub fn new(features: &FeatureMatrix, weights: &[f64]) -> Result<Self> {
        if weights.len() != features.arms() {
            return param("weight vector length does not match arm count");
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return param("weights must be finite and non-negative");
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Precondition("all weights are zero".into()));
        }
        let w: Vec<f64> = weights.iter().map(|x| x / total).collect();
        let chol = cholesky(&features.design(&w)).map_err(singular_design)?;
        Ok(Self { w, total, chol })
    }

    /// Weighted least squares `argmin_θ Σ w_k (a_k θ - ν_k)²`.
    pub fn wls(&self, features: &FeatureMatrix, nu: &[f64]) -> DVector<f64> {
        let mut rhs = DVector::zeros(features.dim());
        for (k, wk) in self.w.iter().enumerate() {
            if *wk > 0.0 {
                for (r, p) in rhs.iter_mut().zip(features.row(k)) {
                    *r += wk * nu[k] * p;
                }
            }
        }
        self.chol.solve(&rhs)
    }

    /// `||x||²_{V_w⁻¹}` with `V_w` for the original (unnormalized) weights.
    pub fn inv_norm_sq(&self, x: &DVector<f64>) -> f64 {
        x.dot(&self.chol.solve(x)) / self.total
    }
}

/// Layout of the joint `(θ, η)` program: `η` variables exist only when `ε > 0`.
pub(crate) struct JointQp {
    pub qp: InequalityQp,
    pub dim: usize,
    pub has_eta: bool,
}

impl JointQp {
    /// `min ½ Σ w_k (a_k θ + η_k - ν_k)²` over `|η| <= ε` (and `|Aθ + η| <= M`
    /// in strict mode), plus `λ_j - λ_i <= 0` when `pair` is given.
    pub fn build(model: &ModelSet, nu: &[f64], w: &[f64], pair: Option<(usize, usize)>) -> Self {
        let f = &model.features;
        let (k, d) = (f.arms(), f.dim());
        let has_eta = model.epsilon > 0.0;
        let n = if has_eta { d + k } else { d };
        let mut hess = DMatrix::zeros(n, n);
        let mut lin = DVector::zeros(n);
        for a in 0..k {
            let wa = w[a];
            if wa == 0.0 {
                continue;
            }
            let phi = f.row(a);
            for r in 0..d {
                for c in 0..d {
                    hess[(r, c)] += wa * phi[r] * phi[c];
                }
                lin[r] -= wa * nu[a] * phi[r];
            }
            if has_eta {
                let e = d + a;
                hess[(e, e)] += wa;
                for r in 0..d {
                    hess[(r, e)] += wa * phi[r];
                    hess[(e, r)] += wa * phi[r];
                }
                lin[e] -= wa * nu[a];
            }
        }
        let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
        if has_eta {
            for a in 0..k {
                rows.push((vec![(d + a, 1.0)], model.epsilon));
                rows.push((vec![(d + a, -1.0)], model.epsilon));
            }
        }
        let lam_row = |a: usize, sign: f64| -> Vec<(usize, f64)> {
            let mut r: Vec<(usize, f64)> = f.row(a).iter().enumerate().map(|(c, v)| (c, sign * v)).collect();
            if has_eta {
                r.push((d + a, sign));
            }
            r
        };
        if model.enforce_mean_bound {
            for a in 0..k {
                rows.push((lam_row(a, 1.0), model.mean_bound));
                rows.push((lam_row(a, -1.0), model.mean_bound));
            }
        }
        if let Some((i, j)) = pair {
            let mut r = lam_row(j, 1.0);
            r.extend(lam_row(i, -1.0));
            rows.push((r, 0.0));
        }
        let mut g = DMatrix::zeros(rows.len(), n);
        let mut h = DVector::zeros(rows.len());
        for (r, (entries, rhs)) in rows.into_iter().enumerate() {
            for (c, v) in entries {
                g[(r, c)] += v;
            }
            h[r] = rhs;
        }
        Self { qp: InequalityQp { hessian: hess, linear: lin, constraints: g, rhs: h }, dim: d, has_eta }
    }

    /// Solves and returns `(θ, η, λ)`; `η` is clamped into the box.
    pub fn solve(&self, model: &ModelSet) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let sol = solve_qp(&self.qp, QP_TOL)?;
        let d = self.dim;
        let theta: Vec<f64> = sol.x.iter().take(d).copied().collect();
        let k = model.arms();
        let eta: Vec<f64> = if self.has_eta {
            sol.x.iter().skip(d).map(|e| e.clamp(-model.epsilon, model.epsilon)).collect()
        } else {
            vec![0.0; k]
        };
        Ok(Self::assemble(model, theta, eta))
    }

    fn assemble(model: &ModelSet, theta: Vec<f64>, eta: Vec<f64>) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let lambda: Vec<f64> = model.features.apply(&theta).iter().zip(&eta).map(|(l, e)| l + e).collect();
        (theta, eta, lambda)
    }
}
