use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{JointQp, WeightedDesign};
use crate::error::{param, Result};
use crate::model::ModelSet;

/// `μ̃ = Aθ̃ + η̃`, the `D_N`-weighted projection of the empirical means onto the model set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedEstimate {
    pub mu_tilde: Vec<f64>,
    pub theta_tilde: Vec<f64>,
    pub eta_tilde: Vec<f64>,
}

/// `argmin_{λ ∈ M} Σ_k w_k (λ_k - μ̂_k)²`.
///
/// Arms with zero weight do not influence the fit; they get `η = 0` so that
/// their projected mean is the linear prediction. `V_w` must be invertible.
pub fn project_onto_model(mu_hat: &[f64], weights: &[f64], model: &ModelSet) -> Result<ProjectedEstimate> {
    let f = &model.features;
    if mu_hat.len() != f.arms() {
        return param("mean vector length does not match arm count");
    }
    let design = WeightedDesign::new(f, weights)?;
    let theta0: Vec<f64> = design.wls(f, mu_hat).iter().copied().collect();
    let fit = f.apply(&theta0);

    if model.epsilon == 0.0 && !model.enforce_mean_bound {
        return Ok(ProjectedEstimate { mu_tilde: fit, theta_tilde: theta0, eta_tilde: vec![0.0; f.arms()] });
    }
    let fits_box = (0..f.arms()).all(|k| design.w[k] == 0.0 || (mu_hat[k] - fit[k]).abs() <= model.epsilon);
    if fits_box {
        let eta: Vec<f64> = (0..f.arms())
            .map(|k| if design.w[k] > 0.0 { mu_hat[k] - fit[k] } else { 0.0 })
            .collect();
        let mu_tilde: Vec<f64> =
            (0..f.arms()).map(|k| if design.w[k] > 0.0 { mu_hat[k] } else { fit[k] }).collect();
        if !model.enforce_mean_bound || mu_tilde.iter().all(|m| m.abs() <= model.mean_bound) {
            return Ok(ProjectedEstimate { mu_tilde, theta_tilde: theta0, eta_tilde: eta });
        }
    }

    let newton = if model.enforce_mean_bound { None } else { active_set_newton(mu_hat, &design.w, model, theta0) };
    let (theta, mut eta) = match newton {
        Some(theta) => (theta, vec![0.0; f.arms()]),
        None => {
            let joint = JointQp::build(model, mu_hat, &design.w, None);
            let (mut theta, eta, _) = joint.solve(model)?;
            if !model.enforce_mean_bound {
                if let Some(exact) = active_set_newton(mu_hat, &design.w, model, theta.clone()) {
                    theta = exact;
                }
            }
            (theta, eta)
        }
    };
    if !model.enforce_mean_bound {
        // for fixed θ the best deviation is the clipped residual
        let lin = f.apply(&theta);
        for k in 0..f.arms() {
            eta[k] = (mu_hat[k] - lin[k]).clamp(-model.epsilon, model.epsilon);
        }
    }
    if !model.enforce_mean_bound {
        for k in 0..f.arms() {
            if design.w[k] == 0.0 {
                eta[k] = 0.0;
            }
        }
    }
    let lin = f.apply(&theta);
    let mu_tilde = lin.iter().zip(&eta).map(|(l, e)| l + e).collect();
    Ok(ProjectedEstimate { mu_tilde, theta_tilde: theta, eta_tilde: eta })
}

const NEWTON_ITERS: usize = 50;

/// `Σ_k w_k (|μ̂_k - a_k θ| - ε)₊²`: the projection objective with `η` clipped out.
fn clipped_objective(mu_hat: &[f64], w: &[f64], model: &ModelSet, theta: &[f64]) -> f64 {
    let lin = model.features.apply(theta);
    (0..lin.len()).map(|k| w[k] * ((mu_hat[k] - lin[k]).abs() - model.epsilon).max(0.0).powi(2)).sum()
}

/// Minimizes the clipped objective, which is convex and piecewise quadratic:
/// Newton steps on the current piece with a backtracking line search. A point
/// whose piece has it as stationary point is a global minimizer.
fn active_set_newton(mu_hat: &[f64], w: &[f64], model: &ModelSet, mut theta: Vec<f64>) -> Option<Vec<f64>> {
    let f = &model.features;
    let eps = model.epsilon;
    let slack = 1e-9 * (1.0 + eps);
    let mut value = clipped_objective(mu_hat, w, model, &theta);
    for _ in 0..NEWTON_ITERS {
        let lin = f.apply(&theta);
        let bound: Vec<(usize, f64)> = (0..f.arms())
            .filter_map(|k| {
                let r = mu_hat[k] - lin[k];
                (w[k] > 0.0 && r.abs() > eps).then_some((k, r.signum()))
            })
            .collect();
        if bound.is_empty() {
            return Some(theta);
        }
        let rows = DMatrix::from_fn(bound.len(), f.dim(), |r, c| w[bound[r].0].sqrt() * f.row(bound[r].0)[c]);
        let rhs = DVector::from_fn(bound.len(), |r, _| {
            let (k, s) = bound[r];
            w[k].sqrt() * (mu_hat[k] - s * eps - lin[k])
        });
        let step = rows.svd(true, true).solve(&rhs, 1e-12).ok()?;
        let full: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
        let fit = f.apply(&full);
        let same_piece = (0..f.arms()).all(|k| {
            let r = mu_hat[k] - fit[k];
            match bound.iter().find(|(b, _)| *b == k) {
                _ if w[k] == 0.0 => true,
                Some((_, s)) => s * r >= eps - slack,
                None => r.abs() <= eps + slack,
            }
        });
        if same_piece {
            return Some(full);
        }
        // the direction descends the convex objective; halve until it decreases
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let v = clipped_objective(mu_hat, w, model, &trial);
            if v < value {
                theta = trial;
                value = v;
                break;
            }
            t *= 0.5;
            if t < 1e-10 {
                return None;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::weighted_sq_distance;
    use crate::model::FeatureMatrix;
    use crate::numeric::{solve_box_qp, BoxQp};
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_model(rng: &mut ChaCha8Rng, k: usize, d: usize, eps: f64) -> ModelSet {
        loop {
            let rows = (0..k).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            if let Ok(f) = FeatureMatrix::new(rows) {
                return ModelSet::new(f, eps, 100.0).unwrap();
            }
        }
    }

    /// Joint (θ, η) problem handed to the generic box QP with θ unbounded.
    fn joint_oracle(model: &ModelSet, nu: &[f64], w: &[f64]) -> f64 {
        let f = &model.features;
        let (k, d) = (f.arms(), f.dim());
        let n = d + k;
        let mut q = DMatrix::zeros(n, n);
        let mut lin = DVector::zeros(n);
        for a in 0..k {
            let mut row = DVector::zeros(n);
            for c in 0..d {
                row[c] = f.row(a)[c];
            }
            row[d + a] = 1.0;
            q += &row * row.transpose() * (2.0 * w[a]);
            lin -= row * (2.0 * w[a] * nu[a]);
        }
        let mut bounds = vec![f64::INFINITY; d];
        bounds.extend(vec![model.epsilon; k]);
        let p = BoxQp { q_mat: q, q_vec: lin, bounds, lin_constraint: None };
        let s = solve_box_qp(&p, 1e-10).unwrap();
        s.value + weighted_sq_distance(nu, &vec![0.0; k], w)
    }

    #[test]
    fn feasible_point_is_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let model = random_model(&mut rng, 5, 2, 0.3);
        let w = [1.0, 2.0, 1.0, 3.0, 1.0];
        for shift in [0.25, 0.3] {
            let mu: Vec<f64> = model
                .features
                .apply(&[0.5, -0.2])
                .iter()
                .enumerate()
                .map(|(k, m)| m + shift * ((k % 3) as f64 - 1.0))
                .collect();
            let p = project_onto_model(&mu, &w, &model).unwrap();
            assert!(weighted_sq_distance(&mu, &p.mu_tilde, &w) < 1e-10);
            if shift < 0.3 {
                // strictly interior deviations
                for k in 0..5 {
                    assert!((p.mu_tilde[k] - mu[k]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn epsilon_zero_is_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let model = random_model(&mut rng, 6, 3, 0.0);
        let mu: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w = [1.0, 2.0, 3.0, 1.0, 1.0, 2.0];
        let p = project_onto_model(&mu, &w, &model).unwrap();
        // normal equations: Aᵀ W (Aθ - μ) = 0
        for c in 0..3 {
            let g: f64 = (0..6).map(|k| w[k] * model.features.row(k)[c] * (p.mu_tilde[k] - mu[k])).sum();
            assert!(g.abs() < 1e-10);
        }
        assert!(p.eta_tilde.iter().all(|e| *e == 0.0));
    }

    #[test]
    fn matches_joint_box_qp_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let k = rng.random_range(2..=6);
            let d = rng.random_range(1..=k.min(3));
            let eps = [0.05, 0.3, 1.0][rng.random_range(0..3)];
            let model = random_model(&mut rng, k, d, eps);
            let nu: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
            let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..3.0)).collect();
            let p = project_onto_model(&nu, &w, &model).unwrap();
            let got = weighted_sq_distance(&nu, &p.mu_tilde, &w);
            let want = joint_oracle(&model, &nu, &w);
            assert!((got - want).abs() <= 1e-6 * (1.0 + want.abs()), "{got} vs {want}");
            assert!(model.check_witness(&p.mu_tilde, &p.theta_tilde, &p.eta_tilde, 1e-10));
        }
    }

    #[test]
    fn strict_mode_respects_mean_bound() {
        let f = FeatureMatrix::new(vec![vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let model = ModelSet::new(f, 0.5, 1.0).unwrap().with_mean_bound_enforced(true);
        let p = project_onto_model(&[3.0, 2.5, 2.0], &[1.0, 1.0, 1.0], &model).unwrap();
        assert!(p.mu_tilde.iter().all(|m| m.abs() <= 1.0 + 1e-9));
    }
}
