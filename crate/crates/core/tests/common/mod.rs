//! Test-side oracles, written independently of the library's solvers.
#![allow(dead_code)]

use mislid::{FeatureMatrix, ModelSet};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_features(rng: &mut ChaCha8Rng, k: usize, d: usize) -> FeatureMatrix {
    loop {
        let rows = (0..k).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        if let Ok(f) = FeatureMatrix::new(rows) {
            return f;
        }
    }
}

/// `ν = Aθ + η` with `|η| <= eta_scale` drawn uniformly.
pub fn realizable_point(rng: &mut ChaCha8Rng, f: &FeatureMatrix, eta_scale: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let theta: Vec<f64> = (0..f.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let eta: Vec<f64> = (0..f.arms()).map(|_| rng.random_range(-eta_scale..=eta_scale)).collect();
    let nu = f.apply(&theta).iter().zip(&eta).map(|(l, e)| l + e).collect();
    (nu, theta, eta)
}

pub fn random_weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn design(f: &FeatureMatrix, w: &[f64]) -> DMatrix<f64> {
    let mut v = DMatrix::zeros(f.dim(), f.dim());
    for (k, wk) in w.iter().enumerate() {
        let phi = DVector::from_column_slice(f.row(k));
        v += *wk * &phi * phi.transpose();
    }
    v
}

/// Exactly linear model: `min Σ w (ν - Aθ)²` subject to `(φ_i - φ_j)ᵀθ >= 0`.
/// The unconstrained fit is moved along `V⁻¹ y` until the constraint binds.
pub fn linear_pair_value(f: &FeatureMatrix, nu: &[f64], w: &[f64], i: usize, j: usize) -> f64 {
    let v_inv = design(f, w).try_inverse().expect("invertible design");
    let mut b = DVector::zeros(f.dim());
    for k in 0..f.arms() {
        b += w[k] * nu[k] * DVector::from_column_slice(f.row(k));
    }
    let theta = &v_inv * b;
    let resid: f64 = (0..f.arms())
        .map(|k| {
            let fit = DVector::from_column_slice(f.row(k)).dot(&theta);
            w[k] * (nu[k] - fit).powi(2)
        })
        .sum();
    let y = DVector::from_column_slice(f.row(i)) - DVector::from_column_slice(f.row(j));
    let c = y.dot(&theta);
    if c >= 0.0 {
        resid
    } else {
        resid + c * c / (y.transpose() * &v_inv * &y)[0]
    }
}

/// Unstructured half-space distance: only `i` and `j` move, to their weighted mean.
pub fn two_arm_value(nu: &[f64], w: &[f64], i: usize, j: usize) -> f64 {
    let gap = nu[j] - nu[i];
    if gap <= 0.0 {
        0.0
    } else {
        w[i] * w[j] / (w[i] + w[j]) * gap * gap
    }
}

/// Half-space distances under `ε = ∞` for an unstructured model, minimized over pairs.
pub fn unstructured_inner(nu: &[f64], w: &[f64], answer: &[usize]) -> f64 {
    let mut best = f64::INFINITY;
    for i in (0..nu.len()).filter(|i| !answer.contains(i)) {
        for &j in answer {
            best = best.min(two_arm_value(nu, w, i, j));
        }
    }
    best
}

/// Maximizes a concave function over the simplex in three coordinates by
/// repeated grid search on a shrinking window.
pub fn grid_max_simplex3(mut f: impl FnMut(&[f64]) -> f64) -> (f64, Vec<f64>) {
    let n = 24;
    let (mut c0, mut c1, mut half) = (1.0 / 3.0, 1.0 / 3.0, 0.5);
    let mut best = (f64::NEG_INFINITY, vec![1.0 / 3.0; 3]);
    for _ in 0..60 {
        let mut local = best.clone();
        for a in 0..=n {
            for b in 0..=n {
                let x = c0 - half + 2.0 * half * a as f64 / n as f64;
                let y = c1 - half + 2.0 * half * b as f64 / n as f64;
                if x < 0.0 || y < 0.0 || x + y > 1.0 {
                    continue;
                }
                let w = [x, y, 1.0 - x - y];
                let v = f(&w);
                if v > local.0 {
                    local = (v, w.to_vec());
                }
            }
        }
        best = local;
        c0 = best.1[0];
        c1 = best.1[1];
        half *= 0.7;
        if half < 1e-9 {
            break;
        }
    }
    best
}

pub fn unstructured_model(k: usize, eps: f64) -> ModelSet {
    ModelSet::new(FeatureMatrix::identity(k), eps, 1e3).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}
