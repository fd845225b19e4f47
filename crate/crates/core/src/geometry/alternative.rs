use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{project_onto_model, weighted_sq_distance, JointQp, WeightedDesign};
use crate::error::{param, Error, Result};
use crate::model::ModelSet;

/// Enforces `λ_i >= λ_j` with `i` outside and `j` inside the candidate answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfSpacePair {
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KktCase {
    /// The projection onto the model set already satisfies the half-space constraint.
    BoundaryInactive,
    /// The minimizer lies on `λ_i = λ_j`.
    BoundaryActive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeSolution {
    pub lambda: Vec<f64>,
    /// `Σ_k w_k (ν_k - λ_k)²`, without the ½ factor.
    pub value: f64,
    pub pair: HalfSpacePair,
    pub kkt_case: KktCase,
}

/// Unstructured lower bound on the half-space distance:
/// `w_i w_j / (w_i + w_j) · (ν_j - ν_i)₊²`.
pub fn pair_lower_bound(nu: &[f64], w: &[f64], pair: HalfSpacePair) -> f64 {
    let (i, j) = (pair.i, pair.j);
    let gap = nu[j] - nu[i];
    let s = w[i] + w[j];
    if gap <= 0.0 || s == 0.0 {
        0.0
    } else {
        w[i] * w[j] / s * gap * gap
    }
}

/// Per-query cache shared by all pairs.
struct Context<'a> {
    model: &'a ModelSet,
    nu: &'a [f64],
    weights: &'a [f64],
    design: WeightedDesign,
    /// Lazily computed projection of `ν` onto the model set.
    projection: Option<Vec<f64>>,
    theta_hint: Option<Vec<f64>>,
    /// WLS fit for the `ε = 0` closed form.
    theta0: Option<DVector<f64>>,
}

impl<'a> Context<'a> {
    fn new(nu: &'a [f64], weights: &'a [f64], model: &'a ModelSet, witness: Option<&[f64]>) -> Result<Self> {
        if nu.len() != model.arms() {
            return param("mean vector length does not match arm count");
        }
        let design = WeightedDesign::new(&model.features, weights)?;
        let mut ctx = Self { model, nu, weights, design, projection: None, theta_hint: None, theta0: None };
        if let Some(theta) = witness {
            if theta.len() != model.dim() {
                return param("witness length does not match feature dimension");
            }
            let fit = model.features.apply(theta);
            let realizable = nu.iter().zip(&fit).all(|(n, l)| (n - l).abs() <= model.epsilon)
                && (!model.enforce_mean_bound || nu.iter().all(|n| n.abs() <= model.mean_bound));
            if realizable {
                ctx.projection = Some(nu.to_vec());
                ctx.theta_hint = Some(theta.to_vec());
            }
        }
        Ok(ctx)
    }

    fn projection(&mut self) -> Result<&[f64]> {
        if self.projection.is_none() {
            let p = project_onto_model(self.nu, self.weights, self.model)?;
            self.theta_hint = Some(p.theta_tilde);
            self.projection = Some(p.mu_tilde);
        }
        Ok(self.projection.as_deref().unwrap())
    }

    fn solve(&mut self, pair: HalfSpacePair) -> Result<AlternativeSolution> {
        let k = self.model.arms();
        let (i, j) = (pair.i, pair.j);
        if i >= k || j >= k || i == j {
            return param(format!("invalid pair ({i}, {j})"));
        }
        if self.model.epsilon == 0.0 && !self.model.enforce_mean_bound {
            return Ok(self.linear_closed_form(pair));
        }

        let proj = self.projection()?.to_vec();
        if proj[i] >= proj[j] {
            let value = weighted_sq_distance(self.nu, &proj, self.weights);
            return Ok(AlternativeSolution { lambda: proj, value, pair, kkt_case: KktCase::BoundaryInactive });
        }

        if let Some(lambda) = self.two_point_candidate(pair, &proj) {
            let value = weighted_sq_distance(self.nu, &lambda, self.weights);
            return Ok(AlternativeSolution { lambda, value, pair, kkt_case: KktCase::BoundaryActive });
        }

        let joint = JointQp::build(self.model, self.nu, &self.design.w, Some((i, j)));
        let (_, _, mut lambda) = joint.solve(self.model)?;
        // the solver stops strictly inside; snap the active constraint
        if lambda[i] < lambda[j] {
            let mid = 0.5 * (lambda[i] + lambda[j]);
            lambda[i] = mid;
            lambda[j] = mid;
        }
        let value = weighted_sq_distance(self.nu, &lambda, self.weights);
        Ok(AlternativeSolution { lambda, value, pair, kkt_case: KktCase::BoundaryActive })
    }

    /// Merging arms `i` and `j` at their weighted mean while leaving every other
    /// arm at the projection is optimal whenever the result stays realizable
    /// with the projection's linear part.
    fn two_point_candidate(&self, pair: HalfSpacePair, proj: &[f64]) -> Option<Vec<f64>> {
        let (i, j) = (pair.i, pair.j);
        let w = self.weights;
        if w[i] + w[j] == 0.0 {
            return None;
        }
        // only valid when the projection is ν itself on weighted arms
        let exact = (0..self.nu.len()).all(|k| w[k] == 0.0 || proj[k] == self.nu[k]);
        if !exact {
            return None;
        }
        let merged = (w[i] * self.nu[i] + w[j] * self.nu[j]) / (w[i] + w[j]);
        let mut lambda = proj.to_vec();
        lambda[i] = merged;
        lambda[j] = merged;
        if self.model.enforce_mean_bound && merged.abs() > self.model.mean_bound {
            return None;
        }
        let f = &self.model.features;
        let eps = self.model.epsilon;
        let within = |theta: &[f64], arms: &mut dyn Iterator<Item = usize>| {
            let mut ok = true;
            for a in arms {
                ok &= (lambda[a] - crate::model::dot(f.row(a), theta)).abs() <= eps;
            }
            ok
        };
        // the projection's linear part only has to absorb the two moved arms
        if let Some(theta) = &self.theta_hint {
            if within(theta, &mut [i, j].into_iter()) {
                return Some(lambda);
            }
        }
        let refit: Vec<f64> = self.design.wls(f, &lambda).iter().copied().collect();
        if within(&refit, &mut (0..lambda.len()).filter(|&a| w[a] > 0.0)) {
            for a in 0..lambda.len() {
                if w[a] == 0.0 {
                    lambda[a] = crate::model::dot(f.row(a), &refit);
                }
            }
            if self.model.enforce_mean_bound && lambda.iter().any(|l| l.abs() > self.model.mean_bound) {
                return None;
            }
            return Some(lambda);
        }
        None
    }

    fn linear_closed_form(&mut self, pair: HalfSpacePair) -> AlternativeSolution {
        let f = &self.model.features;
        if self.theta0.is_none() {
            self.theta0 = Some(self.design.wls(f, self.nu));
        }
        let theta0 = self.theta0.as_ref().unwrap();
        let u = DVector::from_iterator(
            f.dim(),
            f.row(pair.j).iter().zip(f.row(pair.i)).map(|(a, b)| a - b),
        );
        let excess = u.dot(theta0);
        let uvu = self.design.inv_norm_sq(&u);
        let (theta, kkt_case) = if excess > 0.0 && uvu > 0.0 {
            // V⁻¹u for raw weights equals the normalized solve divided by the total
            let shift = self.design.chol.solve(&u) / self.design.total * (excess / uvu);
            (theta0 - shift, KktCase::BoundaryActive)
        } else {
            (theta0.clone(), KktCase::BoundaryInactive)
        };
        let theta: Vec<f64> = theta.iter().copied().collect();
        let mut lambda = f.apply(&theta);
        if kkt_case == KktCase::BoundaryActive && lambda[pair.i] < lambda[pair.j] {
            let mid = 0.5 * (lambda[pair.i] + lambda[pair.j]);
            lambda[pair.i] = mid;
            lambda[pair.j] = mid;
        }
        let value = weighted_sq_distance(self.nu, &lambda, self.weights);
        AlternativeSolution { lambda, value, pair, kkt_case }
    }
}

/// `min { Σ w_k (ν_k - λ_k)² : λ ∈ M, λ_i >= λ_j }`.
///
/// `V_w` must be invertible.
pub fn closest_alternative_halfspace(
    nu: &[f64],
    w: &[f64],
    pair: HalfSpacePair,
    model: &ModelSet,
) -> Result<AlternativeSolution> {
    Context::new(nu, w, model, None)?.solve(pair)
}

fn pairs_by_bound(
    nu: &[f64],
    w: &[f64],
    answer: &[usize],
    outsiders: Option<&[usize]>,
) -> Result<Vec<(f64, HalfSpacePair)>> {
    let k = nu.len();
    if answer.is_empty() || answer.len() >= k || answer.iter().any(|&j| j >= k) {
        return param("answer must be a proper nonempty subset of the arms");
    }
    let mut inside = vec![false; k];
    for &j in answer {
        inside[j] = true;
    }
    let mut allowed = vec![outsiders.is_none(); k];
    for &i in outsiders.unwrap_or(&[]) {
        if i >= k {
            return param(format!("arm {i} out of range"));
        }
        allowed[i] = true;
    }
    let mut pairs: Vec<(f64, HalfSpacePair)> = (0..k)
        .filter(|&i| !inside[i] && allowed[i])
        .flat_map(|i| answer.iter().map(move |&j| HalfSpacePair { i, j }))
        .map(|p| (pair_lower_bound(nu, w, p), p))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    Ok(pairs)
}

/// Minimum of the half-space distances over all pairs `(i ∉ answer, j ∈ answer)`,
/// ties broken by the lexicographically smallest pair.
///
/// Pairs are visited by increasing unstructured lower bound and skipped once
/// the bound exceeds the incumbent.
pub fn closest_alternative(
    nu: &[f64],
    w: &[f64],
    answer: &[usize],
    model: &ModelSet,
) -> Result<AlternativeSolution> {
    closest_alternative_with_witness(nu, None, w, answer, model)
}

/// [`closest_alternative`] for a `ν` known to equal `Aθ + η` with `θ = witness`
/// and `η` inside the box; skips the projection of `ν`.
pub fn closest_alternative_with_witness(
    nu: &[f64],
    witness: Option<&[f64]>,
    w: &[f64],
    answer: &[usize],
    model: &ModelSet,
) -> Result<AlternativeSolution> {
    closest_alternative_restricted(nu, witness, w, answer, None, model)
}

/// [`closest_alternative_with_witness`] with the outside arm of each pair drawn
/// from `outsiders` only (all non-answer arms when `None`). The result is an
/// upper bound on the unrestricted value.
pub fn closest_alternative_restricted(
    nu: &[f64],
    witness: Option<&[f64]>,
    w: &[f64],
    answer: &[usize],
    outsiders: Option<&[usize]>,
    model: &ModelSet,
) -> Result<AlternativeSolution> {
    let mut ctx = Context::new(nu, w, model, witness)?;
    let mut best: Option<AlternativeSolution> = None;
    for (bound, pair) in pairs_by_bound(nu, w, answer, outsiders)? {
        if let Some(b) = &best {
            if bound > b.value || (bound == b.value && pair > b.pair) {
                continue;
            }
        }
        let sol = ctx.solve(pair)?;
        let better = match &best {
            None => true,
            Some(b) => sol.value < b.value || (sol.value == b.value && pair < b.pair),
        };
        if better {
            best = Some(sol);
        }
    }
    best.ok_or_else(|| Error::Infeasible("no half-space pairs".into()))
}

/// Whether every half-space distance strictly exceeds `threshold`.
/// `witness` is as in [`closest_alternative_with_witness`].
pub fn exceeds_threshold(
    nu: &[f64],
    witness: Option<&[f64]>,
    w: &[f64],
    answer: &[usize],
    model: &ModelSet,
    threshold: f64,
) -> Result<bool> {
    let pairs = pairs_by_bound(nu, w, answer, None)?;
    if pairs.iter().all(|(b, _)| *b > threshold) {
        return Ok(true);
    }
    let mut ctx = Context::new(nu, w, model, witness)?;
    for (bound, pair) in pairs {
        if bound > threshold {
            break;
        }
        if ctx.solve(pair)?.value <= threshold {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FeatureMatrix;

    fn unstructured(k: usize, eps: f64) -> ModelSet {
        ModelSet::new(FeatureMatrix::identity(k), eps, 100.0).unwrap()
    }

    #[test]
    fn two_arm_weighted_mean() {
        let model = ModelSet::new(FeatureMatrix::new(vec![vec![1.0], vec![1.0]]).unwrap(), 10.0, 100.0).unwrap();
        let s = closest_alternative_halfspace(&[1.0, 0.0], &[1.0, 1.0], HalfSpacePair { i: 1, j: 0 }, &model).unwrap();
        assert!((s.value - 0.5).abs() < 1e-9);
        assert!((s.lambda[0] - 0.5).abs() < 1e-9 && (s.lambda[1] - 0.5).abs() < 1e-9);
        assert_eq!(s.kkt_case, KktCase::BoundaryActive);
    }

    #[test]
    fn satisfied_constraint_costs_nothing() {
        let model = unstructured(3, 5.0);
        let s = closest_alternative_halfspace(&[0.0, 1.0, 2.0], &[1.0; 3], HalfSpacePair { i: 2, j: 0 }, &model).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.lambda, vec![0.0, 1.0, 2.0]);
        assert_eq!(s.kkt_case, KktCase::BoundaryInactive);
    }

    #[test]
    fn smallest_gap_pair_wins() {
        let model = unstructured(3, 5.0);
        let s = closest_alternative(&[2.0, 1.0, 0.0], &[1.0; 3], &[0], &model).unwrap();
        assert_eq!(s.pair, HalfSpacePair { i: 1, j: 0 });
        assert!((s.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn constant_vector_has_zero_value() {
        let model = unstructured(4, 1.0);
        let s = closest_alternative(&[1.0; 4], &[1.0; 4], &[0, 1], &model).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.pair, HalfSpacePair { i: 2, j: 0 });
    }

    #[test]
    fn threshold_check_agrees_with_minimum() {
        let model = unstructured(3, 5.0);
        let nu = [2.0, 1.0, 0.0];
        assert!(exceeds_threshold(&nu, None, &[1.0; 3], &[0], &model, 0.49).unwrap());
        assert!(!exceeds_threshold(&nu, None, &[1.0; 3], &[0], &model, 0.5).unwrap());
    }
}
