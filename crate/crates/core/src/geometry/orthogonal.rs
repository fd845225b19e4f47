use nalgebra::DMatrix;

use super::WeightedDesign;
use crate::error::{param, Result};
use crate::model::{FeatureMatrix, SufficientStats};

/// `μ = Aθ_t + η_t` with `θ_t` the `D_N`-weighted least-squares fit of `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalParam {
    pub theta_t: Vec<f64>,
    pub eta_t: Vec<f64>,
}

/// `θ_t = V_t⁻¹ Aᵀ D_N μ`, `η_t = μ - Aθ_t`.
pub fn orthogonal_decompose(
    mu: &[f64],
    stats: &SufficientStats,
    features: &FeatureMatrix,
) -> Result<OrthogonalParam> {
    if mu.len() != features.arms() {
        return param("mean vector length does not match arm count");
    }
    let design = WeightedDesign::new(features, &stats.counts)?;
    let theta = design.wls(features, mu);
    let theta_t: Vec<f64> = theta.iter().copied().collect();
    let fit = features.apply(&theta_t);
    let eta_t = mu.iter().zip(&fit).map(|(m, f)| m - f).collect();
    Ok(OrthogonalParam { theta_t, eta_t })
}

/// `R = I - D^{1/2} A V⁻¹ Aᵀ D^{1/2}` for `D = diag(counts)`.
pub fn residual_projector(features: &FeatureMatrix, counts: &[f64]) -> Result<DMatrix<f64>> {
    let design = WeightedDesign::new(features, counts)?;
    let k = features.arms();
    let sqrt_d: Vec<f64> = counts.iter().map(|c| c.sqrt()).collect();
    let scaled = DMatrix::from_fn(features.dim(), k, |r, c| features.row(c)[r] * sqrt_d[c]);
    // V⁻¹ for the raw counts is the normalized inverse divided by the total
    let solved = design.chol.solve(&scaled) / design.total;
    Ok(DMatrix::identity(k, k) - scaled.transpose() * solved)
}
