use super::config::GainMode;
use super::thresholds::{alpha_lin, alpha_uns};
use crate::error::{Error, Result};
use crate::geometry::{AlternativeSolution, ProjectedEstimate};
use crate::model::{ModelSet, SufficientStats};
use crate::numeric::cholesky;

fn terms(stats: &SufficientStats, model: &ModelSet) -> (f64, f64, f64, f64) {
    let k = model.arms() as f64;
    let l = model.features.max_norm();
    let s = stats.t * stats.t;
    let inflation = 8.0 * (l * k + 1.0).powi(2) * model.epsilon * model.epsilon;
    let cap = 4.0 * model.mean_bound * model.mean_bound;
    (inflation, 4.0 * alpha_lin(s, model.dim()), 2.0 * alpha_uns(s, model.arms()), cap)
}

fn combine(inflation: f64, lin: f64, uns: f64, cap: f64, norm_sq: f64, count: f64) -> f64 {
    let unstructured = if count > 0.0 { uns / count } else { f64::INFINITY };
    (inflation + lin * norm_sq).min(unstructured).min(cap)
}

/// Confidence bonuses `c_k` for every arm, given the statistics after `t` pulls.
/// `V_t` must be invertible.
pub fn bonuses(stats: &SufficientStats, model: &ModelSet) -> Result<Vec<f64>> {
    let chol = cholesky(&stats.design)
        .map_err(|_| Error::Precondition("bonuses need an invertible design matrix".into()))?;
    let (inflation, lin, uns, cap) = terms(stats, model);
    Ok((0..model.arms())
        .map(|k| {
            let phi = nalgebra::DVector::from_column_slice(model.features.row(k));
            let norm_sq = phi.dot(&chol.solve(&phi));
            combine(inflation, lin, uns, cap, norm_sq, stats.counts[k])
        })
        .collect())
}

/// `c_k = min{8(LK+1)²ε² + 4α^lin_{t²} ||φ_k||²_{V_t⁻¹}, 2α^uns_{t²} / N_k, 4M²}`.
pub fn bonus(k: usize, stats: &SufficientStats, model: &ModelSet) -> Result<f64> {
    if k >= model.arms() {
        return Err(Error::Parameter(format!("arm {k} out of range")));
    }
    Ok(bonuses(stats, model)?[k])
}

/// Per-arm coefficients of the linear gain `ω ↦ Σ ω_k U_k` handed to the learner.
pub fn gain_vector(estimate: &ProjectedEstimate, alt: &AlternativeSolution, bonuses: &[f64], mode: GainMode) -> Vec<f64> {
    estimate
        .mu_tilde
        .iter()
        .zip(&alt.lambda)
        .enumerate()
        .map(|(k, (m, l))| {
            let gap = m - l;
            match mode {
                GainMode::Empirical => gap * gap,
                GainMode::Aggressive => gap * gap + bonuses[k],
                GainMode::Optimistic => (gap.abs() + bonuses[k].sqrt()).powi(2),
            }
        })
        .collect()
}
