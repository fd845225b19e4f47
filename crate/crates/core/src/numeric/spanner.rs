use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::FeatureMatrix;

/// Swap tolerance: a swap must grow `|det|` by more than this factor.
const SWAP_GAIN: f64 = 1.0 + 1e-9;

/// Barycentric spanner of the arm features: `d` arm indices whose rows are
/// linearly independent and express every arm with coefficients in `[-C, C]`,
/// here `C = 1 + 1e-9`.
///
/// Replacing column `i` of the basis `X` by `x` scales `|det X|` by
/// `|(X⁻¹x)_i|`, so both the greedy fill and the swap phase work on those
/// coefficients.
pub fn barycentric_spanner(features: &FeatureMatrix) -> Result<Vec<usize>> {
    let d = features.dim();
    let k = features.arms();
    let phi = |a: usize| DVector::from_column_slice(features.row(a));
    let mut basis = DMatrix::<f64>::identity(d, d);
    let mut chosen = vec![usize::MAX; d];

    for i in 0..d {
        let inv = invert(&basis)?;
        let (best, coef) = (0..k)
            .map(|a| (a, (&inv * phi(a))[i].abs()))
            .fold((0, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if coef <= 1e-12 {
            return Err(Error::Rank { rank: i, dim: d });
        }
        basis.set_column(i, &phi(best));
        chosen[i] = best;
    }

    loop {
        let inv = invert(&basis)?;
        let mut best = (0usize, 0usize, SWAP_GAIN);
        for a in 0..k {
            let c = &inv * phi(a);
            for i in 0..d {
                if c[i].abs() > best.2 {
                    best = (a, i, c[i].abs());
                }
            }
        }
        if best.2 <= SWAP_GAIN {
            break;
        }
        basis.set_column(best.1, &phi(best.0));
        chosen[best.1] = best.0;
    }
    Ok(chosen)
}

fn invert(basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    basis.clone().try_inverse().ok_or_else(|| Error::Numeric("spanner basis became singular".into()))
}

/// Coefficients of every arm over the given spanner rows (one vector per arm).
pub fn spanner_coefficients(features: &FeatureMatrix, spanner: &[usize]) -> Result<Vec<DVector<f64>>> {
    let d = features.dim();
    let basis = DMatrix::from_fn(d, spanner.len(), |r, c| features.row(spanner[c])[r]);
    let lu = basis.lu();
    (0..features.arms())
        .map(|a| {
            lu.solve(&DVector::from_column_slice(features.row(a)))
                .ok_or_else(|| Error::Numeric("spanner rows are singular".into()))
        })
        .collect()
}
