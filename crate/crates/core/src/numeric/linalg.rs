use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;

pub(crate) fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Numeric(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::Numeric(format!("matrix not symmetric at ({i},{j})")));
            }
        }
    }
    Ok(())
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(v: &DMatrix<f64>) -> Result<f64> {
    check_symmetric(v)?;
    if v.nrows() == 0 {
        return Err(Error::Numeric("empty matrix".into()));
    }
    let sym = (v + v.transpose()) * 0.5;
    Ok(sym.symmetric_eigenvalues().min())
}

/// Largest eigenvalue of a symmetric matrix.
pub(crate) fn max_eigenvalue(v: &DMatrix<f64>) -> f64 {
    let sym = (v + v.transpose()) * 0.5;
    sym.symmetric_eigenvalues().max()
}

/// Cholesky factor of a symmetric positive-definite matrix, or a
/// `Singular` error carrying the smallest eigenvalue.
pub(crate) fn cholesky(v: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let scale = v.diagonal().amax();
    match Cholesky::new(v.clone()) {
        Some(c) => {
            let l = c.l_dirty();
            let min_pivot = l.diagonal().iter().fold(f64::INFINITY, |a, &b| a.min(b * b));
            if scale > 0.0 && min_pivot > 1e-13 * scale {
                Ok(c)
            } else {
                Err(Error::Singular(min_pivot))
            }
        }
        None => Err(Error::Singular(max_eigenvalue(v).min(min_eigenvalue(v).unwrap_or(0.0)))),
    }
}
