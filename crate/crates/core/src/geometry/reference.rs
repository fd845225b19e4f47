//! Closest alternative through the deviation-only formulation: `θ` is
//! eliminated in closed form and the two KKT cases of the half-space
//! multiplier become two box-constrained QPs in `η` alone.
//!
//! Slower than [`super::closest_alternative_halfspace`]; kept as an
//! independent route for cross-checking. The mean bound is not supported.

use nalgebra::{DMatrix, DVector};

use super::{weighted_sq_distance, AlternativeSolution, HalfSpacePair, KktCase};
use crate::error::{param, Error, Result};
use crate::model::ModelSet;
use crate::numeric::{solve_box_qp, BoxQp, QpStatus};

pub fn closest_alternative_eta_space(
    nu: &[f64],
    w: &[f64],
    pair: HalfSpacePair,
    model: &ModelSet,
    tol: f64,
) -> Result<AlternativeSolution> {
    let f = &model.features;
    let k = f.arms();
    if nu.len() != k || w.len() != k {
        return param("length mismatch");
    }
    let a = f.matrix();
    let dmat = DMatrix::from_diagonal(&DVector::from_column_slice(w));
    let v = a.transpose() * &dmat * a;
    let v_inv = v
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Precondition("singular design matrix".into()))?
        .inverse();
    let b = a * &v_inv * a.transpose();
    let nu_v = DVector::from_column_slice(nu);
    let mut u = DVector::zeros(k);
    u[pair.j] = 1.0;
    u[pair.i] = -1.0;

    let eye = DMatrix::<f64>::identity(k, k);
    let q0 = &dmat - &dmat * &b * &dmat;
    let q0 = (&q0 + q0.transpose()) * 0.5;
    let lin0 = -(&q0 * &nu_v);
    let const0 = 0.5 * nu_v.dot(&(&q0 * &nu_v));
    let av = (&eye - &dmat * &b) * &u;
    let ubd_nu = u.dot(&(&b * &dmat * &nu_v));

    let mut best: Option<(f64, DVector<f64>, f64, KktCase)> = None;

    // α = 0: the unconstrained-θ fit must already satisfy the half-space
    let p0 = BoxQp::new(q0.clone(), lin0.clone(), model.epsilon).with_constraint(av.clone(), -ubd_nu);
    let s0 = solve_box_qp(&p0, tol)?;
    if s0.status != QpStatus::Infeasible {
        best = Some((2.0 * (s0.value + const0), s0.x, 0.0, KktCase::BoundaryInactive));
    }

    // α > 0: on the hyperplane, α is affine in η
    let s = u.dot(&(&b * &u));
    if s > 1e-14 {
        let q1 = &q0 + &av * av.transpose() / s;
        let q1 = (&q1 + q1.transpose()) * 0.5;
        let lin1 = &av * (ubd_nu / s) + &lin0;
        let const1 = 0.5 * ubd_nu * ubd_nu / s + const0;
        let s1 = solve_box_qp(&BoxQp::new(q1, lin1, model.epsilon), tol)?;
        let alpha = (ubd_nu + av.dot(&s1.x)) / s;
        let value = 2.0 * (s1.value + const1);
        if best.as_ref().is_none_or(|b| value < b.0) {
            best = Some((value, s1.x, alpha, KktCase::BoundaryActive));
        }
    }

    let (_, eta, alpha, kkt_case) =
        best.ok_or_else(|| Error::Infeasible("both multiplier cases are infeasible".into()))?;
    let theta = &v_inv * a.transpose() * (-(&u * alpha) + &dmat * (&nu_v - &eta));
    let lambda: Vec<f64> = (a * theta + eta).iter().copied().collect();
    let value = weighted_sq_distance(nu, &lambda, w);
    Ok(AlternativeSolution { lambda, value, pair, kkt_case })
}
