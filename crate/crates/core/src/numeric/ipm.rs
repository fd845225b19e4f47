//! Dense primal-dual interior-point method (Mehrotra predictor-corrector)
//! for small convex QPs `min ½xᵀHx + gᵀx  s.t.  Gx <= h`.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct InequalityQp {
    pub hessian: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub constraints: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct IpmSolution {
    pub x: DVector<f64>,
    /// Multipliers of the inequality rows.
    pub z: DVector<f64>,
    pub value: f64,
    pub iterations: usize,
}

const MAX_ITER: usize = 100;

impl InequalityQp {
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.hessian * x)) + self.linear.dot(x)
    }
}

fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(a, d)| -a / d)
        .fold(1.0, f64::min)
}

/// Solves the QP to relative accuracy `tol` on residuals and complementarity.
/// Convex `H` is assumed; the reduced system must be positive definite at
/// interior points, which holds whenever the constraints bound every
/// direction of zero curvature.
pub fn solve_qp(qp: &InequalityQp, tol: f64) -> Result<IpmSolution> {
    let n = qp.linear.len();
    let m = qp.rhs.len();
    let g = &qp.constraints;
    if qp.hessian.nrows() != n || g.ncols() != n || g.nrows() != m {
        return Err(Error::Parameter("QP dimensions disagree".into()));
    }
    let gt = g.transpose();
    let scale_d = 1.0 + qp.linear.amax();
    let scale_p = 1.0 + qp.rhs.amax();
    let jitter_base = 1e-13 * (1.0 + qp.hessian.diagonal().amax());

    let mut x = DVector::zeros(n);
    let mut s = DVector::from_fn(m, |i, _| (qp.rhs[i]).max(1.0));
    let mut z = DVector::from_element(m, 1.0);

    // residuals stall around roundoff when the scaling matrix is extreme;
    // they get a looser test than the duality gap
    let res_tol = 100.0 * tol;
    let mut best: Option<(f64, IpmSolution)> = None;
    for it in 0..MAX_ITER {
        let r_d = &qp.hessian * &x + &qp.linear + &gt * &z;
        let r_p = g * &x + &s - &qp.rhs;
        let mu = if m > 0 { s.dot(&z) / m as f64 } else { 0.0 };
        let gap = s.dot(&z);
        let objective = qp.objective(&x);
        let merit = (r_d.amax() / (res_tol * scale_d))
            .max(r_p.amax() / (res_tol * scale_p))
            .max(gap / (tol * (1.0 + objective.abs())));
        if merit <= 1.0 {
            return Ok(IpmSolution { value: objective, x, z, iterations: it });
        }
        if best.as_ref().is_none_or(|b| merit < b.0) {
            best = Some((merit, IpmSolution { value: objective, x: x.clone(), z: z.clone(), iterations: it }));
        }

        let sigma_diag = z.component_div(&s);
        let mut kkt = qp.hessian.clone();
        for r in 0..m {
            let w = sigma_diag[r];
            let row = g.row(r);
            for a in 0..n {
                let ra = row[a];
                if ra == 0.0 {
                    continue;
                }
                let wa = w * ra;
                for b in 0..n {
                    kkt[(a, b)] += wa * row[b];
                }
            }
        }
        let chol = match factor(kkt, jitter_base) {
            Ok(c) => c,
            Err(e) => return accept_loose(best, tol).ok_or(e),
        };

        let solve = |r_c: &DVector<f64>| {
            let rhs = -&r_d - &gt * (z.component_mul(&r_p) - r_c).component_div(&s);
            let dx = chol.solve(&rhs);
            let gdx = g * &dx;
            let dz = sigma_diag.component_mul(&(&gdx + &r_p)) - r_c.component_div(&s);
            let ds = -&r_p - gdx;
            (dx, ds, dz)
        };

        // predictor
        let r_aff = s.component_mul(&z);
        let (_, ds_a, dz_a) = solve(&r_aff);
        let alpha_aff = max_step(&s, &ds_a).min(max_step(&z, &dz_a));
        let mu_aff = (&s + &ds_a * alpha_aff).dot(&(&z + &dz_a * alpha_aff)) / m.max(1) as f64;
        let sigma = if mu > 0.0 { (mu_aff / mu).powi(3) } else { 0.0 };

        // corrector
        let r_c = r_aff + ds_a.component_mul(&dz_a) - DVector::from_element(m, sigma * mu);
        let (dx, ds, dz) = solve(&r_c);
        let alpha = (0.99 * max_step(&s, &ds).min(max_step(&z, &dz))).min(1.0);
        x += dx * alpha;
        s += ds * alpha;
        z += dz * alpha;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Numeric("interior-point iterate diverged".into()));
        }
    }
    if let Some(sol) = accept_loose(best, tol) {
        return Ok(sol);
    }
    let r_p = g * &x - &qp.rhs;
    if r_p.max() > 1e-6 * scale_p {
        return Err(Error::Infeasible(format!("constraint violation {:e} after {MAX_ITER} iterations", r_p.max())));
    }
    Err(Error::Numeric(format!("interior-point method did not converge in {MAX_ITER} iterations")))
}

/// Best iterate seen, if it meets the tolerance's square root.
fn accept_loose(best: Option<(f64, IpmSolution)>, tol: f64) -> Option<IpmSolution> {
    best.filter(|(merit, _)| merit * tol <= tol.sqrt()).map(|(_, s)| s)
}

fn factor(mut kkt: DMatrix<f64>, jitter_base: f64) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let n = kkt.nrows();
    let jitter_base = jitter_base.max(1e-15 * kkt.diagonal().amax());
    let mut jitter = 0.0;
    for _ in 0..8 {
        if let Some(c) = Cholesky::new(kkt.clone()) {
            return Ok(c);
        }
        let add = if jitter == 0.0 { jitter_base } else { jitter * 100.0 };
        for i in 0..n {
            kkt[(i, i)] += add - jitter;
        }
        jitter = add;
    }
    Err(Error::Numeric("reduced KKT system is not positive definite".into()))
}
