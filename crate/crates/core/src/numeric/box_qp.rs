use nalgebra::{DMatrix, DVector};

use super::linalg::{check_symmetric, max_eigenvalue, min_eigenvalue};
use crate::error::{Error, Result};

/// `min ½ xᵀQx + qᵀx` subject to `|x_i| <= bounds_i` and optionally `a·x <= c`.
#[derive(Debug, Clone)]
pub struct BoxQp {
    pub q_mat: DMatrix<f64>,
    pub q_vec: DVector<f64>,
    /// Per-coordinate bound; `f64::INFINITY` leaves the coordinate free.
    pub bounds: Vec<f64>,
    pub lin_constraint: Option<(DVector<f64>, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    pub value: f64,
    pub status: QpStatus,
    /// Norm of the projected-gradient mapping at `x`.
    pub kkt_residual: f64,
    pub iterations: usize,
}

const MAX_ITER: usize = 200_000;

impl BoxQp {
    pub fn new(q_mat: DMatrix<f64>, q_vec: DVector<f64>, bound: f64) -> Self {
        let n = q_vec.len();
        Self { q_mat, q_vec, bounds: vec![bound; n], lin_constraint: None }
    }

    pub fn with_constraint(mut self, a: DVector<f64>, c: f64) -> Self {
        self.lin_constraint = Some((a, c));
        self
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.q_mat * x)) + self.q_vec.dot(x)
    }

    fn validate(&self) -> Result<()> {
        let n = self.q_vec.len();
        if self.q_mat.nrows() != n || self.q_mat.ncols() != n || self.bounds.len() != n {
            return Err(Error::Parameter("BoxQp dimensions disagree".into()));
        }
        if self.bounds.iter().any(|b| !(*b >= 0.0)) {
            return Err(Error::Parameter("box bounds must be >= 0".into()));
        }
        if let Some((a, _)) = &self.lin_constraint {
            if a.len() != n {
                return Err(Error::Parameter("constraint length disagrees".into()));
            }
        }
        check_symmetric(&self.q_mat)?;
        if n > 0 {
            let lo = min_eigenvalue(&self.q_mat)?;
            if lo < -1e-10 * self.q_mat.amax().max(1.0) {
                return Err(Error::Numeric(format!("Q is not PSD (eigenvalue {lo:e})")));
            }
        }
        Ok(())
    }

    /// Whether `box ∩ {a·x <= c}` is empty.
    pub fn is_infeasible(&self) -> bool {
        match &self.lin_constraint {
            None => false,
            Some((a, c)) => {
                let lowest: f64 = a
                    .iter()
                    .zip(&self.bounds)
                    .map(|(ai, b)| if *ai == 0.0 { 0.0 } else { -ai.abs() * b })
                    .sum();
                lowest > *c
            }
        }
    }

    fn clip(&self, x: &mut DVector<f64>) {
        for (xi, b) in x.iter_mut().zip(&self.bounds) {
            *xi = xi.clamp(-b, *b);
        }
    }

    /// Euclidean projection onto the feasible set.
    pub fn project(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut x = y.clone();
        self.clip(&mut x);
        let Some((a, c)) = &self.lin_constraint else {
            return x;
        };
        if a.dot(&x) <= *c {
            return x;
        }
        // x(ν) = clip(y - ν a) makes a·x(ν) non-increasing in ν >= 0;
        // bracket the root of a·x(ν) = c and bisect to machine precision
        let at = |nu: f64| {
            let mut x = y - a * nu;
            self.clip(&mut x);
            x
        };
        let mut lo = 0.0;
        let mut hi = 1.0 / a.norm().max(1e-300);
        let mut guard = 0;
        while a.dot(&at(hi)) > *c && guard < 2000 {
            lo = hi;
            hi *= 2.0;
            guard += 1;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if a.dot(&at(mid)) > *c {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(hi)
    }
}

/// Accelerated projected gradient (FISTA) with gradient-based restart,
/// stopping once the projected-gradient residual is below `tol`.
pub fn solve_box_qp(problem: &BoxQp, tol: f64) -> Result<QpSolution> {
    problem.validate()?;
    let n = problem.q_vec.len();
    if problem.is_infeasible() {
        return Ok(QpSolution {
            x: DVector::zeros(n),
            value: f64::INFINITY,
            status: QpStatus::Infeasible,
            kkt_residual: f64::INFINITY,
            iterations: 0,
        });
    }
    let lip = if n > 0 { max_eigenvalue(&problem.q_mat).max(1e-12) } else { 1.0 };
    let step = 1.0 / lip;
    let grad = |x: &DVector<f64>| &problem.q_mat * x + &problem.q_vec;
    let residual = |x: &DVector<f64>, g: &DVector<f64>| {
        let moved = problem.project(&(x - g * step));
        (x - moved).norm() * lip
    };

    let mut x = problem.project(&DVector::zeros(n));
    let mut y = x.clone();
    let mut momentum = 1.0_f64;
    let mut status = QpStatus::MaxIterations;
    let mut iterations = 0;
    for it in 0..MAX_ITER {
        iterations = it + 1;
        let gy = grad(&y);
        let next = problem.project(&(&y - &gy * step));
        let gx = grad(&next);
        if residual(&next, &gx) <= tol {
            x = next;
            status = QpStatus::Optimal;
            break;
        }
        let restart = gy.dot(&(&next - &x)) > 0.0;
        if restart {
            momentum = 1.0;
            y = next.clone();
        } else {
            let m_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            y = &next + (&next - &x) * ((momentum - 1.0) / m_next);
            momentum = m_next;
        }
        x = next;
    }
    let g = grad(&x);
    Ok(QpSolution {
        value: problem.objective(&x),
        kkt_residual: residual(&x, &g),
        x,
        status,
        iterations,
    })
}
