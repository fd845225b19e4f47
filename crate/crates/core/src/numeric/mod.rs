//! Numerical kernels.

mod box_qp;
mod ipm;
mod lambert;
mod linalg;
mod spanner;

pub use box_qp::{solve_box_qp, BoxQp, QpSolution, QpStatus};
pub use ipm::{solve_qp, InequalityQp, IpmSolution};
pub use lambert::lambert_w_bar;
pub use linalg::min_eigenvalue;
pub(crate) use linalg::cholesky;
pub use spanner::{barycentric_spanner, spanner_coefficients};
