use crate::error::{Error, Result};
use crate::graded_space::GradedElement;
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::tame::TameProblem;

#[derive(Debug, Clone)]
pub struct NewtonResult<T: Scalar> {
    pub x: GradedElement<T>,
    pub iterations: usize,
    /// `‖f(x) − y‖_0` at exit.
    pub residual: T,
}

/// Damped Newton on the full coefficient space, starting from zero.
///
/// The Jacobian is assembled column by column from `f'(x; e_i)`, so this
/// only relies on `eval` and `dderiv`, never on the right inverse. Used as
/// an independent reference for continuation results.
pub fn dense_newton_oracle<T: Scalar>(
    problem: &TameProblem<T>,
    y: &GradedElement<T>,
    tol: T,
    max_iter: usize,
) -> Result<NewtonResult<T>> {
    let spec = problem.spec();
    let dim = spec.coeff_len();
    let mut x = GradedElement::zero(spec);
    let mut res = problem.eval(&x).try_sub(y)?;
    let mut res_norm = res.norm(0)?;
    for iter in 0..max_iter {
        if res_norm <= tol {
            return Ok(NewtonResult { x, iterations: iter, residual: res_norm });
        }
        let columns: Vec<Vec<T>> =
            (0..dim).map(|i| problem.dderiv(&x, &GradedElement::basis(spec, i)).into_coeffs()).collect();
        let rhs: Vec<T> = res.coeffs().iter().map(|&v| -v).collect();
        let delta = GradedElement::from_coeffs(spec, Matrix::from_columns(&columns).lu()?.solve(&rhs))?;

        let mut step = T::one();
        loop {
            let trial = x.axpy(step, &delta)?;
            if problem.domain_guard(&trial) {
                let trial_res = problem.eval(&trial).try_sub(y)?;
                let trial_norm = trial_res.norm(0)?;
                if trial_norm < res_norm || trial_norm <= tol {
                    x = trial;
                    res = trial_res;
                    res_norm = trial_norm;
                    break;
                }
            }
            step = step * T::lit(0.5);
            if step < T::lit(1e-6) {
                return Err(Error::Divergence { iterations: iter + 1, residual: res_norm.as_f64() });
            }
        }
    }
    if res_norm <= tol {
        Ok(NewtonResult { x, iterations: max_iter, residual: res_norm })
    } else {
        Err(Error::Divergence { iterations: max_iter, residual: res_norm.as_f64() })
    }
}
