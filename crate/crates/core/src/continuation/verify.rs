use serde::Serialize;

use super::SolveOutcome;
use crate::error::Result;
use crate::graded_space::{distance_n, GradedElement};
use crate::scalar::Scalar;
use crate::tame::TameProblem;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelCheck {
    pub level: usize,
    /// `‖y‖_{n+d}`, absent above `N − d`.
    pub y_level: Option<f64>,
    pub norm_x: f64,
    /// `c_n ‖y‖_{n+d}`.
    pub bound: Option<f64>,
    /// `‖x‖_n / (c_n ‖y‖_{n+d})`.
    pub ratio: Option<f64>,
    pub bound_ok: Option<bool>,
    /// `d_n(y, f(x))`, absent for unmonitored levels.
    pub residual: Option<f64>,
    pub residual_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub levels: Vec<LevelCheck>,
    pub provenance: String,
    pub pass: bool,
}

/// Re-checks a finished solve against the problem's declared constants:
/// `‖x‖_n <= c_n ‖y‖_{n+d} (1 + slack)` for `n <= N − d` and
/// `d_n(y, f(x)) <= ε (1 + roundoff)` on the monitored levels.
///
/// The constants are read from `problem`, not from the outcome, so a solve
/// run under different constants is judged against these.
pub fn verify_theorem_bounds<T: Scalar>(
    outcome: &SolveOutcome<T>,
    problem: &TameProblem<T>,
    y: &GradedElement<T>,
    slack: T,
) -> Result<TheoremReport> {
    let x = &outcome.x_final;
    x.check_same(y)?;
    let d = problem.loss();
    let checkable = problem.checkable_levels();
    let image = [problem.eval(x)];
    let y_norms = y.all_norms();
    let x_norms = x.all_norms();
    let residual_limit = outcome.eps * (T::one() + outcome.roundoff);

    let mut levels = Vec::with_capacity(x_norms.len());
    for (n, &norm_x) in x_norms.iter().enumerate() {
        let in_range = checkable.is_some_and(|m| n <= m);
        let y_level = in_range.then(|| y_norms[n + d]);
        let bound = y_level.map(|yl| problem.constants().get(n) * yl);
        let ratio = bound.map(|b| {
            if b > T::zero() {
                norm_x / b
            } else if norm_x > T::zero() {
                T::infinity()
            } else {
                T::zero()
            }
        });
        let bound_ok = bound.map(|b| norm_x <= b * (T::one() + slack));
        let (residual, residual_ok) = if n <= outcome.monitored_levels {
            let r = distance_n(y, &image, n)?;
            (Some(r.as_f64()), Some(r <= residual_limit))
        } else {
            (None, None)
        };
        levels.push(LevelCheck {
            level: n,
            y_level: y_level.map(Scalar::as_f64),
            norm_x: norm_x.as_f64(),
            bound: bound.map(Scalar::as_f64),
            ratio: ratio.map(Scalar::as_f64),
            bound_ok,
            residual,
            residual_ok,
        });
    }
    let pass = levels.iter().all(|l| l.bound_ok.unwrap_or(true) && l.residual_ok.unwrap_or(true));
    Ok(TheoremReport { levels, provenance: problem.provenance().label().to_string(), pass })
}
