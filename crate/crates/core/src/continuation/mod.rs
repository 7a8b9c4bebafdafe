//! Path-following `t ↦ t·ȳ` from `t = 0` to `t = 1`.
//!
//! Each step solves `f'(x; h) = ȳ` with the problem's right inverse and
//! accepts `x + r·h` when the step defect `‖f(x+rh) − f(x) − r·ȳ‖_n` is at
//! most `r·ε` at every monitored level. Chaining the triangle inequality
//! over accepted steps gives `‖f(x) − t·ȳ‖_n <= t·ε`, so reaching `t = 1`
//! yields `‖f(x) − ȳ‖_n <= ε` at all monitored levels at once.

mod newton;
mod report;
mod solver;
mod trace;
mod verify;

use serde::Serialize;
use thiserror::Error;

pub use newton::{dense_newton_oracle, NewtonResult};
pub use report::OutcomeJson;
pub use solver::{solve, step_acceptable, StepCheck};
pub use trace::{ContinuationTrace, RejectCause, TraceRecord};
pub use verify::{verify_theorem_bounds, LevelCheck, TheoremReport};

use crate::error::Error;
use crate::graded_space::{GradedElement, GradingSpec};
use crate::scalar::Scalar;

/// What to do when a step direction `h` leaves its box `Π_s`,
/// `s_n = c_n ‖ȳ‖_{n+d}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TamePolicy {
    /// Abort with [`SolveError::TameViolation`].
    Enforce,
    /// Count the violation and keep going.
    Record,
    /// `Enforce` for analytic or supplied constants, `Record` for sampled
    /// estimates, which can legitimately be exceeded off the sampled region.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationConfig<T> {
    /// Target per-level residual `ε`.
    pub eps: T,
    /// Initial step, in `(0, 1]`.
    pub r0: T,
    /// Steps below this abort with [`SolveError::StepUnderflow`].
    pub r_min: T,
    /// Step growth after an acceptance, `>= 1`.
    pub growth: T,
    /// Cap on attempted steps.
    pub max_steps: usize,
    /// Highest monitored level `N_mon`; levels `0..=N_mon` are controlled.
    pub monitored_levels: usize,
    /// Relative slack for `h ∈ Π_s`.
    pub tame_slack: T,
    /// Relative slack for the trace's `x(t) ∈ t·Π_s` audit.
    pub box_slack: T,
    /// Relative slack on `ε` when certifying the final residual.
    pub roundoff: T,
    pub tame_policy: TamePolicy,
}

impl<T: Scalar> ContinuationConfig<T> {
    /// Defaults: `r0 = 1/8`, `r_min = 2^-20`, `growth = 2`, all levels
    /// monitored.
    pub fn new(eps: T, spec: &GradingSpec<T>) -> Self {
        Self {
            eps,
            r0: T::lit(0.125),
            r_min: T::lit(2f64.powi(-20)),
            growth: T::lit(2.0),
            max_steps: 1_000_000,
            monitored_levels: spec.max_level(),
            tame_slack: T::lit(1e-6),
            box_slack: T::lit(1e-9),
            roundoff: T::lit(1e-9),
            tame_policy: TamePolicy::Auto,
        }
    }

    pub fn with_r0(mut self, r0: T) -> Self {
        self.r0 = r0;
        self
    }

    pub fn with_monitored_levels(mut self, levels: usize) -> Self {
        self.monitored_levels = levels;
        self
    }

    pub fn with_tame_policy(mut self, policy: TamePolicy) -> Self {
        self.tame_policy = policy;
        self
    }

    pub fn validate(&self, spec: &GradingSpec<T>) -> Result<(), SolveError> {
        let bad = |msg: String| Err(SolveError::InvalidConfig(msg));
        if !(self.eps > T::zero()) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.r_min > T::zero() && self.r_min < self.r0 && self.r0 <= T::one()) {
            return bad(format!("need 0 < r_min < r0 <= 1, got r_min={} r0={}", self.r_min, self.r0));
        }
        if !(self.growth >= T::one()) || !self.growth.is_finite() {
            return bad(format!("growth must be >= 1, got {}", self.growth));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be >= 1".into());
        }
        if self.monitored_levels > spec.max_level() {
            return bad(format!("monitored levels 0..={} exceed N={}", self.monitored_levels, spec.max_level()));
        }
        if self.tame_slack < T::zero() || self.box_slack < T::zero() || self.roundoff < T::zero() {
            return bad("slacks must be nonnegative".into());
        }
        Ok(())
    }
}

/// Per-level certification of a finished solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    /// `‖f(x) − y‖_n <= ε(1 + roundoff)` for monitored `n`.
    pub residual: Vec<bool>,
    /// `‖x‖_n <= c_n ‖y‖_{n+d} (1 + tame_slack)`; `None` above `N − d`.
    pub bound: Vec<Option<bool>>,
}

impl Certification {
    pub fn all(&self) -> bool {
        self.residual.iter().all(|&b| b) && self.bound.iter().all(|b| b.unwrap_or(true))
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome<T: Scalar> {
    pub x_final: GradedElement<T>,
    pub trace: ContinuationTrace<T>,
    pub certified: Certification,
    /// `‖f(x) − y‖_n` for monitored levels.
    pub final_residual: Vec<T>,
    /// `‖x‖_n` for all levels.
    pub final_norms: Vec<T>,
    /// `c_n ‖y‖_{n+d}` for `n <= N − d`.
    pub bounds: Vec<T>,
    pub eps: T,
    pub roundoff: T,
    pub monitored_levels: usize,
    /// Step directions that left `Π_s` (only nonzero under a recording policy).
    pub tame_violations: usize,
    /// Accepted states with `x(t) ∉ t·Π_s`.
    pub box_violations: usize,
}

impl<T: Scalar> SolveOutcome<T> {
    pub fn is_certified(&self) -> bool {
        self.certified.all()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("step underflow at t={t}: r={r} < r_min; worst defect {defect} at level {level}, inverse residual {inverse_residual}")]
    StepUnderflow { t: f64, r: f64, level: usize, defect: f64, inverse_residual: f64 },

    #[error("left the right-inverse domain at t={t}")]
    GuardExit { t: f64 },

    #[error("gave up after {steps} step attempts at t={t}")]
    MaxSteps { t: f64, steps: usize },

    #[error("tame violation at t={t}: |h|_{level} = {norm} exceeds its bound {bound}")]
    TameViolation { t: f64, level: usize, norm: f64, bound: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Problem(#[from] Error),
}

impl SolveError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::StepUnderflow { .. } => "StepUnderflow",
            Self::GuardExit { .. } => "GuardExit",
            Self::MaxSteps { .. } => "MaxSteps",
            Self::TameViolation { .. } => "TameViolation",
            Self::InvalidConfig(_) => "InvalidConfig",
            Self::Problem(_) => "Problem",
        }
    }
}

/// A failed solve, with everything recorded up to the failure.
#[derive(Debug, Clone, Error)]
#[error("{error}")]
pub struct SolveFailure<T: Scalar> {
    pub error: SolveError,
    pub trace: ContinuationTrace<T>,
    pub x_last: GradedElement<T>,
    pub t: T,
}
