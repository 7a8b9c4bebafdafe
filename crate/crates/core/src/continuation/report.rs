use serde::Serialize;

use super::{Certification, SolveFailure, SolveOutcome};
use crate::graded_space::{ElementJson, GradedElement};
use crate::scalar::Scalar;
use crate::tame::TameProblem;

/// Machine-readable summary of a solve, success or failure.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeJson {
    pub problem: String,
    pub grading: String,
    pub provenance: String,
    pub constants: Vec<f64>,
    pub status: &'static str,
    /// Failure kind, e.g. `"GuardExit"`; absent on success.
    pub error: Option<&'static str>,
    pub message: Option<String>,
    /// Parameter reached.
    pub t: f64,
    pub eps: f64,
    pub monitored_levels: usize,
    pub steps_attempted: usize,
    pub steps_accepted: usize,
    pub x: ElementJson,
    /// `‖f(x) − y‖_n` at monitored levels.
    pub residual: Vec<f64>,
    pub norms: Vec<f64>,
    pub bounds: Vec<f64>,
    pub certification: Option<Certification>,
    pub tame_violations: usize,
    pub box_violations: usize,
}

impl OutcomeJson {
    fn base<T: Scalar>(problem: &TameProblem<T>, x: &GradedElement<T>, y: &GradedElement<T>, mon: usize) -> Self {
        let residual = problem
            .eval(x)
            .try_sub(y)
            .and_then(|e| e.norms(mon))
            .map(|v| v.into_iter().map(Scalar::as_f64).collect())
            .unwrap_or_default();
        Self {
            problem: problem.name().to_string(),
            grading: problem.spec().label(),
            provenance: problem.provenance().label().to_string(),
            constants: problem.constants().to_f64(),
            status: "certified",
            error: None,
            message: None,
            t: 1.0,
            eps: f64::NAN,
            monitored_levels: mon,
            steps_attempted: 0,
            steps_accepted: 0,
            x: x.to_json(),
            residual,
            norms: x.all_norms().into_iter().map(Scalar::as_f64).collect(),
            bounds: Vec::new(),
            certification: None,
            tame_violations: 0,
            box_violations: 0,
        }
    }

    pub fn from_outcome<T: Scalar>(problem: &TameProblem<T>, y: &GradedElement<T>, outcome: &SolveOutcome<T>) -> Self {
        let mut out = Self::base(problem, &outcome.x_final, y, outcome.monitored_levels);
        out.status = if outcome.is_certified() { "certified" } else { "uncertified" };
        out.eps = outcome.eps.as_f64();
        out.steps_attempted = outcome.trace.records.len();
        out.steps_accepted = outcome.trace.accepted_count();
        out.bounds = outcome.bounds.iter().map(|b| b.as_f64()).collect();
        out.certification = Some(outcome.certified.clone());
        out.tame_violations = outcome.tame_violations;
        out.box_violations = outcome.box_violations;
        out
    }

    pub fn from_failure<T: Scalar>(
        problem: &TameProblem<T>,
        y: &GradedElement<T>,
        eps: T,
        failure: &SolveFailure<T>,
    ) -> Self {
        let mut out = Self::base(problem, &failure.x_last, y, failure.trace.monitored_levels);
        out.status = "failed";
        out.error = Some(failure.error.kind());
        out.message = Some(failure.error.to_string());
        out.t = failure.t.as_f64();
        out.eps = eps.as_f64();
        out.steps_attempted = failure.trace.records.len();
        out.steps_accepted = failure.trace.accepted_count();
        out
    }
}
