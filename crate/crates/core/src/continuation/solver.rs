use super::{
    Certification, ContinuationConfig, ContinuationTrace, RejectCause, SolveError, SolveFailure, SolveOutcome,
    TamePolicy, TraceRecord,
};
use crate::error::{Error, Result};
use crate::graded_space::{bound_product, shift_levels, BoundSeq, GradedElement};
use crate::scalar::Scalar;
use crate::tame::{ConstantsProvenance, TameProblem};

/// Result of one step test.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCheck<T> {
    /// Step defects at levels `0..=levels`; NaN if the guard failed.
    pub defects: Vec<T>,
    pub accepted: bool,
    pub cause: Option<RejectCause>,
}

/// Tests `‖f(x+rh) − f(x) − r·ȳ‖_n <= r·ε` for `n = 0..=levels`.
///
/// A guard failure at `x + r·h` is a rejection, not an error; a guard
/// failure at `x` itself is an error.
pub fn step_acceptable<T: Scalar>(
    problem: &TameProblem<T>,
    x: &GradedElement<T>,
    h: &GradedElement<T>,
    ybar: &GradedElement<T>,
    r: T,
    eps: T,
    levels: usize,
) -> Result<StepCheck<T>> {
    if !problem.domain_guard(x) {
        return Err(Error::GuardViolation { problem: problem.name().to_string() });
    }
    problem.spec().check_level(levels)?;
    Ok(try_step(problem, x, h, ybar, r, eps, levels)?.0)
}

type Trial<T> = (StepCheck<T>, Option<(GradedElement<T>, GradedElement<T>)>);

/// Step test; hands back `(x + rh, f(x + rh))` on acceptance.
fn try_step<T: Scalar>(
    problem: &TameProblem<T>,
    x: &GradedElement<T>,
    h: &GradedElement<T>,
    ybar: &GradedElement<T>,
    r: T,
    eps: T,
    levels: usize,
) -> Result<Trial<T>> {
    let next = x.axpy(r, h)?;
    if !problem.domain_guard(&next) {
        return Ok((
            StepCheck { defects: vec![T::nan(); levels + 1], accepted: false, cause: Some(RejectCause::Guard) },
            None,
        ));
    }
    let defects = problem.increment(x, h, r).axpy(-r, ybar)?.norms(levels)?;
    let limit = r * eps;
    let accepted = defects.iter().all(|&d| d <= limit);
    let check = StepCheck { defects, accepted, cause: (!accepted).then_some(RejectCause::Defect) };
    let next = accepted.then(|| {
        let f_next = problem.eval(&next);
        (next, f_next)
    });
    Ok((check, next))
}

/// Per-state quantities written to the trace.
struct State<T> {
    resid: Vec<T>,
    norm: Vec<T>,
    bound: Vec<Option<T>>,
    box_ok: bool,
}

/// Path-follows `t·ȳ` from `x = 0, t = 0` to `t = 1`.
///
/// After every acceptance the step grows by `growth` (capped at `1 − t`);
/// each rejection halves it. The direction `h` is recomputed at every new
/// point.
pub fn solve<T: Scalar>(
    problem: &TameProblem<T>,
    y: &GradedElement<T>,
    config: &ContinuationConfig<T>,
) -> std::result::Result<SolveOutcome<T>, SolveFailure<T>> {
    let spec = problem.spec();
    let mut trace = ContinuationTrace::new(config.monitored_levels);
    let mut x = GradedElement::zero(spec);
    let mut t = T::zero();
    macro_rules! fail {
        ($err:expr) => {
            return Err(SolveFailure { error: $err.into(), trace, x_last: x, t })
        };
    }

    if let Err(e) = config.validate(spec) {
        fail!(e);
    }
    if let Err(e) = y.check_same(&x) {
        fail!(e);
    }
    let d = problem.loss();
    let Some(checkable) = problem.checkable_levels() else {
        fail!(Error::UnavailableLevel { level: 0, needed: d, max: spec.max_level() });
    };
    let mon = config.monitored_levels;
    let enforce = match config.tame_policy {
        TamePolicy::Enforce => true,
        TamePolicy::Record => false,
        TamePolicy::Auto => !matches!(problem.provenance(), ConstantsProvenance::Estimated { .. }),
    };

    // s_n = c_n ‖ȳ‖_{n+d}, n <= N − d, on the reindexed target grading.
    let y_norms = y.all_norms();
    let y_shifted = match BoundSeq::new(y_norms).and_then(|b| shift_levels(&b, d)) {
        Ok(b) => b,
        Err(e) => fail!(e),
    };
    let s = match bound_product(&problem.constants().truncated(checkable + 1), &y_shifted) {
        Ok(s) => s,
        Err(e) => fail!(e),
    };

    let state_at = |x: &GradedElement<T>, fx: &GradedElement<T>, t: T| -> Result<State<T>> {
        let resid = fx.axpy(-t, y)?.norms(mon)?;
        let all = x.all_norms();
        let bound = (0..=mon).map(|n| (n <= checkable).then(|| t * s.get(n))).collect();
        let box_ok = all.iter().zip(s.values()).all(|(&norm, &b)| norm <= t * b * (T::one() + config.box_slack));
        Ok(State { resid, norm: all[..=mon].to_vec(), bound, box_ok })
    };

    let mut fx = problem.eval(&x);
    let mut r_trial = config.r0;
    let mut attempts = 0usize;
    let mut tame_violations = 0usize;
    let mut box_violations = 0usize;

    // Later points passed the guard when their step was accepted.
    if !problem.domain_guard(&x) {
        fail!(SolveError::GuardExit { t: t.as_f64() });
    }
    while t < T::one() {
        let h = match problem.right_inverse(&x, y) {
            Ok(h) => h,
            Err(Error::GuardViolation { .. }) => fail!(SolveError::GuardExit { t: t.as_f64() }),
            Err(e) => fail!(e),
        };
        let h_norms = h.all_norms();
        for n in 0..=checkable {
            let bound = s.get(n);
            if h_norms[n] > bound * (T::one() + config.tame_slack) {
                if enforce {
                    fail!(SolveError::TameViolation {
                        t: t.as_f64(),
                        level: n,
                        norm: h_norms[n].as_f64(),
                        bound: bound.as_f64(),
                    });
                }
                tame_violations += 1;
                break;
            }
        }
        let state = match state_at(&x, &fx, t) {
            Ok(st) => st,
            Err(e) => fail!(e),
        };
        if !state.box_ok {
            box_violations += 1;
        }

        let remaining = T::one() - t;
        let mut r = r_trial.min(remaining);
        let mut last_cause = None;
        loop {
            if attempts >= config.max_steps {
                fail!(SolveError::MaxSteps { t: t.as_f64(), steps: attempts });
            }
            if r < config.r_min && r < remaining {
                if last_cause == Some(RejectCause::Guard) {
                    fail!(SolveError::GuardExit { t: t.as_f64() });
                }
                let worst = trace
                    .records
                    .last()
                    .map(|rec| {
                        rec.defect
                            .iter()
                            .enumerate()
                            .fold((0, T::zero()), |best, (n, &v)| if v > best.1 { (n, v) } else { best })
                    })
                    .unwrap_or((0, T::zero()));
                let inverse_residual = problem.dderiv(&x, &h).try_sub(y).map(|e| e.all_norms());
                let inverse_residual =
                    inverse_residual.map(|v| v.into_iter().fold(T::zero(), T::max).as_f64()).unwrap_or(f64::NAN);
                fail!(SolveError::StepUnderflow {
                    t: t.as_f64(),
                    r: r.as_f64(),
                    level: worst.0,
                    defect: worst.1.as_f64(),
                    inverse_residual,
                });
            }
            attempts += 1;
            let (check, next) = match try_step(problem, &x, &h, y, r, config.eps, mon) {
                Ok(v) => v,
                Err(e) => fail!(e),
            };
            trace.records.push(TraceRecord {
                t,
                r,
                accepted: check.accepted,
                defect: check.defects,
                resid: state.resid.clone(),
                norm: state.norm.clone(),
                bound: state.bound.clone(),
                cause: check.cause,
                box_ok: state.box_ok,
            });
            if let Some((x_next, f_next)) = next {
                x = x_next;
                fx = f_next;
                t = if r == remaining { T::one() } else { t + r };
                r_trial = (r * config.growth).min(T::one());
                break;
            }
            last_cause = check.cause;
            r = r * T::lit(0.5);
        }
    }

    let final_residual = match fx.try_sub(y).and_then(|e| e.norms(mon)) {
        Ok(v) => v,
        Err(e) => fail!(e),
    };
    let final_norms = x.all_norms();
    let residual_limit = config.eps * (T::one() + config.roundoff);
    let certified = Certification {
        residual: final_residual.iter().map(|&r| r <= residual_limit).collect(),
        bound: (0..spec.level_count())
            .map(|n| (n <= checkable).then(|| final_norms[n] <= s.get(n) * (T::one() + config.tame_slack)))
            .collect(),
    };
    Ok(SolveOutcome {
        x_final: x,
        trace,
        certified,
        final_residual,
        final_norms,
        bounds: s.values().to_vec(),
        eps: config.eps,
        roundoff: config.roundoff,
        monitored_levels: mon,
        tame_violations,
        box_violations,
    })
}
