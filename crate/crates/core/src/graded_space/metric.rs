use serde::Serialize;

use super::{BoundSeq, GradedElement};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Value of the translation-invariant Fréchet metric
/// `ρ(x, y) = max_n 2^{-n} ‖x−y‖_n / (1 + ‖x−y‖_n)` computed over the
/// retained levels `n <= N`.
///
/// Every omitted term (`n > N`) is strictly below `2^{-(N+1)}`, so the
/// untruncated value lies in `[value, max(value, truncation_slack))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrechetDistance<T> {
    pub value: T,
    pub truncation_slack: T,
}

impl<T: Scalar> FrechetDistance<T> {
    /// Upper bound on the untruncated metric.
    pub fn upper(&self) -> T {
        self.value.max(self.truncation_slack)
    }
}

/// Single term of the metric at level `n` for a difference of norm `dist`.
pub fn metric_term<T: Scalar>(n: usize, dist: T) -> T {
    T::lit(0.5).powi(n as i32) * dist / (T::one() + dist)
}

pub fn metric<T: Scalar>(x: &GradedElement<T>, y: &GradedElement<T>) -> Result<FrechetDistance<T>> {
    let diff = x.try_sub(y)?;
    let levels = x.spec().max_level();
    let value = diff.all_norms().into_iter().enumerate().map(|(n, d)| metric_term(n, d)).fold(T::zero(), T::max);
    Ok(FrechetDistance { value, truncation_slack: T::lit(0.5).powi(levels as i32 + 1) })
}

/// `true` iff `‖x‖_n <= s_n (1 + slack)` for every level `s` bounds.
///
/// # Panics
///
/// If `s` has more entries than the grading has levels.
pub fn box_contains<T: Scalar>(x: &GradedElement<T>, s: &BoundSeq<T>, slack: T) -> bool {
    let levels = x.spec().level_count();
    assert!(s.len() <= levels, "bound sequence has {} levels, grading has {levels}", s.len());
    if s.is_empty() {
        return true;
    }
    let norms = x.norms(s.len() - 1).expect("levels checked above");
    norms.iter().zip(s.values()).all(|(&norm, &bound)| bound.is_infinite() || norm <= bound * (T::one() + slack))
}

/// `d_n(x, A) = min_{a∈A} ‖x − a‖_n` over a finite sample.
pub fn distance_n<T: Scalar>(x: &GradedElement<T>, set: &[GradedElement<T>], n: usize) -> Result<T> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    x.spec().check_level(n)?;
    let mut best = T::infinity();
    for a in set {
        best = best.min(x.try_sub(a)?.norm(n)?);
    }
    Ok(best)
}
