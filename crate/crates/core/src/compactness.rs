//! Desk-scale counterparts of the compactness criterion for graded spaces:
//! per-level boundedness profiles, diagonal extraction of a subsequence
//! that is Cauchy at every level, and membership through per-level
//! distances.
//!
//! At finite truncation every bounded set is relatively compact, so these
//! routines exercise the combinatorics of the argument (nested index sets,
//! the diagonal pick `k_i > k_{i-1}`) rather than the compact-embedding
//! hypothesis itself. A failed extraction is inconclusive, never a
//! counterexample.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graded_space::{distance_n, BoundSeq, GradedElement};
use crate::scalar::Scalar;

type Generator<T> = Arc<dyn Fn(usize) -> GradedElement<T> + Send + Sync>;

/// A deterministic sequence `k ↦ x_k`, optionally with declared per-level
/// bounds.
#[derive(Clone)]
pub struct SequenceSource<T: Scalar> {
    generator: Generator<T>,
    declared_bounds: Option<BoundSeq<T>>,
}

impl<T: Scalar> SequenceSource<T> {
    /// `generator` must be pure: the same `k` always yields the same element.
    pub fn new(generator: impl Fn(usize) -> GradedElement<T> + Send + Sync + 'static) -> Self {
        Self { generator: Arc::new(generator), declared_bounds: None }
    }

    pub fn with_bounds(mut self, bounds: BoundSeq<T>) -> Self {
        self.declared_bounds = Some(bounds);
        self
    }

    pub fn declared_bounds(&self) -> Option<&BoundSeq<T>> {
        self.declared_bounds.as_ref()
    }

    pub fn get(&self, k: usize) -> GradedElement<T> {
        (self.generator)(k)
    }
}

impl<T: Scalar> fmt::Debug for SequenceSource<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SequenceSource").field("declared_bounds", &self.declared_bounds).finish()
    }
}

/// Indices `k_0 < k_1 < ...` of an extracted subsequence with the diameter
/// achieved at each level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionResult<T> {
    pub indices: Vec<usize>,
    /// `max_{i,j >= n} ‖x_{k_i} − x_{k_j}‖_n` for `n = 0..=levels`.
    pub per_level_tol: Vec<T>,
}

/// `s_n = max_{k < count} ‖x_k‖_n`.
///
/// Rejects the source with [`Error::BoundsViolation`] if it exceeds its
/// declared bounds.
pub fn sup_norms<T: Scalar>(source: &SequenceSource<T>, count: usize) -> Result<BoundSeq<T>> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be >= 1".into()));
    }
    let mut sup: Vec<T> = Vec::new();
    for k in 0..count {
        let norms = source.get(k).all_norms();
        if sup.is_empty() {
            sup = norms;
        } else {
            for (s, n) in sup.iter_mut().zip(norms) {
                *s = s.max(n);
            }
        }
    }
    if let Some(bounds) = &source.declared_bounds {
        for (level, (&observed, &declared)) in sup.iter().zip(bounds.values()).enumerate() {
            if observed > declared {
                return Err(Error::BoundsViolation { level, observed: observed.as_f64(), declared: declared.as_f64() });
            }
        }
    }
    BoundSeq::new(sup)
}

/// Diagonal extraction over nested clusters.
///
/// Stage `n` (for `n = 0..=levels`, in order) keeps, among the indices that
/// survived stage `n-1`, those inside the most populated `tol`-ball of
/// `‖·‖_n` centred at a surviving term (ties go to the smallest centre).
/// The returned `k_i` is the smallest index of stage `min(i, levels)` above
/// `k_{i-1}`, so any two returned terms at positions `>= n` are within
/// `2·tol` of each other in `‖·‖_n`.
pub fn extract_convergent<T: Scalar>(
    source: &SequenceSource<T>,
    levels: usize,
    tol: T,
    want: usize,
    scan_limit: usize,
) -> Result<ExtractionResult<T>> {
    if want < 2 {
        return Err(Error::InvalidArgument(format!("want must be >= 2, got {want}")));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let terms: Vec<GradedElement<T>> = (0..scan_limit).map(|k| source.get(k)).collect();
    if let Some(first) = terms.first() {
        first.spec().check_level(levels)?;
    }
    let exhausted = |found: usize| Error::ExtractionExhausted { scanned: scan_limit, found, want };

    let mut stages: Vec<Vec<usize>> = Vec::with_capacity(levels + 1);
    let mut alive: Vec<usize> = (0..scan_limit).collect();
    for level in 0..=levels {
        let mut best: Vec<usize> = Vec::new();
        for &centre in &alive {
            let ball: Vec<usize> = alive
                .iter()
                .copied()
                .filter(|&k| (&terms[k] - &terms[centre]).norm(level).map(|d| d <= tol).unwrap_or(false))
                .collect();
            if ball.len() > best.len() {
                best = ball;
            }
        }
        alive = best;
        stages.push(alive.clone());
    }

    let mut indices: Vec<usize> = Vec::with_capacity(want);
    for i in 0..want {
        let stage = &stages[i.min(levels)];
        let next = stage.iter().copied().find(|&k| indices.last().is_none_or(|&prev| k > prev));
        match next {
            Some(k) => indices.push(k),
            None => return Err(exhausted(indices.len())),
        }
    }

    let per_level_tol = (0..=levels)
        .map(|level| {
            let tail = &indices[level.min(indices.len())..];
            let mut diameter = T::zero();
            for (a, &i) in tail.iter().enumerate() {
                for &j in &tail[a + 1..] {
                    diameter = diameter.max((&terms[i] - &terms[j]).norm(level)?);
                }
            }
            Ok(diameter)
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(ExtractionResult { indices, per_level_tol })
}

/// `true` iff `d_n(x, sample) <= tol` at every level `n = 0..=N`.
pub fn membership_via_distances<T: Scalar>(x: &GradedElement<T>, sample: &[GradedElement<T>], tol: T) -> Result<bool> {
    if sample.is_empty() {
        return Err(Error::EmptySet);
    }
    for n in 0..x.spec().level_count() {
        if distance_n(x, sample, n)? > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded_space::GradingSpec;

    fn spec() -> Arc<GradingSpec<f64>> {
        GradingSpec::new(8, 3, 4).unwrap()
    }

    #[test]
    fn sup_norm_examples() {
        let s = spec();
        let zero = {
            let s = s.clone();
            SequenceSource::new(move |_| GradedElement::zero(&s))
        };
        assert_eq!(sup_norms(&zero, 5).unwrap(), BoundSeq::zeros(4));

        let sine = {
            let s = s.clone();
            SequenceSource::new(move |_| GradedElement::sin_mode(&s, 1, 1.0).unwrap())
        };
        for v in sup_norms(&sine, 3).unwrap().values() {
            assert!((v - 1.0).abs() < 1e-12);
        }

        let alternating = {
            let s = s.clone();
            SequenceSource::new(move |k| GradedElement::sin_mode(&s, 2, (k % 2) as f64).unwrap())
        };
        let sup = sup_norms(&alternating, 10).unwrap();
        for (n, v) in sup.values().iter().enumerate() {
            // odd-order derivatives are cosines, sampled exactly at θ = 0
            let exact = 2f64.powi(n as i32);
            assert!(*v <= exact && *v >= exact * 0.99, "level {n}: {v}");
        }
    }

    #[test]
    fn sup_norms_grow_with_count() {
        let s = spec();
        let src = SequenceSource::new(move |k| GradedElement::cos_mode(&s, 1 + k % 5, 1.0 + k as f64).unwrap());
        let small = sup_norms(&src, 3).unwrap();
        let large = sup_norms(&src, 8).unwrap();
        assert!(small.values().iter().zip(large.values()).all(|(a, b)| a <= b));
    }

    #[test]
    fn declared_bounds_are_enforced() {
        let s = spec();
        let src = SequenceSource::new(move |k| GradedElement::constant(&s, k as f64))
            .with_bounds(BoundSeq::constant(4, 3.0).unwrap());
        assert!(sup_norms(&src, 4).is_ok());
        assert!(matches!(sup_norms(&src, 5), Err(Error::BoundsViolation { level: 0, .. })));
    }

    #[test]
    fn constant_sequence_extracts_prefix() {
        let s = spec();
        let src = SequenceSource::new(move |_| GradedElement::cos_mode(&s, 2, 0.3).unwrap());
        let r = extract_convergent(&src, 3, 0.1, 5, 20).unwrap();
        assert_eq!(r.indices, vec![0, 1, 2, 3, 4]);
        assert!(r.per_level_tol.iter().all(|t| *t == 0.0));
    }

    #[test]
    fn alternating_sequence_keeps_one_parity() {
        let s = spec();
        let src =
            SequenceSource::new(move |k| GradedElement::sin_mode(&s, 1, if k % 2 == 0 { 1.0 } else { -1.0 }).unwrap());
        let r = extract_convergent(&src, 2, 0.1, 4, 20).unwrap();
        assert_eq!(r.indices, vec![0, 2, 4, 6]);
    }

    #[test]
    fn exhaustion_is_inconclusive() {
        let s = spec();
        let src = SequenceSource::new(move |k| GradedElement::constant(&s, k as f64));
        let err = extract_convergent(&src, 1, 0.1, 3, 10).unwrap_err();
        assert!(matches!(err, Error::ExtractionExhausted { found: 1, want: 3, .. }));
    }

    #[test]
    fn membership_examples() {
        let s = spec();
        let x = GradedElement::cos_mode(&s, 3, 0.2).unwrap();
        assert!(membership_via_distances(&x, &[GradedElement::zero(&s), x.clone()], 1e-15).unwrap());
        let one = GradedElement::constant(&s, 1.0);
        assert!(!membership_via_distances(&one, &[GradedElement::zero(&s)], 0.5).unwrap());
        let sample = [GradedElement::zero(&s), one];
        assert!(membership_via_distances(&GradedElement::constant(&s, 0.9), &sample, 0.15).unwrap());
        assert_eq!(membership_via_distances(&x, &[], 0.1).unwrap_err(), Error::EmptySet);
    }
}
