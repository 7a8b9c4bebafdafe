//! Runtime validators for the tame right-inverse contract.

use rand::Rng;
use serde::Serialize;

use super::{ConstantsProvenance, GradedMap, TameProblem};
use crate::error::{Error, Result};
use crate::graded_space::{bound_product, box_contains, shift_levels, BoundSeq, GradedElement};
use crate::sampling::{random_base_point, random_target, SAMPLER_DESCRIPTION};
use crate::scalar::Scalar;

/// Relative tolerance on `‖f'(x; u) − v‖_n / (1 + ‖v‖_n)`.
pub const INVERSE_RESIDUAL_TOL: f64 = 1e-8;

/// Safety margin applied to sampled ratio maxima.
pub const ESTIMATE_MARGIN: f64 = 0.1;

const SAMPLER_RETRIES: usize = 100;

/// Every this many trials the base point also gets a full single-mode sweep.
pub const MODE_SWEEP_EVERY: usize = 5;

/// Phases per mode in the sweep.
pub const SWEEP_PHASES: usize = 8;

/// `(f(x + t·h) − f(x)) / t`.
pub fn directional_derivative_fd<T: Scalar>(
    problem: &TameProblem<T>,
    x: &GradedElement<T>,
    h: &GradedElement<T>,
    t: T,
) -> Result<GradedElement<T>> {
    if !(t > T::zero()) {
        return Err(Error::InvalidArgument(format!("step t must be positive, got {t}")));
    }
    let shifted = x.axpy(t, h)?;
    if !problem.domain_guard(x) || !problem.domain_guard(&shifted) {
        return Err(Error::GuardViolation { problem: problem.name().to_string() });
    }
    let fx = problem.eval(x);
    Ok(problem.eval(&shifted).try_sub(&fx)?.scale(t.recip()))
}

#[derive(Debug, Clone, Serialize)]
pub struct TameCheckReport<T> {
    /// `‖f'(x; u) − v‖_n` for `n = 0..=N`.
    pub inverse_residual: Vec<T>,
    /// `‖u‖_n / (c_n ‖v‖_{n+d})`; `None` for levels above `N − d`.
    pub bound_ratio: Vec<Option<T>>,
    pub provenance: String,
    pub pass: bool,
}

/// Checks `f'(x; u) = v` and `‖u‖_n <= c_n ‖v‖_{n+d}` for `u` from the
/// problem's right inverse.
pub fn check_tame_at<T: Scalar>(
    problem: &TameProblem<T>,
    x: &GradedElement<T>,
    v: &GradedElement<T>,
    slack: T,
) -> Result<TameCheckReport<T>> {
    let spec = problem.spec();
    let d = problem.loss();
    let checkable =
        problem.checkable_levels().ok_or(Error::UnavailableLevel { level: 0, needed: d, max: spec.max_level() })?;
    if !problem.domain_guard(x) {
        return Err(Error::GuardViolation { problem: problem.name().to_string() });
    }
    let u = problem.right_inverse(x, v)?;
    let residual = problem.dderiv(x, &u).try_sub(v)?.all_norms();
    let u_norms = u.all_norms();
    let v_norms = v.all_norms();
    let tol = T::lit(INVERSE_RESIDUAL_TOL);
    let mut pass = true;
    let mut bound_ratio = Vec::with_capacity(spec.level_count());
    for n in 0..spec.level_count() {
        if n > checkable {
            bound_ratio.push(None);
            continue;
        }
        let bound = problem.constants().get(n) * v_norms[n + d];
        let ratio = if u_norms[n].is_zero() {
            T::zero()
        } else if bound.is_zero() {
            T::infinity()
        } else {
            u_norms[n] / bound
        };
        pass &= ratio <= T::one() + slack;
        pass &= residual[n] <= tol * (T::one() + v_norms[n]);
        bound_ratio.push(Some(ratio));
    }
    Ok(TameCheckReport {
        inverse_residual: residual,
        bound_ratio,
        provenance: problem.provenance().label().to_string(),
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionReport {
    pub samples: usize,
    pub failures: usize,
    /// Largest `‖u‖_n / s_n` seen over samples and checked levels.
    pub worst_ratio: f64,
}

impl InclusionReport {
    pub fn holds(&self) -> bool {
        self.failures == 0
    }
}

/// Sampled form of `Π_{b.s}(Y) ⊂ f'(x; Π_s(X))`: draws `v` with
/// `‖v‖_{n+d} <= s_n / c_n` and checks `right_inverse(x, v) ∈ Π_s`.
pub fn sampled_box_inclusion<T: Scalar, R: Rng + ?Sized>(
    problem: &TameProblem<T>,
    x: &GradedElement<T>,
    s: &BoundSeq<T>,
    samples: usize,
    slack: T,
    rng: &mut R,
) -> Result<bool> {
    Ok(sampled_box_inclusion_report(problem, x, s, samples, slack, rng)?.holds())
}

pub fn sampled_box_inclusion_report<T: Scalar, R: Rng + ?Sized>(
    problem: &TameProblem<T>,
    x: &GradedElement<T>,
    s: &BoundSeq<T>,
    samples: usize,
    slack: T,
    rng: &mut R,
) -> Result<InclusionReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be >= 1".into()));
    }
    let spec = problem.spec();
    let d = problem.loss();
    let checkable =
        problem.checkable_levels().ok_or(Error::UnavailableLevel { level: 0, needed: d, max: spec.max_level() })?;
    if !problem.domain_guard(x) {
        return Err(Error::GuardViolation { problem: problem.name().to_string() });
    }
    if s.len() < checkable + 1 {
        return Err(Error::LengthMismatch { left: s.len(), right: checkable + 1 });
    }
    let s = s.truncated(checkable + 1);
    let b = problem.inverse_constants().truncated(checkable + 1);
    // Target box on the reindexed grading: |v|_{n+d} <= (b.s)_n.
    let target_box = bound_product(&b, &s)?;

    let mut failures = 0;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let v = draw_in_box(problem, &target_box, rng)?;
        let u = problem.right_inverse(x, &v)?;
        if !box_contains(&u, &s, slack) {
            failures += 1;
        }
        let u_norms = u.norms(checkable)?;
        for (norm, bound) in u_norms.iter().zip(s.values()) {
            if bound.is_infinite() {
                continue;
            }
            let ratio = if norm.is_zero() { 0.0 } else { (*norm / *bound).as_f64() };
            worst = worst.max(ratio);
        }
    }
    Ok(InclusionReport { samples, failures, worst_ratio: worst })
}

/// Random `v` with shifted norms inside `target_box`, pushed towards the
/// boundary of its most binding level.
fn draw_in_box<T: Scalar, R: Rng + ?Sized>(
    problem: &TameProblem<T>,
    target_box: &BoundSeq<T>,
    rng: &mut R,
) -> Result<GradedElement<T>> {
    let spec = problem.spec();
    let d = problem.loss();
    if target_box.values().iter().any(|b| b.is_zero()) {
        return Ok(GradedElement::zero(spec));
    }
    for _ in 0..SAMPLER_RETRIES {
        let w = random_target(spec, rng);
        let shifted = shift_levels(&BoundSeq::new(w.all_norms())?, d)?;
        let mut scale = T::infinity();
        for (norm, bound) in shifted.values().iter().zip(target_box.values()) {
            if !bound.is_infinite() && !norm.is_zero() {
                scale = scale.min(*bound / *norm);
            }
        }
        if shifted.values().iter().all(|n| n.is_zero()) {
            continue;
        }
        if scale.is_infinite() {
            scale = T::one();
        }
        let v = w.scale(scale * T::lit(rng.gen_range(0.5..=1.0)));
        let v_shifted = shift_levels(&BoundSeq::new(v.all_norms())?, d)?;
        let inside = v_shifted.values().iter().zip(target_box.values()).all(|(n, b)| b.is_infinite() || n <= b);
        if inside {
            return Ok(v);
        }
    }
    Err(Error::SamplerFailure(SAMPLER_RETRIES))
}

/// Sampled tame constants for a map.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantEstimate<T: Scalar> {
    pub constants: BoundSeq<T>,
    /// Largest observed `‖u‖_n / ‖v‖_{n+d}` for each estimated level.
    pub max_ratio: Vec<T>,
    /// Highest level actually estimated; later entries repeat its value.
    pub estimated_levels: usize,
    pub trials: usize,
    pub margin: f64,
    pub sampler: &'static str,
}

impl<T: Scalar> ConstantEstimate<T> {
    pub fn provenance(&self) -> ConstantsProvenance {
        ConstantsProvenance::Estimated { trials: self.trials, margin: self.margin, sampler: self.sampler.to_string() }
    }
}

/// `c_n = (1 + 0.1) · max ‖right_inverse(x, v)‖_n / ‖v‖_{n+d}` over
/// `trials` sampled pairs, for `n <= min(levels, N − d)`.
///
/// Every [`MODE_SWEEP_EVERY`]-th base point is also paired with each single
/// mode `cos(kθ + φ)`, `k = 1..=K`, at [`SWEEP_PHASES`] phases.
pub fn estimate_constants<T: Scalar, R: Rng + ?Sized>(
    map: &dyn GradedMap<T>,
    trials: usize,
    levels: usize,
    rng: &mut R,
) -> Result<ConstantEstimate<T>> {
    if trials < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 trials, got {trials}")));
    }
    let spec = map.spec();
    let d = map.loss();
    let top = spec
        .max_level()
        .checked_sub(d)
        .ok_or(Error::UnavailableLevel { level: 0, needed: d, max: spec.max_level() })?
        .min(levels);
    let mut max_ratio = vec![T::zero(); top + 1];
    let mut informative = 0;
    let mut record = |u: &GradedElement<T>, v: &GradedElement<T>| -> Result<()> {
        let v_norms = v.all_norms();
        let u_norms = u.norms(top)?;
        for n in 0..=top {
            if !v_norms[n + d].is_zero() {
                max_ratio[n] = max_ratio[n].max(u_norms[n] / v_norms[n + d]);
            }
        }
        Ok(())
    };
    for trial in 0..trials {
        let x = draw_base_point(map, rng)?;
        let v = random_target(spec, rng);
        if v.all_norms()[d..].iter().any(|n| !n.is_zero()) {
            informative += 1;
            record(&map.right_inverse(&x, &v)?, &v)?;
        }
        if trial % MODE_SWEEP_EVERY == 0 {
            // Low single modes have small high norms, so they carry the
            // largest ratios; random draws rarely hit them with a bad phase.
            // Ratios grow with ‖x‖_0, so the sweep runs at the sampling radius.
            let sup = x.norm(0)?;
            let x = Some(sup)
                .filter(|s| *s > T::zero())
                .map(|s| x.scale(T::lit(map.base_radius()) / s))
                .filter(|full| map.domain_guard(full))
                .unwrap_or(x);
            for k in 1..=spec.degree() {
                let c = GradedElement::cos_mode(spec, k, T::one())?;
                let s = GradedElement::sin_mode(spec, k, T::one())?;
                let (uc, us) = (map.right_inverse(&x, &c)?, map.right_inverse(&x, &s)?);
                for j in 0..SWEEP_PHASES {
                    let phase = T::lit(std::f64::consts::PI * j as f64 / SWEEP_PHASES as f64);
                    let (cp, sp) = (phase.cos(), phase.sin());
                    record(&uc.scale(cp).axpy(sp, &us)?, &c.scale(cp).axpy(sp, &s)?)?;
                }
            }
        }
    }
    if informative == 0 || max_ratio.iter().any(|r| r.is_zero()) {
        return Err(Error::DegenerateSampling);
    }
    let factor = T::lit(1.0 + ESTIMATE_MARGIN);
    let mut constants: Vec<T> = max_ratio.iter().map(|&r| r * factor).collect();
    let last = constants[top];
    constants.resize(spec.level_count(), last);
    Ok(ConstantEstimate {
        constants: BoundSeq::new(constants)?,
        max_ratio,
        estimated_levels: top,
        trials,
        margin: ESTIMATE_MARGIN,
        sampler: SAMPLER_DESCRIPTION,
    })
}

fn draw_base_point<T: Scalar, R: Rng + ?Sized>(map: &dyn GradedMap<T>, rng: &mut R) -> Result<GradedElement<T>> {
    for _ in 0..SAMPLER_RETRIES {
        let x = random_base_point(map.spec(), rng, map.base_radius());
        if map.domain_guard(&x) {
            return Ok(x);
        }
    }
    Err(Error::SamplerFailure(SAMPLER_RETRIES))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::graded_space::GradingSpec;
    use crate::tame::{identity_problem, scaled_identity_problem, smoothing_problem, QuadraticMap, SmoothingMap};

    fn spec() -> Arc<GradingSpec<f64>> {
        GradingSpec::new(16, 4, 4).unwrap()
    }

    #[test]
    fn fd_of_linear_map_is_exact() {
        let s = spec();
        let p = scaled_identity_problem(&s, 3.0).unwrap();
        let x = GradedElement::cos_mode(&s, 2, 0.4).unwrap();
        let h = GradedElement::sin_mode(&s, 5, 1.0).unwrap();
        let q = directional_derivative_fd(&p, &x, &h, 0.5).unwrap();
        assert!((&q - &p.eval(&h)).norm(4).unwrap() < 1e-13);
        assert!(directional_derivative_fd(&p, &x, &h, 0.0).is_err());
    }

    #[test]
    fn fd_of_quadratic_at_zero() {
        // (f(th) - f(0))/t = h + t·h²
        let s = spec();
        let p = crate::tame::quadratic_problem(&s, 1.0, BoundSeq::ones(5), ConstantsProvenance::Supplied).unwrap();
        let h = GradedElement::sin_mode(&s, 1, 1.0).unwrap();
        let zero = GradedElement::zero(&s);
        let t = 1e-3;
        let q = directional_derivative_fd(&p, &zero, &h, t).unwrap();
        let expected = h.axpy(t, &h.pointwise_mul(&h).unwrap()).unwrap();
        let gap = (&q - &expected).norm(4).unwrap();
        // cancellation floor: 2^4 · ε_mach / t ≈ 4e-12
        assert!(gap < 1e-10, "{gap}");
    }

    #[test]
    fn fd_outside_guard_fails() {
        let s = spec();
        let p = crate::tame::quadratic_problem(&s, 1.0, BoundSeq::ones(5), ConstantsProvenance::Supplied).unwrap();
        let x = GradedElement::constant(&s, -0.2);
        let h = GradedElement::constant(&s, -1.0);
        assert!(matches!(directional_derivative_fd(&p, &x, &h, 0.1), Err(Error::GuardViolation { .. })));
    }

    #[test]
    fn tame_check_examples() {
        let s = spec();
        let id = identity_problem(&s);
        let v = GradedElement::cos_mode(&s, 4, 0.7).unwrap();
        let report = check_tame_at(&id, &GradedElement::zero(&s), &v, 0.0).unwrap();
        assert!(report.pass);
        assert!(report.inverse_residual.iter().all(|r| *r == 0.0));
        assert!(report.bound_ratio.iter().all(|r| *r == Some(1.0)));

        let zero = GradedElement::zero(&s);
        let report = check_tame_at(&id, &zero, &zero, 0.0).unwrap();
        assert!(report.bound_ratio.iter().all(|r| *r == Some(0.0)));
        assert!(report.pass);

        // u = 4 sin 3θ, ratio = 4·3^n / (2·3^{n+1}) = 2/3 on modes whose sup
        // is attained on the grid.
        let smoothing = smoothing_problem(&s);
        let v = GradedElement::sin_mode(&s, 3, 1.0).unwrap();
        let report = check_tame_at(&smoothing, &zero, &v, 0.0).unwrap();
        assert!(report.pass);
        assert_eq!(report.bound_ratio[4], None);
        for r in report.bound_ratio.iter().take(4) {
            assert!((r.unwrap() - 2.0 / 3.0).abs() < 1e-2, "{r:?}");
        }
    }

    #[test]
    fn analytic_smoothing_constant_fails_for_conjugate_heavy_target() {
        let s = spec();
        let mut coeffs = vec![0.0; s.coeff_len()];
        for k in 1..=16 {
            coeffs[k] = 1.0 / (k * k) as f64;
        }
        let v = GradedElement::from_coeffs(&s, coeffs).unwrap();
        let report = check_tame_at(&smoothing_problem(&s), &GradedElement::zero(&s), &v, 1e-6).unwrap();
        assert!(!report.pass);
        assert!(report.bound_ratio[0].unwrap() > 1.3);
    }

    #[test]
    fn inclusion_examples() {
        let s = spec();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let id = identity_problem(&s);
        let zero = GradedElement::zero(&s);
        assert!(sampled_box_inclusion(&id, &zero, &BoundSeq::ones(5), 50, 0.0, &mut rng).unwrap());
        assert!(sampled_box_inclusion(&id, &zero, &BoundSeq::zeros(5), 10, 0.0, &mut rng).unwrap());
        let smoothing = smoothing_problem(&s);
        let s_box = BoundSeq::new(vec![1.0, 1.0, 2.0, 4.0, 8.0]).unwrap();
        assert!(sampled_box_inclusion(&smoothing, &zero, &s_box, 50, 1e-6, &mut rng).unwrap());
    }

    #[test]
    fn inclusion_detects_understated_constants() {
        let s = spec();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let id = identity_problem(&s)
            .with_constants(BoundSeq::constant(5, 0.5).unwrap(), ConstantsProvenance::Supplied)
            .unwrap();
        let report =
            sampled_box_inclusion_report(&id, &GradedElement::zero(&s), &BoundSeq::ones(5), 20, 1e-6, &mut rng)
                .unwrap();
        assert_eq!(report.failures, 20);
    }

    #[test]
    fn estimate_examples() {
        let s = spec();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let id = crate::tame::ScaledIdentityMap::new(&s, 1.0).unwrap();
        let est = estimate_constants(&id, 100, 4, &mut rng).unwrap();
        for c in est.constants.values() {
            assert!((c - 1.1).abs() < 1e-12);
        }
        let half = crate::tame::ScaledIdentityMap::new(&s, 2.0).unwrap();
        let est = estimate_constants(&half, 100, 4, &mut rng).unwrap();
        for c in est.constants.values() {
            assert!((c - 0.55).abs() < 1e-12);
        }
        let est = estimate_constants(&SmoothingMap::new(&s), 200, 4, &mut rng).unwrap();
        assert_eq!(est.estimated_levels, 3);
        for c in est.constants.values() {
            assert!(*c >= 4.0 / 3.0 * 1.1 - 1e-9 && *c <= 2.0 * 1.1 + 1e-9, "{c}");
        }
        assert!(estimate_constants(&half, 99, 4, &mut rng).is_err());
    }

    #[test]
    fn estimated_quadratic_constants_are_reasonable() {
        let s = spec();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let est = estimate_constants(&QuadraticMap::new(&s, 1.0), 200, 4, &mut rng).unwrap();
        // 1/(1+2x) with |x| <= 0.1 lies in [0.83, 1.25].
        assert!(est.constants.get(0) > 1.0 && est.constants.get(0) < 2.0);
    }
}
