//! Problems `f: X → Y` with a tame right inverse of the directional
//! derivative: for every admissible `x` and `v` there is `u` with
//! `f'(x; u) = v` and `‖u‖_n <= c_n |v|_{n+d}`.

mod catalog;
mod checks;
mod config;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use catalog::{
    identity_problem, nonlinear_smoothing_problem, quadratic_problem, scaled_identity_problem, smoothing_problem,
    NonlinearSmoothingMap, QuadraticMap, ScaledIdentityMap, SmoothingMap,
};
pub use checks::{
    check_tame_at, directional_derivative_fd, estimate_constants, sampled_box_inclusion, sampled_box_inclusion_report,
    ConstantEstimate, InclusionReport, TameCheckReport, INVERSE_RESIDUAL_TOL,
};
pub use config::{ConstantsSpec, ProblemConfig, DEFAULT_ESTIMATE_TRIALS, PROBLEM_NAMES};

use crate::error::{Error, Result};
use crate::graded_space::{BoundSeq, GradedElement, GradingSpec};
use crate::scalar::Scalar;

/// A map between truncated graded spaces together with its directional
/// derivative and a right inverse of that derivative.
///
/// Implementations are immutable and pure, so they may be shared across
/// threads.
pub trait GradedMap<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    fn spec(&self) -> &Arc<GradingSpec<T>>;

    /// Derivative loss `d`.
    fn loss(&self) -> usize;

    fn eval(&self, x: &GradedElement<T>) -> GradedElement<T>;

    /// `f'(x; h)`.
    fn dderiv(&self, x: &GradedElement<T>, h: &GradedElement<T>) -> GradedElement<T>;

    /// `f(x + r·h) − f(x)`.
    ///
    /// Overridden where the difference can be formed without cancelling two
    /// values of size `‖f(x)‖`, which matters once `r` is tiny.
    fn increment(&self, x: &GradedElement<T>, h: &GradedElement<T>, r: T) -> GradedElement<T> {
        let next = x.axpy(r, h).expect("same grading");
        self.eval(&next).try_sub(&self.eval(x)).expect("same grading")
    }

    /// `true` iff the right inverse is valid at `x`.
    fn domain_guard(&self, _x: &GradedElement<T>) -> bool {
        true
    }

    /// `u` with `f'(x; u) = v`. Fails with [`Error::GuardViolation`] outside
    /// the guard.
    fn right_inverse(&self, x: &GradedElement<T>, v: &GradedElement<T>) -> Result<GradedElement<T>>;

    /// Sup-norm radius of base points drawn when sampling this map.
    fn base_radius(&self) -> f64 {
        1.0
    }
}

/// Where the tame constants `c_n` of a problem came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstantsProvenance {
    /// Derived by hand for the instance.
    Analytic,
    /// Supplied by the caller, e.g. from a configuration file.
    Supplied,
    /// Estimated by sampling; see [`estimate_constants`].
    Estimated { trials: usize, margin: f64, sampler: String },
}

impl ConstantsProvenance {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Supplied => "supplied",
            Self::Estimated { .. } => "estimated",
        }
    }
}

/// A [`GradedMap`] with tame constants `c` attached.
#[derive(Clone)]
pub struct TameProblem<T: Scalar> {
    map: Arc<dyn GradedMap<T>>,
    constants: BoundSeq<T>,
    provenance: ConstantsProvenance,
}

impl<T: Scalar> TameProblem<T> {
    /// Tolerance for the `f(0) = 0` check at every level.
    pub const ORIGIN_TOL: f64 = 1e-12;

    pub fn new(map: Arc<dyn GradedMap<T>>, constants: BoundSeq<T>, provenance: ConstantsProvenance) -> Result<Self> {
        let spec = map.spec();
        if constants.len() != spec.level_count() {
            return Err(Error::LengthMismatch { left: constants.len(), right: spec.level_count() });
        }
        constants.reciprocal()?;
        let at_origin = map.eval(&GradedElement::zero(spec));
        for (level, value) in at_origin.all_norms().into_iter().enumerate() {
            if !(value <= T::lit(Self::ORIGIN_TOL)) {
                return Err(Error::NonzeroAtOrigin { problem: map.name().to_string(), level, value: value.as_f64() });
            }
        }
        Ok(Self { map, constants, provenance })
    }

    /// Attaches constants from [`estimate_constants`].
    pub fn estimated<R: rand::Rng + ?Sized>(map: Arc<dyn GradedMap<T>>, trials: usize, rng: &mut R) -> Result<Self> {
        let levels = map.spec().max_level();
        let estimate = estimate_constants(map.as_ref(), trials, levels, rng)?;
        Self::new(map, estimate.constants.clone(), estimate.provenance())
    }

    /// Same map, different constants.
    pub fn with_constants(&self, constants: BoundSeq<T>, provenance: ConstantsProvenance) -> Result<Self> {
        Self::new(Arc::clone(&self.map), constants, provenance)
    }

    pub fn map(&self) -> &dyn GradedMap<T> {
        self.map.as_ref()
    }

    pub fn name(&self) -> &str {
        self.map.name()
    }

    pub fn spec(&self) -> &Arc<GradingSpec<T>> {
        self.map.spec()
    }

    /// Derivative loss `d`.
    pub fn loss(&self) -> usize {
        self.map.loss()
    }

    /// Tame constants `c_0..c_N`.
    pub fn constants(&self) -> &BoundSeq<T> {
        &self.constants
    }

    /// `b = (1/c_n)`.
    pub fn inverse_constants(&self) -> BoundSeq<T> {
        self.constants.reciprocal().expect("constants validated at construction")
    }

    pub fn provenance(&self) -> &ConstantsProvenance {
        &self.provenance
    }

    /// Highest source level whose tame bound is checkable, `N - d`, if any.
    pub fn checkable_levels(&self) -> Option<usize> {
        self.spec().max_level().checked_sub(self.loss())
    }

    pub fn eval(&self, x: &GradedElement<T>) -> GradedElement<T> {
        self.map.eval(x)
    }

    pub fn dderiv(&self, x: &GradedElement<T>, h: &GradedElement<T>) -> GradedElement<T> {
        self.map.dderiv(x, h)
    }

    pub fn increment(&self, x: &GradedElement<T>, h: &GradedElement<T>, r: T) -> GradedElement<T> {
        self.map.increment(x, h, r)
    }

    pub fn right_inverse(&self, x: &GradedElement<T>, v: &GradedElement<T>) -> Result<GradedElement<T>> {
        self.map.right_inverse(x, v)
    }

    pub fn domain_guard(&self, x: &GradedElement<T>) -> bool {
        self.map.domain_guard(x)
    }
}

impl<T: Scalar> fmt::Debug for TameProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TameProblem")
            .field("name", &self.name())
            .field("d", &self.loss())
            .field("c", &self.constants)
            .field("provenance", &self.provenance)
            .finish()
    }
}
