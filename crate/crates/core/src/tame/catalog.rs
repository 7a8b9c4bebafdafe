//! Concrete problem instances sharing one grading.

use std::sync::Arc;

use super::{ConstantsProvenance, GradedMap, TameProblem};
use crate::error::{Error, Result};
use crate::graded_space::{BoundSeq, GradedElement, GradingSpec};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Matrix of `u ↦ P[w · u]` on the coefficient space, where `P` truncates
/// to degree `K`.
fn multiplication_matrix<T: Scalar>(weight: &GradedElement<T>) -> Matrix<T> {
    let w = weight.coeffs();
    let k = weight.degree();
    let half = T::lit(0.5);
    // Adds c·cos(mθ) + s·sin(mθ) for a signed m to `col`.
    let push = |col: &mut [T], m: isize, c: T, s: T| {
        let (m, s) = if m < 0 { (m.unsigned_abs(), -s) } else { (m as usize, s) };
        if m <= k {
            col[m] = col[m] + c;
            if m > 0 {
                col[k + m] = col[k + m] + s;
            }
        }
    };
    let mut columns = vec![vec![T::zero(); w.len()]; w.len()];
    columns[0].copy_from_slice(w);
    for r in 1..=k {
        for (col, a2, b2) in [(r, T::one(), T::zero()), (k + r, T::zero(), T::one())] {
            let out = &mut columns[col];
            for p in 0..=k {
                let (a1, b1) = (w[p], if p == 0 { T::zero() } else { w[k + p] });
                let (p, ri) = (p as isize, r as isize);
                push(out, p - ri, half * (a1 * a2 + b1 * b2), half * (b1 * a2 - a1 * b2));
                push(out, p + ri, half * (a1 * a2 - b1 * b2), half * (b1 * a2 + a1 * b2));
            }
        }
    }
    Matrix::from_columns(&columns)
}

/// Solves `P[w · u] = v` for `u` of degree `K`: the exact right inverse of
/// the truncated multiplication operator.
fn solve_multiplier<T: Scalar>(weight: &GradedElement<T>, v: &GradedElement<T>) -> Result<GradedElement<T>> {
    let lu = multiplication_matrix(weight).lu()?;
    GradedElement::from_coeffs(weight.spec(), lu.solve(v.coeffs()))
}

/// `1 + 2μ·z`.
fn linearization_weight<T: Scalar>(z: &GradedElement<T>, mu: T) -> GradedElement<T> {
    let spec = z.spec();
    GradedElement::constant(spec, T::one()).axpy(T::lit(2.0) * mu, z).expect("same grading")
}

/// `min_grid (1 + 2μ·z) >= 1/2`.
fn weight_guard<T: Scalar>(z: &GradedElement<T>, mu: T) -> bool {
    let two_mu = T::lit(2.0) * mu;
    z.grid().iter().all(|&v| T::one() + two_mu * v >= T::lit(0.5))
}

/// `g(z + r·w) − g(z)` for `g(z) = z + μz²`, formed pointwise as
/// `r·w·(1 + μ(2z + r·w))`.
fn quadratic_increment<T: Scalar>(z: &GradedElement<T>, w: &GradedElement<T>, mu: T, r: T) -> GradedElement<T> {
    let two = T::lit(2.0);
    let values: Vec<T> =
        z.grid().iter().zip(w.grid()).map(|(&z, &w)| r * w * (T::one() + mu * (two * z + r * w))).collect();
    GradedElement::from_grid(z.spec(), &values).expect("finite grid values")
}

/// Multiplies mode `k` by `factor(k)`.
fn fourier_multiplier<T: Scalar>(x: &GradedElement<T>, factor: impl Fn(usize) -> T) -> GradedElement<T> {
    let k = x.degree();
    let mut coeffs = x.coeffs().to_vec();
    coeffs[0] = coeffs[0] * factor(0);
    for m in 1..=k {
        let f = factor(m);
        coeffs[m] = coeffs[m] * f;
        coeffs[k + m] = coeffs[k + m] * f;
    }
    GradedElement::from_coeffs(x.spec(), coeffs).expect("finite multiplier")
}

/// `f(x) = λ·x`. With `λ = 1` this is the identity problem.
#[derive(Debug)]
pub struct ScaledIdentityMap<T: Scalar> {
    spec: Arc<GradingSpec<T>>,
    factor: T,
    name: String,
}

impl<T: Scalar> ScaledIdentityMap<T> {
    pub fn new(spec: &Arc<GradingSpec<T>>, factor: T) -> Result<Self> {
        if factor.is_zero() || !factor.is_finite() {
            return Err(Error::InvalidArgument(format!("scale factor must be nonzero, got {factor}")));
        }
        let name = if factor == T::one() { "identity".to_string() } else { format!("scaled_identity({factor})") };
        Ok(Self { spec: Arc::clone(spec), factor, name })
    }
}

impl<T: Scalar> GradedMap<T> for ScaledIdentityMap<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn spec(&self) -> &Arc<GradingSpec<T>> {
        &self.spec
    }

    fn loss(&self) -> usize {
        0
    }

    fn eval(&self, x: &GradedElement<T>) -> GradedElement<T> {
        x.scale(self.factor)
    }

    fn dderiv(&self, _x: &GradedElement<T>, h: &GradedElement<T>) -> GradedElement<T> {
        h.scale(self.factor)
    }

    fn increment(&self, _x: &GradedElement<T>, h: &GradedElement<T>, r: T) -> GradedElement<T> {
        h.scale(self.factor * r)
    }

    fn right_inverse(&self, _x: &GradedElement<T>, v: &GradedElement<T>) -> Result<GradedElement<T>> {
        Ok(v.scale(self.factor.recip()))
    }
}

/// `f(x) = x + μ·x²`, the square taken pointwise on the grid and projected.
#[derive(Debug)]
pub struct QuadraticMap<T: Scalar> {
    spec: Arc<GradingSpec<T>>,
    mu: T,
    name: String,
}

impl<T: Scalar> QuadraticMap<T> {
    pub fn new(spec: &Arc<GradingSpec<T>>, mu: T) -> Self {
        Self { spec: Arc::clone(spec), mu, name: format!("quadratic(mu={mu})") }
    }

    pub fn mu(&self) -> T {
        self.mu
    }
}

impl<T: Scalar> GradedMap<T> for QuadraticMap<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn spec(&self) -> &Arc<GradingSpec<T>> {
        &self.spec
    }

    fn loss(&self) -> usize {
        0
    }

    fn eval(&self, x: &GradedElement<T>) -> GradedElement<T> {
        let mu = self.mu;
        x.map_pointwise(|v| v + mu * v * v)
    }

    fn dderiv(&self, x: &GradedElement<T>, h: &GradedElement<T>) -> GradedElement<T> {
        let xh = x.pointwise_mul(h).expect("same grading");
        h.axpy(T::lit(2.0) * self.mu, &xh).expect("same grading")
    }

    fn increment(&self, x: &GradedElement<T>, h: &GradedElement<T>, r: T) -> GradedElement<T> {
        quadratic_increment(x, h, self.mu, r)
    }

    fn domain_guard(&self, x: &GradedElement<T>) -> bool {
        weight_guard(x, self.mu)
    }

    fn right_inverse(&self, x: &GradedElement<T>, v: &GradedElement<T>) -> Result<GradedElement<T>> {
        if !self.domain_guard(x) {
            return Err(Error::GuardViolation { problem: self.name.clone() });
        }
        solve_multiplier(&linearization_weight(x, self.mu), v)
    }

    fn base_radius(&self) -> f64 {
        0.2 / (1.0 + self.mu.abs().as_f64())
    }
}

/// `f(x) = S·x` with the Fourier multiplier `σ_k = 1/(1+|k|)`; its inverse
/// costs one derivative.
#[derive(Debug)]
pub struct SmoothingMap<T: Scalar> {
    spec: Arc<GradingSpec<T>>,
}

impl<T: Scalar> SmoothingMap<T> {
    pub fn new(spec: &Arc<GradingSpec<T>>) -> Self {
        Self { spec: Arc::clone(spec) }
    }

    pub fn smooth(x: &GradedElement<T>) -> GradedElement<T> {
        fourier_multiplier(x, |k| T::one() / T::from_usize_lossy(1 + k))
    }

    pub fn unsmooth(x: &GradedElement<T>) -> GradedElement<T> {
        fourier_multiplier(x, |k| T::from_usize_lossy(1 + k))
    }
}

impl<T: Scalar> GradedMap<T> for SmoothingMap<T> {
    fn name(&self) -> &str {
        "smoothing"
    }

    fn spec(&self) -> &Arc<GradingSpec<T>> {
        &self.spec
    }

    fn loss(&self) -> usize {
        1
    }

    fn eval(&self, x: &GradedElement<T>) -> GradedElement<T> {
        Self::smooth(x)
    }

    fn dderiv(&self, _x: &GradedElement<T>, h: &GradedElement<T>) -> GradedElement<T> {
        Self::smooth(h)
    }

    fn increment(&self, _x: &GradedElement<T>, h: &GradedElement<T>, r: T) -> GradedElement<T> {
        Self::smooth(h).scale(r)
    }

    fn right_inverse(&self, _x: &GradedElement<T>, v: &GradedElement<T>) -> Result<GradedElement<T>> {
        Ok(Self::unsmooth(v))
    }
}

/// `f(x) = S·x + μ·(S·x)²`.
#[derive(Debug)]
pub struct NonlinearSmoothingMap<T: Scalar> {
    spec: Arc<GradingSpec<T>>,
    mu: T,
    name: String,
}

impl<T: Scalar> NonlinearSmoothingMap<T> {
    pub fn new(spec: &Arc<GradingSpec<T>>, mu: T) -> Self {
        Self { spec: Arc::clone(spec), mu, name: format!("nonlinear_smoothing(mu={mu})") }
    }
}

impl<T: Scalar> GradedMap<T> for NonlinearSmoothingMap<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn spec(&self) -> &Arc<GradingSpec<T>> {
        &self.spec
    }

    fn loss(&self) -> usize {
        1
    }

    fn eval(&self, x: &GradedElement<T>) -> GradedElement<T> {
        let mu = self.mu;
        SmoothingMap::smooth(x).map_pointwise(|v| v + mu * v * v)
    }

    fn dderiv(&self, x: &GradedElement<T>, h: &GradedElement<T>) -> GradedElement<T> {
        let sx = SmoothingMap::smooth(x);
        let sh = SmoothingMap::smooth(h);
        let prod = sx.pointwise_mul(&sh).expect("same grading");
        sh.axpy(T::lit(2.0) * self.mu, &prod).expect("same grading")
    }

    fn increment(&self, x: &GradedElement<T>, h: &GradedElement<T>, r: T) -> GradedElement<T> {
        quadratic_increment(&SmoothingMap::smooth(x), &SmoothingMap::smooth(h), self.mu, r)
    }

    fn domain_guard(&self, x: &GradedElement<T>) -> bool {
        weight_guard(&SmoothingMap::smooth(x), self.mu)
    }

    fn right_inverse(&self, x: &GradedElement<T>, v: &GradedElement<T>) -> Result<GradedElement<T>> {
        if !self.domain_guard(x) {
            return Err(Error::GuardViolation { problem: self.name.clone() });
        }
        let weight = linearization_weight(&SmoothingMap::smooth(x), self.mu);
        Ok(SmoothingMap::unsmooth(&solve_multiplier(&weight, v)?))
    }

    fn base_radius(&self) -> f64 {
        0.2 / (1.0 + self.mu.abs().as_f64())
    }
}

/// `f(x) = x` with `c_n = 1`, `d = 0`.
pub fn identity_problem<T: Scalar>(spec: &Arc<GradingSpec<T>>) -> TameProblem<T> {
    scaled_identity_problem(spec, T::one()).expect("identity is valid")
}

/// `f(x) = λ·x` with the analytic constants `c_n = 1/|λ|`.
pub fn scaled_identity_problem<T: Scalar>(spec: &Arc<GradingSpec<T>>, factor: T) -> Result<TameProblem<T>> {
    let map = Arc::new(ScaledIdentityMap::new(spec, factor)?);
    let c = BoundSeq::constant(spec.level_count(), factor.abs().recip())?;
    TameProblem::new(map, c, ConstantsProvenance::Analytic)
}

/// The smoothing problem with its analytic constants `c_n = 2`, `d = 1`.
///
/// `c_n = 2` is the per-mode ratio bound `(1+k)/k <= 2`. In the sup-norm
/// grading it is not a uniform bound over all targets: the multiplier
/// `|k|` involves a conjugate function, and e.g. `v = Σ cos(kθ)/k²` has
/// ratio near 2.8 at level 0.
pub fn smoothing_problem<T: Scalar>(spec: &Arc<GradingSpec<T>>) -> TameProblem<T> {
    let c = BoundSeq::constant(spec.level_count(), T::lit(2.0)).expect("positive");
    TameProblem::new(Arc::new(SmoothingMap::new(spec)), c, ConstantsProvenance::Analytic)
        .expect("smoothing map vanishes at the origin")
}

/// `x + μx²` with the given constants.
pub fn quadratic_problem<T: Scalar>(
    spec: &Arc<GradingSpec<T>>,
    mu: T,
    constants: BoundSeq<T>,
    provenance: ConstantsProvenance,
) -> Result<TameProblem<T>> {
    TameProblem::new(Arc::new(QuadraticMap::new(spec, mu)), constants, provenance)
}

/// `Sx + μ(Sx)²` with the given constants.
pub fn nonlinear_smoothing_problem<T: Scalar>(
    spec: &Arc<GradingSpec<T>>,
    mu: T,
    constants: BoundSeq<T>,
    provenance: ConstantsProvenance,
) -> Result<TameProblem<T>> {
    TameProblem::new(Arc::new(NonlinearSmoothingMap::new(spec, mu)), constants, provenance)
}
