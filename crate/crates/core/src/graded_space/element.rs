use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::GradingSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A real trigonometric polynomial
/// `a_0 + Σ_{k=1}^{K} (a_k cos kθ + b_k sin kθ)`, the common element type of
/// the source and target graded spaces.
///
/// Coefficients are stored as `[a_0, a_1..a_K, b_1..b_K]`. Elements are
/// immutable; arithmetic returns new values. Operator impls (`+`, `-`, `*`)
/// panic when the operands belong to different gradings, like shape
/// mismatches in array crates; the `try_*` methods report it instead.
#[derive(Clone)]
pub struct GradedElement<T> {
    spec: Arc<GradingSpec<T>>,
    coeffs: Vec<T>,
    /// Grid values, synthesized on first use.
    grid: OnceLock<Vec<T>>,
}

impl<T: Scalar> GradedElement<T> {
    pub fn from_coeffs(spec: &Arc<GradingSpec<T>>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != spec.coeff_len() {
            return Err(Error::CoefficientCount { expected: spec.coeff_len(), got: coeffs.len() });
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self::from_coeffs_unchecked(spec, coeffs))
    }

    pub(crate) fn from_coeffs_unchecked(spec: &Arc<GradingSpec<T>>, coeffs: Vec<T>) -> Self {
        debug_assert_eq!(coeffs.len(), spec.coeff_len());
        Self { spec: Arc::clone(spec), coeffs, grid: OnceLock::new() }
    }

    pub fn zero(spec: &Arc<GradingSpec<T>>) -> Self {
        Self::from_coeffs_unchecked(spec, vec![T::zero(); spec.coeff_len()])
    }

    pub fn constant(spec: &Arc<GradingSpec<T>>, value: T) -> Self {
        let mut coeffs = vec![T::zero(); spec.coeff_len()];
        coeffs[0] = value;
        Self::from_coeffs_unchecked(spec, coeffs)
    }

    /// `amplitude · cos(kθ)`; `k = 0` gives the constant `amplitude`.
    pub fn cos_mode(spec: &Arc<GradingSpec<T>>, k: usize, amplitude: T) -> Result<Self> {
        Self::mode(spec, k, amplitude, false)
    }

    /// `amplitude · sin(kθ)` for `1 <= k <= K`.
    pub fn sin_mode(spec: &Arc<GradingSpec<T>>, k: usize, amplitude: T) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("sin mode needs k >= 1".into()));
        }
        Self::mode(spec, k, amplitude, true)
    }

    fn mode(spec: &Arc<GradingSpec<T>>, k: usize, amplitude: T, sine: bool) -> Result<Self> {
        let kmax = spec.degree();
        if k > kmax {
            return Err(Error::InvalidArgument(format!("mode {k} exceeds degree K={kmax}")));
        }
        let mut coeffs = vec![T::zero(); spec.coeff_len()];
        let idx = match (k, sine) {
            (0, _) => 0,
            (k, false) => k,
            (k, true) => kmax + k,
        };
        coeffs[idx] = amplitude;
        Ok(Self::from_coeffs_unchecked(spec, coeffs))
    }

    /// The `index`-th unit coefficient vector.
    pub fn basis(spec: &Arc<GradingSpec<T>>, index: usize) -> Self {
        let mut coeffs = vec![T::zero(); spec.coeff_len()];
        coeffs[index] = T::one();
        Self::from_coeffs_unchecked(spec, coeffs)
    }

    /// Projection of grid samples onto degree `K`.
    pub fn from_grid(spec: &Arc<GradingSpec<T>>, values: &[T]) -> Result<Self> {
        if values.len() != spec.grid_len() {
            return Err(Error::LengthMismatch { left: values.len(), right: spec.grid_len() });
        }
        Ok(Self::from_coeffs_unchecked(spec, spec.analyze(values)))
    }

    pub fn spec(&self) -> &Arc<GradingSpec<T>> {
        &self.spec
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.spec.degree()
    }

    /// Cosine coefficient `a_k`, `0 <= k <= K`.
    pub fn a(&self, k: usize) -> T {
        self.coeffs[k]
    }

    /// Sine coefficient `b_k`, `1 <= k <= K`.
    pub fn b(&self, k: usize) -> T {
        assert!(k >= 1, "b_0 does not exist");
        self.coeffs[self.degree() + k]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn same_grading(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.spec, &other.spec) || self.spec.same_as(&other.spec)
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self.same_grading(other) {
            Ok(())
        } else {
            Err(Error::SpecMismatch { left: self.spec.label(), right: other.spec.label() })
        }
    }

    /// Point evaluation at an arbitrary angle (direct trigonometric sum).
    pub fn eval_at(&self, theta: T) -> T {
        let k = self.degree();
        let mut acc = self.coeffs[0];
        for m in 1..=k {
            let (s, c) = (T::from_usize_lossy(m) * theta).sin_cos();
            acc = acc + self.coeffs[m] * c + self.coeffs[k + m] * s;
        }
        acc
    }

    /// Values on the oversampled grid.
    pub fn grid(&self) -> &[T] {
        self.grid.get_or_init(|| self.spec.synthesize(&self.coeffs))
    }

    pub fn grid_values(&self) -> Vec<T> {
        self.grid().to_vec()
    }

    fn derivative_coeffs(&self, j: usize) -> Vec<T> {
        if j == 0 {
            return self.coeffs.clone();
        }
        let k = self.degree();
        let mut out = vec![T::zero(); self.coeffs.len()];
        for m in 1..=k {
            let factor = T::from_usize_lossy(m).powi(j as i32);
            let (a, b) = (self.coeffs[m] * factor, self.coeffs[k + m] * factor);
            let (da, db) = match j % 4 {
                0 => (a, b),
                1 => (b, -a),
                2 => (-a, -b),
                _ => (-b, a),
            };
            out[m] = da;
            out[k + m] = db;
        }
        out
    }

    /// The `j`-th derivative in θ, computed exactly on the Fourier side.
    pub fn derivative(&self, j: usize) -> Result<Self> {
        self.spec.check_level(j)?;
        Ok(Self::from_coeffs_unchecked(&self.spec, self.derivative_coeffs(j)))
    }

    /// Discrete `C^n` norm: `max_{0<=j<=n} max_grid |x^{(j)}(θ_i)|`.
    pub fn norm(&self, n: usize) -> Result<T> {
        Ok(self.norms(n)?[n])
    }

    /// `[‖x‖_0, ..., ‖x‖_n]` in one pass over the grid.
    pub fn norms(&self, n: usize) -> Result<Vec<T>> {
        self.spec.check_level(n)?;
        let mut out = if n == 0 {
            vec![self.grid().iter().fold(T::zero(), |m, v| m.max(v.abs()))]
        } else {
            self.spec.derivative_sups(&self.coeffs, n)
        };
        for j in 1..out.len() {
            out[j] = out[j].max(out[j - 1]);
        }
        Ok(out)
    }

    /// `[‖x‖_0, ..., ‖x‖_N]`.
    pub fn all_norms(&self) -> Vec<T> {
        self.norms(self.spec.max_level()).expect("max level is in range")
    }

    pub fn scale(&self, factor: T) -> Self {
        Self::from_coeffs_unchecked(&self.spec, self.coeffs.iter().map(|&c| c * factor).collect())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// `self + factor · other`.
    pub fn axpy(&self, factor: T, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a + factor * b))
    }

    fn zip_with(&self, other: &Self, op: impl Fn(T, T) -> T) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| op(a, b)).collect();
        Self::from_coeffs_unchecked(&self.spec, coeffs)
    }

    /// Applies `op` pointwise on the grid and projects back to degree `K`.
    pub fn map_pointwise(&self, op: impl Fn(T) -> T) -> Self {
        let values: Vec<T> = self.grid().iter().map(|&v| op(v)).collect();
        Self::from_coeffs_unchecked(&self.spec, self.spec.analyze(&values))
    }

    /// Pointwise product on the grid, projected back to degree `K`.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let values: Vec<T> = self.grid().iter().zip(other.grid()).map(|(&a, &b)| a * b).collect();
        Ok(Self::from_coeffs_unchecked(&self.spec, self.spec.analyze(&values)))
    }

    /// Pointwise quotient on the grid, projected back to degree `K`.
    pub fn pointwise_div(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let values: Vec<T> = self.grid().iter().zip(other.grid()).map(|(&a, &b)| a / b).collect();
        Ok(Self::from_coeffs_unchecked(&self.spec, self.spec.analyze(&values)))
    }

    /// Product truncated to degree `K`, computed by convolution of the
    /// Fourier coefficients.
    ///
    /// Agrees with [`Self::pointwise_mul`] up to round-off because the grid
    /// resolves degree `2K` exactly; this form only touches nonzero modes,
    /// which makes assembling multiplication matrices cheap.
    pub fn convolve_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let k = self.degree() as isize;
        let half = T::lit(0.5);
        let mut out = vec![T::zero(); self.coeffs.len()];
        // Accumulate c·cos(mθ) + s·sin(mθ) for a signed m into `out`.
        let mut push = |m: isize, c: T, s: T| {
            let (m, s) = if m < 0 { (-m, -s) } else { (m, s) };
            if m > k {
                return;
            }
            let m = m as usize;
            out[m] = out[m] + c;
            if m > 0 {
                out[k as usize + m] = out[k as usize + m] + s;
            }
        };
        let modes = |x: &Self| -> Vec<(isize, T, T)> {
            (0..=k as usize)
                .map(|m| {
                    let b = if m == 0 { T::zero() } else { x.coeffs[k as usize + m] };
                    (m as isize, x.coeffs[m], b)
                })
                .filter(|(_, a, b)| !a.is_zero() || !b.is_zero())
                .collect()
        };
        let lhs = modes(self);
        let rhs = modes(other);
        for &(p, a1, b1) in &lhs {
            for &(r, a2, b2) in &rhs {
                // (a1 cos p + b1 sin p)(a2 cos r + b2 sin r)
                push(p - r, half * (a1 * a2 + b1 * b2), half * (b1 * a2 - a1 * b2));
                push(p + r, half * (a1 * a2 - b1 * b2), half * (b1 * a2 + a1 * b2));
            }
        }
        Ok(Self::from_coeffs_unchecked(&self.spec, out))
    }

    pub fn to_json(&self) -> ElementJson {
        let k = self.degree();
        ElementJson {
            k,
            a: self.coeffs[..=k].iter().map(|c| c.as_f64()).collect(),
            b: self.coeffs[k + 1..].iter().map(|c| c.as_f64()).collect(),
        }
    }

    /// Loads a serialized element; lower-degree inputs are zero-padded.
    pub fn from_json(spec: &Arc<GradingSpec<T>>, json: &ElementJson) -> Result<Self> {
        let kmax = spec.degree();
        if json.k > kmax {
            return Err(Error::Parse(format!("element degree {} exceeds K={kmax}", json.k)));
        }
        if json.a.len() != json.k + 1 || json.b.len() != json.k {
            return Err(Error::Parse(format!(
                "degree {} needs {} cosine and {} sine coefficients, got {} and {}",
                json.k,
                json.k + 1,
                json.k,
                json.a.len(),
                json.b.len()
            )));
        }
        let mut coeffs = vec![T::zero(); spec.coeff_len()];
        for (m, &a) in json.a.iter().enumerate() {
            coeffs[m] = T::lit(a);
        }
        for (m, &b) in json.b.iter().enumerate() {
            coeffs[kmax + 1 + m] = T::lit(b);
        }
        Self::from_coeffs(spec, coeffs)
    }
}

/// Wire form of an element: `{"K": int, "a": [a_0..a_K], "b": [b_1..b_K]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementJson {
    #[serde(rename = "K")]
    pub k: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl<T: Scalar> fmt::Debug for GradedElement<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GradedElement").field("spec", &self.spec).field("coeffs", &self.coeffs).finish()
    }
}

impl<T: Scalar> PartialEq for GradedElement<T> {
    fn eq(&self, other: &Self) -> bool {
        self.same_grading(other) && self.coeffs == other.coeffs
    }
}

impl<T: Scalar> Add for &GradedElement<T> {
    type Output = GradedElement<T>;

    fn add(self, rhs: Self) -> GradedElement<T> {
        self.try_add(rhs).expect("grading mismatch in element addition")
    }
}

impl<T: Scalar> Sub for &GradedElement<T> {
    type Output = GradedElement<T>;

    fn sub(self, rhs: Self) -> GradedElement<T> {
        self.try_sub(rhs).expect("grading mismatch in element subtraction")
    }
}

impl<T: Scalar> Add for GradedElement<T> {
    type Output = GradedElement<T>;

    fn add(self, rhs: Self) -> GradedElement<T> {
        &self + &rhs
    }
}

impl<T: Scalar> Sub for GradedElement<T> {
    type Output = GradedElement<T>;

    fn sub(self, rhs: Self) -> GradedElement<T> {
        &self - &rhs
    }
}

impl<T: Scalar> Mul<T> for &GradedElement<T> {
    type Output = GradedElement<T>;

    fn mul(self, rhs: T) -> GradedElement<T> {
        self.scale(rhs)
    }
}

impl<T: Scalar> Mul<T> for GradedElement<T> {
    type Output = GradedElement<T>;

    fn mul(self, rhs: T) -> GradedElement<T> {
        self.scale(rhs)
    }
}

impl<T: Scalar> Neg for &GradedElement<T> {
    type Output = GradedElement<T>;

    fn neg(self) -> GradedElement<T> {
        self.scale(-T::one())
    }
}
