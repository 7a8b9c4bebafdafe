//! Executable Nash–Moser–Ekeland surjectivity on truncated graded spaces.
//!
//! The crate solves `f(x) = y` for maps between graded spaces of
//! trigonometric polynomials by path-following `t ↦ t·y`, using a right
//! inverse of the directional derivative at each step, and certifies the
//! simultaneous tame bounds `‖x‖_n <= c_n |y|_{n+d}` on the result.
//!
//! Everything numeric is generic over [`Scalar`] (`f32`/`f64`); the aliases
//! below fix `f64`.

// `!(a > b)` is how NaN gets rejected; failures carry their trace.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::result_large_err, clippy::needless_range_loop)]

pub mod compactness;
pub mod continuation;
pub mod error;
pub mod graded_space;
pub mod linalg;
pub mod properties;
pub mod sampling;
pub mod scalar;
pub mod tame;

pub use error::{Error, Result};
pub use graded_space::{
    bound_product, box_contains, distance_n, metric, shift_levels, BoundSeq, ElementJson, FrechetDistance,
    GradedElement, GradingSpec,
};
pub use scalar::Scalar;

pub type Grading = GradingSpec<f64>;
pub type Element = GradedElement<f64>;
pub type Bounds = BoundSeq<f64>;
pub type Problem = tame::TameProblem<f64>;
pub type Outcome = continuation::SolveOutcome<f64>;
pub type Trace = continuation::ContinuationTrace<f64>;

pub type Element32 = GradedElement<f32>;
pub type Bounds32 = BoundSeq<f32>;
pub type Problem32 = tame::TameProblem<f32>;
