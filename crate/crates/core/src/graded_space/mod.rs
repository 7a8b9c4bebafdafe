//! Finite truncation of a compactly graded space of `2π`-periodic functions.
//!
//! Elements are real trigonometric polynomials of degree `K`. Level `n`
//! carries the discrete `C^n` norm: the largest grid sup over the first `n`
//! derivatives, computed by exact spectral differentiation and evaluation
//! on an oversampled grid. Those norms are nested (`‖·‖_{n-1} <= ‖·‖_n`),
//! so every domination constant between consecutive levels equals one.
//!
//! At finite `K` all the norms are equivalent, so the compact embeddings of
//! the infinite-dimensional grading are modelled rather than inherited.

mod bounds;
mod element;
mod grading;
mod metric;

pub use bounds::{bound_product, shift_levels, BoundSeq};
pub use element::{ElementJson, GradedElement};
pub use grading::GradingSpec;
pub use metric::{box_contains, distance_n, metric, metric_term, FrechetDistance};
