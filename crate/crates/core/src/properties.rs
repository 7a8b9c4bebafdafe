//! Seeded property suites over the graded space, the problem catalog and
//! the compactness routines. Each suite returns named pass/fail results
//! with the worst value it observed, so callers can print or serialize
//! them.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compactness::{extract_convergent, membership_via_distances, SequenceSource};
use crate::error::Result;
use crate::graded_space::{metric, BoundSeq, GradedElement, GradingSpec};
use crate::sampling::{random_base_point, random_flat, random_target};
use crate::tame::{
    check_tame_at, directional_derivative_fd, sampled_box_inclusion_report, ProblemConfig, TameProblem, PROBLEM_NAMES,
};

/// Relative tolerance for the graded-space axioms.
pub const AXIOM_TOL: f64 = 1e-12;
/// Steps of the finite-difference ladder.
pub const FD_LADDER: [f64; 3] = [1e-2, 1e-3, 1e-4];
/// Required shrink factor of the finite-difference gap per decade of `t`.
pub const FD_MIN_SHRINK: f64 = 8.0;
/// Gaps below `FD_ROUNDOFF · (1 + ‖f'(x; h)‖_n)` count as converged: the
/// difference quotient cannot resolve anything smaller in double precision.
pub const FD_ROUNDOFF: f64 = 1e-9;
/// Tolerance on `‖f'(x; u) − v‖_n / (1 + ‖v‖_n)`.
pub const INVERSE_TOL: f64 = 1e-8;
/// Slack on box membership in the sampled inclusion.
pub const INCLUSION_SLACK: f64 = 1e-6;
/// Ball radius for the extraction audit.
pub const EXTRACTION_TOL: f64 = 0.1;
/// Tolerance for the membership comparison.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Retries when drawing a base point inside a domain guard.
const GUARD_RETRIES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    /// Worst observed value of the property's statistic; see `detail`.
    pub worst: f64,
    pub detail: String,
}

impl PropertyResult {
    fn new(name: &str, passed: bool, cases: usize, worst: f64, detail: String) -> Self {
        Self { name: name.to_string(), passed, cases, worst, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub seed: u64,
    pub grading: String,
    pub results: Vec<PropertyResult>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

/// Every catalog problem at `(K, N, q, μ)`, with shipped constants where
/// they exist and sampled ones otherwise.
pub fn catalog<R: Rng + ?Sized>(k: usize, n: usize, q: usize, mu: f64, rng: &mut R) -> Result<Vec<TameProblem<f64>>> {
    PROBLEM_NAMES.iter().map(|name| ProblemConfig { k, n, q, mu, ..ProblemConfig::named(name) }.build(rng)).collect()
}

/// Every suite on the default grading `K = 16, N = 4, q = 4` with `μ = 1`.
pub fn run_all(seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let problems = catalog(16, 4, 4, 1.0, &mut rng)?;
    let spec = Arc::clone(problems[0].spec());
    let mut results = graded_space_axioms(&spec, 1000, &mut rng)?;
    results.push(convergence_equivalence(&spec, 100, &mut rng)?);
    results.push(zero_maps_to_zero(&problems)?);
    results.push(fd_ladder(&problems, 50, &mut rng)?);
    results.push(right_inverse_consistency(&problems, 100, &mut rng)?);
    results.push(sampled_inclusion(&problems, 3, 100, &mut rng)?);
    results.push(extraction_audit(&spec)?);
    results.push(membership_agreement(&spec, 100, &mut rng)?);
    Ok(PropertyReport { seed, grading: spec.label(), results })
}

fn random_element<R: Rng + ?Sized>(spec: &Arc<GradingSpec<f64>>, rng: &mut R) -> GradedElement<f64> {
    let amplitude = rng.gen_range(0.5..=2.0);
    random_flat(spec, rng, amplitude)
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Symmetry, triangle inequality and translation invariance of the metric,
/// nesting `‖x‖_{n-1} <= ‖x‖_n` and homogeneity `‖λx‖_n = |λ|‖x‖_n` on
/// `count` random triples.
pub fn graded_space_axioms<R: Rng + ?Sized>(
    spec: &Arc<GradingSpec<f64>>,
    count: usize,
    rng: &mut R,
) -> Result<Vec<PropertyResult>> {
    let (mut sym, mut tri, mut trans, mut nest, mut homog) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..count {
        let x = random_element(spec, rng);
        let y = random_element(spec, rng);
        let z = random_element(spec, rng);
        let lambda: f64 = rng.gen_range(-10.0..=10.0);

        let dxy = metric(&x, &y)?.value;
        let dyx = metric(&y, &x)?.value;
        sym = sym.max(rel_gap(dxy, dyx));

        // excess of ρ(x,z) over ρ(x,y) + ρ(y,z), relative to the sum
        let dxz = metric(&x, &z)?.value;
        let dyz = metric(&y, &z)?.value;
        tri = tri.max((dxz - (dxy + dyz)) / (dxy + dyz));

        let shifted = metric(&x.try_add(&z)?, &y.try_add(&z)?)?.value;
        trans = trans.max(rel_gap(shifted, dxy));

        let raw: Vec<f64> = (0..spec.level_count())
            .map(|n| {
                let d = x.derivative(n)?;
                Ok(d.grid().iter().fold(0.0f64, |m, v| m.max(v.abs())))
            })
            .collect::<Result<_>>()?;
        let norms = x.all_norms();
        for n in 0..norms.len() {
            // the norm at n dominates the previous level and every raw
            // derivative sup up to n
            if n > 0 {
                nest = nest.max((norms[n - 1] - norms[n]) / norms[n]);
            }
            let raw_max = raw[..=n].iter().copied().fold(0.0, f64::max);
            nest = nest.max(rel_gap(raw_max, norms[n]));
        }

        for (a, b) in x.scale(lambda).all_norms().iter().zip(&norms) {
            homog = homog.max(rel_gap(*a, lambda.abs() * b));
        }
    }
    let tol = AXIOM_TOL;
    let check = |name: &str, worst: f64, what: &str| {
        PropertyResult::new(name, worst <= tol, count, worst, format!("max {what} = {worst:.3e} (tol {tol:.0e})"))
    };
    Ok(vec![
        check("metric_symmetry", sym, "relative asymmetry"),
        check("metric_triangle", tri, "relative triangle excess"),
        check("metric_translation_invariance", trans, "relative change under translation"),
        check("norm_nesting", nest, "relative nesting defect"),
        check("norm_homogeneity", homog, "relative homogeneity defect"),
    ])
}

/// Along `x_k = x + 2^{-k} z` the metric and the norms vanish together:
/// `ρ <= max_n 2^{-n} ‖x_k − x‖_n`, and conversely
/// `‖x_k − x‖_n <= 2^n ρ / (1 − 2^n ρ)` once `2^n ρ < 1`. Also checks that
/// `ρ(x_k, x)` strictly decreases and every norm decays like `2^{-k}`.
pub fn convergence_equivalence<R: Rng + ?Sized>(
    spec: &Arc<GradingSpec<f64>>,
    count: usize,
    rng: &mut R,
) -> Result<PropertyResult> {
    // Past k = 30 the rounding of x + 2^{-k} z starts to dominate.
    const STEPS: i32 = 30;
    const DECAY_TOL: f64 = 1e-6;
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..count {
        let x = random_element(spec, rng);
        let z = random_element(spec, rng);
        let z_norms = z.all_norms();
        let mut previous = f64::INFINITY;
        for k in 0..=STEPS {
            let step = 0.5f64.powi(k);
            let xk = x.axpy(step, &z)?;
            let rho = metric(&xk, &x)?.value;
            let norms = xk.try_sub(&x)?.all_norms();
            let upper = norms.iter().enumerate().map(|(n, &t)| 0.5f64.powi(n as i32) * t).fold(0.0, f64::max);
            worst = worst.max((rho - upper) / upper);
            for (n, &t) in norms.iter().enumerate() {
                let weighted = 2f64.powi(n as i32) * rho;
                if weighted < 1.0 {
                    let bound = weighted / (1.0 - weighted);
                    worst = worst.max((t - bound) / bound);
                }
                if t > step * z_norms[n] * (1.0 + DECAY_TOL) {
                    failures += 1;
                }
            }
            if rho >= previous {
                failures += 1;
            }
            previous = rho;
        }
    }
    Ok(PropertyResult::new(
        "convergence_equivalence",
        failures == 0 && worst <= AXIOM_TOL,
        count,
        worst,
        format!(
            "{failures} decay or monotonicity violations; max relative excess over the equivalence bounds {worst:.3e}"
        ),
    ))
}

/// `f(0) = 0` for every problem, exactly.
pub fn zero_maps_to_zero(problems: &[TameProblem<f64>]) -> Result<PropertyResult> {
    let mut worst = 0.0f64;
    for p in problems {
        let image = p.eval(&GradedElement::zero(p.spec()));
        worst = worst.max(image.all_norms().into_iter().fold(0.0, f64::max));
    }
    Ok(PropertyResult::new(
        "zero_maps_to_zero",
        worst == 0.0,
        problems.len(),
        worst,
        format!("max ‖f(0)‖_N = {worst:.3e}"),
    ))
}

/// A base point inside the problem's guard.
fn guarded_point<R: Rng + ?Sized>(problem: &TameProblem<f64>, rng: &mut R) -> Result<GradedElement<f64>> {
    let radius = problem.map().base_radius();
    for _ in 0..GUARD_RETRIES {
        let x = random_base_point(problem.spec(), rng, radius);
        if problem.domain_guard(&x) {
            return Ok(x);
        }
    }
    Err(crate::Error::SamplerFailure(GUARD_RETRIES))
}

/// The gap `‖FD_t − f'(x; h)‖_n` shrinks at least 8× per decade of `t`
/// along [`FD_LADDER`], or is already at round-off, at every level.
pub fn fd_ladder<R: Rng + ?Sized>(problems: &[TameProblem<f64>], pairs: usize, rng: &mut R) -> Result<PropertyResult> {
    let mut failures = Vec::new();
    let mut worst_shrink = f64::INFINITY;
    let mut floored = 0usize;
    for p in problems {
        for _ in 0..pairs {
            let x = guarded_point(p, rng)?;
            let h = random_base_point(p.spec(), rng, 1.0);
            let exact = p.dderiv(&x, &h);
            let exact_norms = exact.all_norms();
            let gaps: Vec<Vec<f64>> = FD_LADDER
                .iter()
                .map(|&t| Ok(directional_derivative_fd(p, &x, &h, t)?.try_sub(&exact)?.all_norms()))
                .collect::<Result<_>>()?;
            for n in 0..exact_norms.len() {
                let floor = FD_ROUNDOFF * (1.0 + exact_norms[n]);
                for w in gaps.windows(2) {
                    let (coarse, fine) = (w[0][n], w[1][n]);
                    if fine <= floor {
                        floored += 1;
                        continue;
                    }
                    let shrink = coarse / fine;
                    worst_shrink = worst_shrink.min(shrink);
                    if shrink < FD_MIN_SHRINK {
                        failures.push(format!("{} level {n}: shrink {shrink:.3}", p.name()));
                    }
                }
            }
        }
    }
    let worst = if worst_shrink.is_finite() { worst_shrink } else { 0.0 };
    Ok(PropertyResult::new(
        "fd_ladder",
        failures.is_empty(),
        problems.len() * pairs,
        worst,
        format!(
            "min shrink per decade {worst:.3} over resolved gaps, {floored} comparisons already at round-off{}",
            first_failures(&failures)
        ),
    ))
}

fn first_failures(failures: &[String]) -> String {
    if failures.is_empty() {
        String::new()
    } else {
        format!("; {} failures, first: {}", failures.len(), failures[0])
    }
}

/// `‖f'(x; u) − v‖_n <= 1e-8 (1 + ‖v‖_n)` for `u = right_inverse(x, v)`
/// and `n <= N − d`.
pub fn right_inverse_consistency<R: Rng + ?Sized>(
    problems: &[TameProblem<f64>],
    count: usize,
    rng: &mut R,
) -> Result<PropertyResult> {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for p in problems {
        let top = p.checkable_levels().unwrap_or(0);
        for _ in 0..count {
            let x = guarded_point(p, rng)?;
            let v = random_target(p.spec(), rng);
            let report = check_tame_at(p, &x, &v, 0.0)?;
            let v_norms = v.all_norms();
            for n in 0..=top {
                let scaled = report.inverse_residual[n] / (1.0 + v_norms[n]);
                worst = worst.max(scaled);
                if scaled > INVERSE_TOL {
                    failures.push(format!("{} level {n}: {scaled:.3e}", p.name()));
                }
            }
        }
    }
    Ok(PropertyResult::new(
        "right_inverse_consistency",
        failures.is_empty(),
        problems.len() * count,
        worst,
        format!("max scaled inverse residual {worst:.3e} (tol {INVERSE_TOL:.0e}){}", first_failures(&failures)),
    ))
}

/// Sampled `Π_{b.s} ⊂ f'(x; Π_s)` at `base_points` points per problem with
/// `samples` draws each, for the box `s_n = 2^{⌊n/2⌋}`.
pub fn sampled_inclusion<R: Rng + ?Sized>(
    problems: &[TameProblem<f64>],
    base_points: usize,
    samples: usize,
    rng: &mut R,
) -> Result<PropertyResult> {
    let mut failures = 0;
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for p in problems {
        let levels = p.spec().level_count();
        let s = BoundSeq::new((0..levels).map(|n| 2f64.powi(n as i32 / 2)).collect())?;
        let mut problem_failures = 0;
        for _ in 0..base_points {
            let x = guarded_point(p, rng)?;
            let report = sampled_box_inclusion_report(p, &x, &s, samples, INCLUSION_SLACK, rng)?;
            problem_failures += report.failures;
            worst = worst.max(report.worst_ratio);
        }
        failures += problem_failures;
        details.push(format!("{} [{}]: {problem_failures}", p.name(), p.provenance().label()));
    }
    Ok(PropertyResult::new(
        "sampled_inclusion",
        failures == 0,
        problems.len() * base_points * samples,
        worst,
        format!("failures per problem: {}; max ‖u‖_n / s_n = {worst:.6}", details.join(", ")),
    ))
}

/// Brute-force check of the extraction guarantee on `(−1)^k sin θ` and
/// `sin θ / (k + 1)`: returned indices increase and any two at positions
/// `>= n` are within `2·tol` in `‖·‖_n`.
pub fn extraction_audit(spec: &Arc<GradingSpec<f64>>) -> Result<PropertyResult> {
    let levels = spec.max_level();
    let alternating = {
        let spec = Arc::clone(spec);
        SequenceSource::new(move |k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            GradedElement::sin_mode(&spec, 1, sign).expect("mode 1 exists")
        })
    };
    let harmonic = {
        let spec = Arc::clone(spec);
        SequenceSource::new(move |k| GradedElement::sin_mode(&spec, 1, 1.0 / (k + 1) as f64).expect("mode 1 exists"))
    };
    let mut worst = 0.0f64;
    let mut problems = Vec::new();
    for (name, source, want) in [("alternating", &alternating, 6), ("harmonic", &harmonic, 3)] {
        let result = extract_convergent(source, levels, EXTRACTION_TOL, want, 200)?;
        if !result.indices.windows(2).all(|w| w[0] < w[1]) {
            problems.push(format!("{name}: indices not increasing"));
        }
        for n in 0..=levels {
            let tail = &result.indices[n.min(result.indices.len())..];
            for (a, &i) in tail.iter().enumerate() {
                for &j in &tail[a + 1..] {
                    let d = source.get(i).try_sub(&source.get(j))?.norm(n)?;
                    worst = worst.max(d / (2.0 * EXTRACTION_TOL));
                    if d > 2.0 * EXTRACTION_TOL {
                        problems.push(format!("{name}: ‖x_{i} − x_{j}‖_{n} = {d:.3e}"));
                    }
                }
            }
        }
    }
    Ok(PropertyResult::new(
        "extraction_audit",
        problems.is_empty(),
        2,
        worst,
        format!("max pairwise distance / (2 tol) = {worst:.3}{}", first_failures(&problems)),
    ))
}

/// `membership_via_distances` with `tol = 1e-9` agrees with exact set
/// membership on members, near misses (offset `1e-6`) and unrelated points.
pub fn membership_agreement<R: Rng + ?Sized>(
    spec: &Arc<GradingSpec<f64>>,
    cases: usize,
    rng: &mut R,
) -> Result<PropertyResult> {
    let mut disagreements = 0;
    for case in 0..cases {
        let size = rng.gen_range(1..=6);
        let sample: Vec<GradedElement<f64>> = (0..size).map(|_| random_element(spec, rng)).collect();
        let x = match case % 3 {
            0 => sample[rng.gen_range(0..size)].clone(),
            1 => {
                let base = &sample[rng.gen_range(0..size)];
                base.axpy(1e-6, &random_element(spec, rng))?
            }
            _ => random_element(spec, rng),
        };
        let direct = sample.contains(&x);
        if membership_via_distances(&x, &sample, MEMBERSHIP_TOL)? != direct {
            disagreements += 1;
        }
    }
    Ok(PropertyResult::new(
        "membership_agreement",
        disagreements == 0,
        cases,
        disagreements as f64,
        format!("{disagreements} disagreements with exact membership (tol {MEMBERSHIP_TOL:.0e})"),
    ))
}
