use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    identity_problem, smoothing_problem, ConstantsProvenance, GradedMap, NonlinearSmoothingMap, QuadraticMap,
    TameProblem,
};
use crate::error::{Error, Result};
use crate::graded_space::{BoundSeq, GradingSpec};
use crate::scalar::Scalar;

/// Tame constants in a problem configuration: explicit values or
/// `"estimate"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConstantsSpec {
    Values(BoundSeq<f64>),
    Keyword(String),
}

/// Problem configuration file:
/// `{"problem": name, "mu": real, "K": int, "N": int, "q": int, "c": [..] | "estimate", "d": int}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub problem: String,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(rename = "K", default = "default_k")]
    pub k: usize,
    #[serde(rename = "N", default = "default_n")]
    pub n: usize,
    #[serde(default = "default_q")]
    pub q: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<ConstantsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
}

fn default_mu() -> f64 {
    1.0
}
fn default_k() -> usize {
    16
}
fn default_n() -> usize {
    4
}
fn default_q() -> usize {
    4
}

pub const PROBLEM_NAMES: [&str; 4] = ["identity", "quadratic", "smoothing", "nonlinear_smoothing"];

/// Trials used when a configuration asks for estimated constants.
pub const DEFAULT_ESTIMATE_TRIALS: usize = 400;

impl ProblemConfig {
    pub fn named(problem: &str) -> Self {
        Self { problem: problem.to_string(), mu: 1.0, k: 16, n: 4, q: 4, c: None, d: None }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Builds the grading and the problem. `rng` is only used when the
    /// constants are estimated.
    pub fn build<T: Scalar, R: Rng + ?Sized>(&self, rng: &mut R) -> Result<TameProblem<T>> {
        let spec = GradingSpec::<T>::new(self.k, self.n, self.q)?;
        let mu = T::lit(self.mu);
        let (map, shipped): (Arc<dyn GradedMap<T>>, Option<TameProblem<T>>) = match self.problem.as_str() {
            "identity" => {
                let p = identity_problem(&spec);
                (Arc::new(super::ScaledIdentityMap::new(&spec, T::one())?), Some(p))
            }
            "smoothing" => {
                let p = smoothing_problem(&spec);
                (Arc::new(super::SmoothingMap::new(&spec)), Some(p))
            }
            "quadratic" => (Arc::new(QuadraticMap::new(&spec, mu)), None),
            "nonlinear_smoothing" => (Arc::new(NonlinearSmoothingMap::new(&spec, mu)), None),
            other => {
                return Err(Error::Parse(format!(
                    "unknown problem {other:?}; expected one of {}",
                    PROBLEM_NAMES.join(", ")
                )))
            }
        };
        if let Some(d) = self.d {
            if d != map.loss() {
                return Err(Error::InvalidArgument(format!(
                    "problem {} has derivative loss {}, config says {d}",
                    self.problem,
                    map.loss()
                )));
            }
        }
        match (&self.c, shipped) {
            (Some(ConstantsSpec::Values(c)), _) => {
                let values = c.values().iter().map(|&v| T::lit(v)).collect();
                TameProblem::new(map, BoundSeq::new(values)?, ConstantsProvenance::Supplied)
            }
            (Some(ConstantsSpec::Keyword(k)), _) if k == "estimate" => {
                TameProblem::estimated(map, DEFAULT_ESTIMATE_TRIALS, rng)
            }
            (Some(ConstantsSpec::Keyword(k)), _) => {
                Err(Error::Parse(format!("c must be an array or \"estimate\", got {k:?}")))
            }
            (None, Some(p)) => Ok(p),
            (None, None) => TameProblem::estimated(map, DEFAULT_ESTIMATE_TRIALS, rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = ProblemConfig::from_json(
            r#"{"problem": "smoothing", "mu": 0.5, "K": 8, "N": 3, "q": 4, "c": [2, 2, 2, "inf"], "d": 1}"#,
        )
        .unwrap();
        assert_eq!(cfg.k, 8);
        assert!(matches!(cfg.c, Some(ConstantsSpec::Values(_))));
        // "inf" is not a usable tame constant
        assert!(cfg.build::<f64, _>(&mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn estimate_keyword_and_defaults() {
        let cfg = ProblemConfig::from_json(r#"{"problem": "quadratic", "K": 6, "N": 2, "c": "estimate"}"#).unwrap();
        let p = cfg.build::<f64, _>(&mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(p.provenance().label(), "estimated");
        let p = ProblemConfig::named("smoothing").build::<f64, _>(&mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(p.provenance().label(), "analytic");
        assert_eq!(p.loss(), 1);
    }

    #[test]
    fn rejects_wrong_loss_and_unknown_problem() {
        let mut cfg = ProblemConfig::named("identity");
        cfg.d = Some(1);
        assert!(cfg.build::<f64, _>(&mut ChaCha8Rng::seed_from_u64(0)).is_err());
        assert!(ProblemConfig::named("cubic").build::<f64, _>(&mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
