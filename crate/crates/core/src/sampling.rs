//! Sampling initial weightings whose degrees fall inside a rational
//! framework's intervals.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::framework::Caf;
use crate::rationality::{is_point_achievable, is_rational};
use crate::semantics::{invert_weights, Semantics, SolverConfig};

#[derive(Debug, Error, PartialEq)]
pub enum SamplingError {
    #[error("framework is irrational under {0}; no valid weighting exists")]
    Irrational(Semantics),
    #[error("{0} must be at least 1")]
    InvalidCount(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SampleMethod {
    Rejection,
    Staircase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub weights: Vec<f64>,
    pub degrees: Vec<f64>,
    pub method: SampleMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub entries: Vec<SampleEntry>,
    /// Number of candidate degree vectors drawn, over all entries.
    pub attempted: u64,
}

/// Bisection steps used by the staircase to locate an axis bound.
const STAIRCASE_STEPS: usize = 60;

/// Draws `n` weightings. Each entry first tries up to `max_tries` uniform
/// draws from the interval box, keeping the first achievable one. If all
/// fail, it walks a staircase from the min-corner: axes in random order, each
/// coordinate drawn uniformly below the largest achievable value on that axis
/// given the coordinates fixed so far.
///
/// Staircase draws are valid but not uniform over the feasible region.
pub fn sample_weights(
    caf: &Caf,
    sem: Semantics,
    n: usize,
    max_tries: usize,
    seed: u64,
) -> Result<SampleBatch, SamplingError> {
    if n < 1 {
        return Err(SamplingError::InvalidCount("n"));
    }
    if max_tries < 1 {
        return Err(SamplingError::InvalidCount("max_tries"));
    }
    if !is_rational(caf, sem) {
        return Err(SamplingError::Irrational(sem));
    }
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempted = 0u64;
    let mut entries = Vec::with_capacity(n);
    let mut point = vec![0.0; caf.len()];

    for _ in 0..n {
        let mut method = SampleMethod::Staircase;
        for _ in 0..max_tries {
            attempted += 1;
            for (x, iv) in point.iter_mut().zip(caf.intervals()) {
                *x = iv.lo + rng.random::<f64>() * iv.width();
            }
            if is_point_achievable(caf, sem, &point) {
                method = SampleMethod::Rejection;
                break;
            }
        }
        if method == SampleMethod::Staircase {
            attempted += 1;
            point = staircase(caf, sem, &mut rng);
        }
        let weights = invert_weights(&caf.graph, &point, sem, &cfg)
            .into_iter()
            .map(|w| w.clamp(0.0, 1.0))
            .collect();
        entries.push(SampleEntry {
            weights,
            degrees: point.clone(),
            method,
        });
    }
    Ok(SampleBatch { entries, attempted })
}

fn staircase(caf: &Caf, sem: Semantics, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut point = caf.mins();
    let mut axes: Vec<usize> = (0..caf.len()).collect();
    axes.shuffle(rng);
    for i in axes {
        let iv = caf.interval(i);
        point[i] = iv.hi;
        let bound = if is_point_achievable(caf, sem, &point) {
            iv.hi
        } else {
            let (mut l, mut r) = (iv.lo, iv.hi);
            for _ in 0..STAIRCASE_STEPS {
                let m = 0.5 * (l + r);
                point[i] = m;
                if is_point_achievable(caf, sem, &point) {
                    l = m;
                } else {
                    r = m;
                }
            }
            l
        };
        point[i] = iv.lo + rng.random::<f64>() * (bound - iv.lo);
    }
    point
}
