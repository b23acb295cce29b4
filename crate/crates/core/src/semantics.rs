//! Weighted gradual semantics: forward evaluation by fixed-point iteration and
//! closed-form inversion from degrees back to weights.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::framework::{AttackGraph, Waf};

/// Slack on the upper weight bound when testing achievability.
pub const ACHIEVABILITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    /// Weighted h-categorizer: `w(a) / (1 + Σ σ(b))`.
    Hbs,
    /// Weighted card-based: `w(a) / (1 + |Att*| + Σ σ(b) / |Att*|)` over non-null attackers.
    Car,
    /// Weighted max-based: `w(a) / (1 + max σ(b))`.
    Max,
}

impl Semantics {
    pub const ALL: [Semantics; 3] = [Semantics::Hbs, Semantics::Car, Semantics::Max];

    pub fn as_str(self) -> &'static str {
        match self {
            Semantics::Hbs => "hbs",
            Semantics::Car => "car",
            Semantics::Max => "max",
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
#[error("unknown semantics `{0}` (expected hbs, car or max)")]
pub struct UnknownSemantics(pub String);

impl FromStr for Semantics {
    type Err = UnknownSemantics;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hbs" => Ok(Semantics::Hbs),
            "car" => Ok(Semantics::Car),
            "max" => Ok(Semantics::Max),
            _ => Err(UnknownSemantics(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// L∞ convergence threshold between successive iterates.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Degrees at or below this count as zero when deciding card-based
    /// attacker membership during inversion.
    pub zero_degree_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-12,
            max_iterations: 10_000,
            zero_degree_threshold: 1e-12,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("fixed-point iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Denominator of the semantics' defining equation at argument `i`, given
/// the attacker degrees in `degrees`. `nonnull` decides card-based membership.
#[inline]
fn denominator(
    graph: &AttackGraph,
    degrees: &[f64],
    sem: Semantics,
    i: usize,
    nonnull: impl Fn(usize) -> bool,
) -> f64 {
    let attackers = graph.attackers_of(i);
    match sem {
        Semantics::Hbs => 1.0 + attackers.iter().map(|&b| degrees[b]).sum::<f64>(),
        Semantics::Max => 1.0 + attackers.iter().map(|&b| degrees[b]).fold(0.0, f64::max),
        Semantics::Car => {
            let (k, sum) = attackers
                .iter()
                .filter(|&&b| nonnull(b))
                .fold((0usize, 0.0), |(k, s), &b| (k + 1, s + degrees[b]));
            if k == 0 {
                1.0
            } else {
                1.0 + k as f64 + sum / k as f64
            }
        }
    }
}

fn step(waf: &Waf, sem: Semantics, current: &[f64], next: &mut [f64]) {
    let w = &waf.weights;
    for (i, out) in next.iter_mut().enumerate() {
        *out = w[i] / denominator(&waf.graph, current, sem, i, |b| w[b] != 0.0);
    }
}

/// L∞ distance between `degrees` and one application of the semantics'
/// defining map.
pub fn residual(waf: &Waf, sem: Semantics, degrees: &[f64]) -> f64 {
    let mut next = vec![0.0; degrees.len()];
    step(waf, sem, degrees, &mut next);
    linf(&next, degrees)
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Acceptability degrees of every argument, by fixed-point iteration from
/// `x₀ = w` until successive iterates differ by less than `cfg.tolerance`.
pub fn solve_degrees(waf: &Waf, sem: Semantics, cfg: &SolverConfig) -> Result<Vec<f64>, SolveError> {
    let n = waf.graph.len();
    if waf.weights.len() != n {
        return Err(SolveError::LengthMismatch {
            expected: n,
            got: waf.weights.len(),
        });
    }
    let mut current = waf.weights.clone();
    let mut next = vec![0.0; n];
    let mut change = f64::INFINITY;
    for _ in 0..cfg.max_iterations {
        step(waf, sem, &current, &mut next);
        change = linf(&current, &next);
        std::mem::swap(&mut current, &mut next);
        if change < cfg.tolerance {
            return Ok(current);
        }
    }
    Err(SolveError::NotConverged {
        iterations: cfg.max_iterations,
        residual: change,
    })
}

/// Weight that argument `i` needs for `degrees` to be a fixed point.
#[inline]
pub fn inverted_weight(
    graph: &AttackGraph,
    degrees: &[f64],
    sem: Semantics,
    cfg: &SolverConfig,
    i: usize,
) -> f64 {
    degrees[i] * denominator(graph, degrees, sem, i, |b| degrees[b] > cfg.zero_degree_threshold)
}

/// Weights that make `degrees` the semantics' fixed point. Entries may exceed
/// 1, which means the degree vector is not achievable.
pub fn invert_weights(
    graph: &AttackGraph,
    degrees: &[f64],
    sem: Semantics,
    cfg: &SolverConfig,
) -> Vec<f64> {
    (0..graph.len())
        .map(|i| inverted_weight(graph, degrees, sem, cfg, i))
        .collect()
}

/// Whether some weighting in `[0, 1]` produces exactly `degrees`.
pub fn is_achievable(
    graph: &AttackGraph,
    degrees: &[f64],
    sem: Semantics,
    cfg: &SolverConfig,
) -> bool {
    (0..graph.len()).all(|i| inverted_weight(graph, degrees, sem, cfg, i) <= 1.0 + ACHIEVABILITY_SLACK)
}
