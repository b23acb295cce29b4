//! Repairing irrational frameworks by lowering interval minima.
//!
//! Strategy 1 moves the min-corner `S` along a straight line towards the
//! origin, each argument's lower bound dropping at rate `1 / cost(a)`, and
//! clamping at zero. Equal progress `t` along the line therefore costs the
//! same for every argument. A bisection over `t` finds the first rational
//! point. Strategy 2 runs strategy 1 restricted to each subset of arguments
//! and keeps the cheapest repair.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::framework::{ArgumentId, Caf, Interval};
use crate::rationality::is_rational;
use crate::semantics::Semantics;

/// Strategy 2 enumerates all subsets only up to this many arguments.
pub const MAX_EXHAUSTIVE_ARGS: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum CorrectionError {
    #[error("framework is already rational under {0}")]
    AlreadyRational(Semantics),
    #[error("lowering only the selected arguments cannot make the framework rational")]
    Infeasible,
    #[error("no argument subset yields a rational framework")]
    NoFeasibleSubset,
    #[error("{n} arguments are too many for exhaustive subset search (limit {limit}); set a subset size cap")]
    TooManyArguments { n: usize, limit: usize },
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("cost map has {got} entries for {expected} arguments, or a non-positive cost")]
    InvalidCosts { expected: usize, got: usize },
    #[error("argument index {0} out of range")]
    UnknownArgument(usize),
    #[error("origin-line costs need at least one positive lower bound")]
    AllMinimaZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    S1,
    S2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CostPreset {
    /// Every argument costs 1.
    Unit,
    /// Lower bounds move proportionally to themselves, towards the origin.
    OriginLine,
    /// The costs stored in the framework.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionResult {
    pub corrected: Caf,
    pub total_cost: f64,
    pub modified: Vec<ArgumentId>,
    pub parameter_t: f64,
    pub strategy: Strategy,
    pub subset: Option<Vec<ArgumentId>>,
}

/// Per-argument modification costs for a preset.
///
/// Under `OriginLine`, arguments with a zero lower bound cannot move and get
/// cost 1, which never contributes to the total.
pub fn cost_presets(preset: CostPreset, caf: &Caf) -> Result<Vec<f64>, CorrectionError> {
    match preset {
        CostPreset::Unit => Ok(vec![1.0; caf.len()]),
        CostPreset::Custom => Ok(caf.costs().to_vec()),
        CostPreset::OriginLine => {
            let mins = caf.mins();
            if mins.iter().all(|&m| m <= 0.0) {
                return Err(CorrectionError::AllMinimaZero);
            }
            Ok(mins.iter().map(|&m| if m > 0.0 { 1.0 / m } else { 1.0 }).collect())
        }
    }
}

fn check_costs(caf: &Caf, costs: &[f64]) -> Result<(), CorrectionError> {
    if costs.len() != caf.len() || costs.iter().any(|&c| !(c.is_finite() && c > 0.0)) {
        return Err(CorrectionError::InvalidCosts {
            expected: caf.len(),
            got: costs.len(),
        });
    }
    Ok(())
}

fn lowered_min(lo: f64, cost: f64, t: f64) -> f64 {
    (lo - t / cost).max(0.0)
}

/// `caf` with each lower bound in `subset` moved down by `t / cost(a)`,
/// clamped at 0. Everything else is left untouched.
pub fn lowered_caf(caf: &Caf, costs: &[f64], subset: &[usize], t: f64) -> Caf {
    let mut out = caf.clone();
    for &i in subset {
        let iv = caf.interval(i);
        out.set_interval(
            i,
            Interval {
                lo: lowered_min(iv.lo, costs[i], t),
                hi: iv.hi,
            },
        );
    }
    out
}

fn rational_at(caf: &Caf, sem: Semantics, costs: &[f64], subset: &[usize], t: f64) -> bool {
    let mut point = caf.mins();
    for &i in subset {
        point[i] = lowered_min(point[i], costs[i], t);
    }
    crate::rationality::is_point_achievable(caf, sem, &point)
}

struct LineSearch {
    t: f64,
    corrected: Caf,
    total_cost: f64,
    modified: Vec<usize>,
}

/// Bisection over `t ∈ [0, T]` with `T = max cost(a)·min I(a)` over the
/// subset; returns the smallest rational `t` to resolution `eps`.
fn line_search(
    caf: &Caf,
    sem: Semantics,
    costs: &[f64],
    subset: &[usize],
    eps: f64,
) -> Result<LineSearch, CorrectionError> {
    let t_max = subset
        .iter()
        .map(|&i| costs[i] * caf.interval(i).lo)
        .fold(0.0, f64::max);
    if !rational_at(caf, sem, costs, subset, t_max) {
        return Err(CorrectionError::Infeasible);
    }
    // invariant: `l` irrational, `u` rational
    let (mut l, mut u) = (0.0, t_max);
    while u - l >= eps {
        let m = 0.5 * (l + u);
        if m <= l || m >= u {
            break;
        }
        if rational_at(caf, sem, costs, subset, m) {
            u = m;
        } else {
            l = m;
        }
    }
    let corrected = lowered_caf(caf, costs, subset, u);
    let mut total_cost = 0.0;
    let mut modified = Vec::new();
    for &i in subset {
        let delta = caf.interval(i).lo - corrected.interval(i).lo;
        if delta > 0.0 {
            total_cost += costs[i] * delta;
            modified.push(i);
        }
    }
    modified.sort_unstable();
    Ok(LineSearch {
        t: u,
        corrected,
        total_cost,
        modified,
    })
}

fn validate(caf: &Caf, sem: Semantics, costs: &[f64], eps: f64) -> Result<(), CorrectionError> {
    if !(eps > 0.0) {
        return Err(CorrectionError::InvalidEpsilon(eps));
    }
    check_costs(caf, costs)?;
    if is_rational(caf, sem) {
        return Err(CorrectionError::AlreadyRational(sem));
    }
    Ok(())
}

fn ids(caf: &Caf, indices: &[usize]) -> Vec<ArgumentId> {
    indices.iter().map(|&i| caf.graph.id(i).to_owned()).collect()
}

/// Strategy 1 over `subset` (all arguments when `None`).
pub fn correct_strategy1(
    caf: &Caf,
    sem: Semantics,
    costs: &[f64],
    eps: f64,
    subset: Option<&[usize]>,
) -> Result<CorrectionResult, CorrectionError> {
    validate(caf, sem, costs, eps)?;
    let all: Vec<usize>;
    let subset = match subset {
        Some(s) => {
            if let Some(&bad) = s.iter().find(|&&i| i >= caf.len()) {
                return Err(CorrectionError::UnknownArgument(bad));
            }
            s
        }
        None => {
            all = (0..caf.len()).collect();
            &all
        }
    };
    let found = line_search(caf, sem, costs, subset, eps)?;
    let mut members = subset.to_vec();
    members.sort_unstable();
    members.dedup();
    Ok(CorrectionResult {
        modified: ids(caf, &found.modified),
        corrected: found.corrected,
        total_cost: found.total_cost,
        parameter_t: found.t,
        strategy: Strategy::S1,
        subset: Some(ids(caf, &members)),
    })
}

fn mask_members(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

/// All masks over `n` bits with between 1 and `k` bits set.
fn capped_masks(n: usize, k: usize) -> Vec<u64> {
    let mut masks = Vec::new();
    for size in 1..=k.min(n) {
        // Gosper's hack: next mask with the same popcount
        let mut mask: u64 = (1u64 << size) - 1;
        while mask < (1u64 << n) {
            masks.push(mask);
            let c = mask & mask.wrapping_neg();
            let r = mask + c;
            mask = (((r ^ mask) >> 2) / c) | r;
        }
    }
    masks
}

/// Strategy 2: strategy 1 restricted to every non-empty subset (of size at
/// most `max_subset_args` when given); the cheapest feasible repair wins,
/// ties going to the smaller subset and then to the lexicographically first
/// one in declaration order.
pub fn correct_strategy2(
    caf: &Caf,
    sem: Semantics,
    costs: &[f64],
    eps: f64,
    max_subset_args: Option<usize>,
) -> Result<CorrectionResult, CorrectionError> {
    validate(caf, sem, costs, eps)?;
    let n = caf.len();
    let masks: Vec<u64> = match max_subset_args {
        Some(k) if k < n => {
            if n >= 64 {
                return Err(CorrectionError::TooManyArguments { n, limit: 63 });
            }
            capped_masks(n, k)
        }
        _ => {
            if n > MAX_EXHAUSTIVE_ARGS {
                return Err(CorrectionError::TooManyArguments {
                    n,
                    limit: MAX_EXHAUSTIVE_ARGS,
                });
            }
            (1..(1u64 << n)).collect()
        }
    };

    let best = masks
        .par_iter()
        .filter_map(|&mask| {
            let members = mask_members(mask);
            line_search(caf, sem, costs, &members, eps)
                .ok()
                .map(|found| (members, found))
        })
        .min_by(|(ma, a), (mb, b)| {
            a.total_cost
                .total_cmp(&b.total_cost)
                .then(ma.len().cmp(&mb.len()))
                .then_with(|| ma.cmp(mb))
        });

    let (members, found) = best.ok_or(CorrectionError::NoFeasibleSubset)?;
    Ok(CorrectionResult {
        modified: ids(caf, &found.modified),
        corrected: found.corrected,
        total_cost: found.total_cost,
        parameter_t: found.t,
        strategy: Strategy::S2,
        subset: Some(ids(caf, &members)),
    })
}
