//! Rationality of a constrained framework under a semantics.
//!
//! Every decision here reduces to the achievability of one corner of the
//! interval box: the all-minima corner for rationality, the all-maxima corner
//! for full rationality. This is exact for semantics where lowering a single
//! coordinate of an achievable degree vector keeps it achievable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::framework::{ArgumentId, Caf, TOLERANCE};
use crate::semantics::{is_achievable, Semantics, SolverConfig};

pub const DEFAULT_CORNER_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RationalityKind {
    Irrational,
    Rational,
    FullyRational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalityStatus {
    pub kind: RationalityKind,
    /// `None` when the framework is larger than the corner limit.
    pub corners_inside: Option<u64>,
    pub corners_total: Option<u64>,
    pub refinable_axes: Vec<ArgumentId>,
}

#[derive(Debug, Error, PartialEq)]
pub enum RationalityError {
    #[error("{n} arguments exceed the corner enumeration limit of {limit}")]
    TooManyArguments { n: usize, limit: usize },
}

pub fn is_point_achievable(caf: &Caf, sem: Semantics, point: &[f64]) -> bool {
    is_achievable(&caf.graph, point, sem, &SolverConfig::default())
}

pub fn is_rational(caf: &Caf, sem: Semantics) -> bool {
    is_point_achievable(caf, sem, &caf.mins())
}

pub fn is_fully_rational(caf: &Caf, sem: Semantics) -> bool {
    is_point_achievable(caf, sem, &caf.maxs())
}

/// Every top slab `[hi(a) − eps, hi(a)]` meets the acceptability degree space.
pub fn is_epsilon_rational(caf: &Caf, sem: Semantics, eps: f64) -> bool {
    if !(eps >= 0.0) {
        return false;
    }
    if caf.intervals().iter().any(|iv| eps > iv.width() + TOLERANCE) {
        return false;
    }
    let mut point = caf.mins();
    (0..caf.len()).all(|i| {
        let lo = point[i];
        point[i] = (caf.interval(i).hi - eps).max(lo);
        let ok = is_point_achievable(caf, sem, &point);
        point[i] = lo;
        ok
    })
}

pub fn kind(caf: &Caf, sem: Semantics) -> RationalityKind {
    if !is_rational(caf, sem) {
        RationalityKind::Irrational
    } else if is_fully_rational(caf, sem) {
        RationalityKind::FullyRational
    } else {
        RationalityKind::Rational
    }
}

/// Arguments whose upper face (min-corner lifted to the maximum on that axis)
/// lies outside the acceptability degree space.
pub fn refinable_axes(caf: &Caf, sem: Semantics) -> Vec<ArgumentId> {
    let mut point = caf.mins();
    (0..caf.len())
        .filter(|&i| {
            let lo = point[i];
            point[i] = caf.interval(i).hi;
            let inside = is_point_achievable(caf, sem, &point);
            point[i] = lo;
            !inside
        })
        .map(|i| caf.graph.id(i).to_owned())
        .collect()
}

/// Counts the corners of the interval box inside the acceptability degree
/// space and classifies the framework: all corners inside is fully rational,
/// none is irrational, anything else is rational.
pub fn classify_corners(
    caf: &Caf,
    sem: Semantics,
    corner_limit: usize,
) -> Result<RationalityStatus, RationalityError> {
    let n = caf.len();
    if n > corner_limit || n >= 64 {
        return Err(RationalityError::TooManyArguments {
            n,
            limit: corner_limit,
        });
    }
    let total = 1u64 << n;
    let (mins, maxs) = (caf.mins(), caf.maxs());
    let mut point = mins.clone();
    let mut inside = 0u64;
    for mask in 0..total {
        for i in 0..n {
            point[i] = if mask >> i & 1 == 1 { maxs[i] } else { mins[i] };
        }
        if is_point_achievable(caf, sem, &point) {
            inside += 1;
        }
    }
    let kind = if inside == total {
        RationalityKind::FullyRational
    } else if inside == 0 {
        RationalityKind::Irrational
    } else {
        RationalityKind::Rational
    };
    Ok(RationalityStatus {
        kind,
        corners_inside: Some(inside),
        corners_total: Some(total),
        refinable_axes: refinable_axes(caf, sem),
    })
}

/// Corner diagnostics when the framework is small enough, the kind alone
/// otherwise.
pub fn assess(caf: &Caf, sem: Semantics, corner_limit: usize) -> RationalityStatus {
    classify_corners(caf, sem, corner_limit).unwrap_or_else(|_| RationalityStatus {
        kind: kind(caf, sem),
        corners_inside: None,
        corners_total: None,
        refinable_axes: refinable_axes(caf, sem),
    })
}

/// Outcome of cross-checking the corner verdict against uniform samples of
/// the interval box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingCrossCheck {
    pub kind: RationalityKind,
    pub samples: usize,
    pub achievable: usize,
    pub consistent: bool,
}

/// Largest framework the sampling cross-check accepts.
pub const CROSS_CHECK_MAX_ARGS: usize = 6;

/// Draws `samples` points uniformly from the interval box and checks that the
/// corner verdict does not contradict them: an irrational framework admits no
/// achievable sample, a fully rational one admits only achievable samples.
/// Intended for semantics whose axial behaviour is not established.
pub fn cross_check_by_sampling(
    caf: &Caf,
    sem: Semantics,
    samples: usize,
    seed: u64,
) -> Result<SamplingCrossCheck, RationalityError> {
    if caf.len() > CROSS_CHECK_MAX_ARGS {
        return Err(RationalityError::TooManyArguments {
            n: caf.len(),
            limit: CROSS_CHECK_MAX_ARGS,
        });
    }
    let kind = kind(caf, sem);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = vec![0.0; caf.len()];
    let mut achievable = 0;
    for _ in 0..samples {
        for (x, iv) in point.iter_mut().zip(caf.intervals()) {
            *x = iv.lo + rng.random::<f64>() * iv.width();
        }
        if is_point_achievable(caf, sem, &point) {
            achievable += 1;
        }
    }
    let consistent = match kind {
        RationalityKind::Irrational => achievable == 0,
        RationalityKind::FullyRational => achievable == samples,
        RationalityKind::Rational => true,
    };
    Ok(SamplingCrossCheck {
        kind,
        samples,
        achievable,
        consistent,
    })
}
