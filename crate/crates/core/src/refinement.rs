//! Tightening upper bounds of a rational framework without losing any
//! achievable degree vector.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::framework::{ArgumentId, Caf, Interval, TOLERANCE};
use crate::rationality::{is_point_achievable, is_rational};
use crate::semantics::Semantics;

/// Hard stop for a single bisection; only reachable through float stalling.
const MAX_BISECTION_STEPS: usize = 200;

#[derive(Debug, Error, PartialEq)]
pub enum RefinementError {
    #[error("framework is irrational under {0}; nothing to refine")]
    Irrational(Semantics),
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("frameworks do not share the same arguments and attacks")]
    GraphMismatch,
    #[error("`{0}` is not a refinement of the original framework")]
    NotARefinement(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tightening {
    pub argument: ArgumentId,
    pub old_hi: f64,
    pub new_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub refined: Caf,
    pub tightened: Vec<Tightening>,
    pub epsilon: f64,
    /// Total bisection steps over all arguments.
    pub iterations: usize,
}

/// Best ε-refinement: for each argument whose upper face is unachievable,
/// bisect the largest achievable value on that axis (others at their lower
/// bounds) and move the upper bound to within `eps` above it.
///
/// Arguments are visited in declaration order and the intervals are updated
/// in place. Since only upper bounds move and every face test holds the other
/// arguments at their lower bounds, the visiting order does not affect the
/// result.
pub fn refine(caf: &Caf, sem: Semantics, eps: f64) -> Result<RefinementReport, RefinementError> {
    if !(eps > 0.0) {
        return Err(RefinementError::InvalidEpsilon(eps));
    }
    if !is_rational(caf, sem) {
        return Err(RefinementError::Irrational(sem));
    }
    let mut refined = caf.clone();
    let mut tightened = Vec::new();
    let mut iterations = 0;
    let mut point = caf.mins();

    for i in 0..caf.len() {
        let Interval { lo, hi } = refined.interval(i);
        point[i] = hi;
        let face_inside = is_point_achievable(&refined, sem, &point);
        if face_inside {
            point[i] = lo;
            continue;
        }
        // invariant: `l` achievable, `r` not
        let (mut l, mut r) = (lo, hi);
        let mut steps = 0;
        while r - l > eps && steps < MAX_BISECTION_STEPS {
            let m = 0.5 * (l + r);
            if m <= l || m >= r {
                break;
            }
            point[i] = m;
            if is_point_achievable(&refined, sem, &point) {
                l = m;
            } else {
                r = m;
            }
            steps += 1;
        }
        iterations += steps;
        point[i] = lo;
        if r < hi {
            refined.set_interval(i, Interval { lo, hi: r });
            tightened.push(Tightening {
                argument: caf.graph.id(i).to_owned(),
                old_hi: hi,
                new_hi: r,
            });
        }
    }

    Ok(RefinementReport {
        refined,
        tightened,
        epsilon: eps,
        iterations,
    })
}

fn same_graph(a: &Caf, b: &Caf) -> bool {
    a.graph == b.graph
}

/// Whether `candidate` refines `original`: its intervals are contained in the
/// original ones with the same lower bounds, and every tightened upper bound
/// removed only unachievable degrees. The latter is checked at resolution
/// `delta`: the point `delta` above the new bound (others at their lower
/// bounds) must be unachievable.
pub fn is_refinement(
    candidate: &Caf,
    original: &Caf,
    sem: Semantics,
    delta: f64,
) -> Result<bool, RefinementError> {
    if !(delta > 0.0) {
        return Err(RefinementError::InvalidEpsilon(delta));
    }
    if !same_graph(candidate, original) {
        return Err(RefinementError::GraphMismatch);
    }
    let contained = candidate
        .intervals()
        .iter()
        .zip(original.intervals())
        .all(|(c, o)| c.is_within(o) && (c.lo - o.lo).abs() <= TOLERANCE);
    if !contained {
        return Ok(false);
    }
    let mut point = original.mins();
    for i in 0..original.len() {
        let (new_hi, old_hi) = (candidate.interval(i).hi, original.interval(i).hi);
        if new_hi >= old_hi - TOLERANCE {
            continue;
        }
        let lo = point[i];
        point[i] = (new_hi + delta).min(old_hi);
        let removed_achievable = is_point_achievable(original, sem, &point);
        point[i] = lo;
        if removed_achievable {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `r1` is at least as good a refinement of `original` as `r2`, i.e. `r1`
/// refines `r2`.
pub fn is_better_refinement(
    r1: &Caf,
    r2: &Caf,
    original: &Caf,
    sem: Semantics,
    delta: f64,
) -> Result<bool, RefinementError> {
    if !is_refinement(r1, original, sem, delta)? {
        return Err(RefinementError::NotARefinement("r1"));
    }
    if !is_refinement(r2, original, sem, delta)? {
        return Err(RefinementError::NotARefinement("r2"));
    }
    is_refinement(r1, r2, sem, delta)
}
