//! Eliciting argument strengths in weighted argumentation frameworks.
//!
//! Users state an interval of acceptable degrees for each argument instead of
//! an exact initial weight. This crate decides whether such intervals can be
//! met under a weighted gradual semantics, tightens upper bounds that cannot
//! be reached, repairs unreachable lower bounds at minimum cost and samples
//! initial weights consistent with the intervals.

pub mod correction;
pub mod evalharness;
pub mod framework;
pub mod rationality;
pub mod refinement;
pub mod sampling;
pub mod semantics;

pub use correction::{
    correct_strategy1, correct_strategy2, cost_presets, lowered_caf, CorrectionError,
    CorrectionResult, CostPreset, Strategy,
};
pub use evalharness::{emit_csv, run_experiment, ExperimentConfig, ExperimentRow, HarnessError};
pub use framework::{ArgumentId, AttackGraph, Caf, FrameworkError, Interval, Waf};
pub use rationality::{
    classify_corners, is_epsilon_rational, is_fully_rational, is_rational, RationalityKind,
    RationalityStatus,
};
pub use refinement::{is_better_refinement, is_refinement, refine, RefinementError, RefinementReport};
pub use sampling::{sample_weights, SampleBatch, SampleMethod, SamplingError};
pub use semantics::{invert_weights, is_achievable, solve_degrees, Semantics, SolveError, SolverConfig};
