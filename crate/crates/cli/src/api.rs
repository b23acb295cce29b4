//! JSON operations shared by the command line and the HTTP service.
//!
//! Every request carries the full framework under `framework` plus the
//! operation's parameters; every successful response has `"status": "ok"`
//! and echoes the semantics and parameters it was computed with.

use std::collections::BTreeMap;

use argstrength_core::correction::{
    correct_strategy1, correct_strategy2, cost_presets, CorrectionError, CostPreset,
};
use argstrength_core::framework::{Caf, FrameworkError, Waf};
use argstrength_core::rationality::{
    assess, cross_check_by_sampling, is_epsilon_rational, is_fully_rational, is_rational,
    CROSS_CHECK_MAX_ARGS, DEFAULT_CORNER_LIMIT,
};
use argstrength_core::refinement::{refine, RefinementError};
use argstrength_core::sampling::{sample_weights, SamplingError};
use argstrength_core::semantics::{
    invert_weights, is_achievable, residual, solve_degrees, Semantics, SolveError, SolverConfig,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

pub const DEFAULT_EPS: f64 = 1e-6;
const CROSS_CHECK_SAMPLES: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operation {
    Solve,
    Invert,
    Rationality,
    Refine,
    Correct,
    Sample,
}

impl Operation {
    pub const ALL: [Operation; 6] = [
        Operation::Solve,
        Operation::Invert,
        Operation::Rationality,
        Operation::Refine,
        Operation::Correct,
        Operation::Sample,
    ];

    pub fn path(self) -> &'static str {
        match self {
            Operation::Solve => "/api/solve",
            Operation::Invert => "/api/invert",
            Operation::Rationality => "/api/rationality",
            Operation::Refine => "/api/refine",
            Operation::Correct => "/api/correct",
            Operation::Sample => "/api/sample",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// The request itself is malformed.
    BadRequest,
    /// Well-formed request the operation cannot satisfy.
    Domain,
    /// Numerical failure inside an operation.
    Internal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub class: ErrorClass,
    pub code: &'static str,
    pub message: String,
    pub detail: Option<Value>,
}

impl ApiError {
    fn new(class: ErrorClass, code: &'static str, message: impl ToString) -> Self {
        ApiError {
            class,
            code,
            message: message.to_string(),
            detail: None,
        }
    }

    pub fn bad_request(message: impl ToString) -> Self {
        Self::new(ErrorClass::BadRequest, "bad_request", message)
    }

    pub fn body(&self) -> Value {
        let mut body = json!({
            "status": "error",
            "code": self.code,
            "message": self.message,
        });
        if let Some(detail) = &self.detail {
            body["detail"] = detail.clone();
        }
        body
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl From<FrameworkError> for ApiError {
    fn from(e: FrameworkError) -> Self {
        Self::new(ErrorClass::BadRequest, "invalid_framework", e)
    }
}

impl From<SolveError> for ApiError {
    fn from(e: SolveError) -> Self {
        let mut err = Self::new(ErrorClass::Internal, "not_converged", &e);
        if let SolveError::NotConverged {
            iterations,
            residual,
        } = e
        {
            err.detail = Some(json!({ "iterations": iterations, "residual": residual }));
        }
        err
    }
}

impl From<RefinementError> for ApiError {
    fn from(e: RefinementError) -> Self {
        match e {
            RefinementError::Irrational(_) => Self::new(ErrorClass::Domain, "irrational", e),
            _ => Self::new(ErrorClass::BadRequest, "invalid_parameter", e),
        }
    }
}

impl From<CorrectionError> for ApiError {
    fn from(e: CorrectionError) -> Self {
        let code = match e {
            CorrectionError::AlreadyRational(_) => "already_rational",
            CorrectionError::Infeasible => "infeasible",
            CorrectionError::NoFeasibleSubset => "no_feasible_subset",
            CorrectionError::TooManyArguments { .. } => "too_many_arguments",
            CorrectionError::AllMinimaZero => "all_minima_zero",
            _ => return Self::new(ErrorClass::BadRequest, "invalid_parameter", e),
        };
        Self::new(ErrorClass::Domain, code, e)
    }
}

impl From<SamplingError> for ApiError {
    fn from(e: SamplingError) -> Self {
        match e {
            SamplingError::Irrational(_) => Self::new(ErrorClass::Domain, "irrational", e),
            SamplingError::InvalidCount(_) => Self::new(ErrorClass::BadRequest, "invalid_parameter", e),
        }
    }
}

fn parse<T: DeserializeOwned>(body: Value) -> Result<T, ApiError> {
    serde_json::from_value(body).map_err(ApiError::bad_request)
}

fn caf_from(framework: Value) -> Result<Caf, ApiError> {
    Ok(Caf::from_value(framework)?)
}

fn waf_from(framework: Value) -> Result<Waf, ApiError> {
    Ok(Waf::from_json(&framework.to_string())?)
}

fn ok(mut payload: Value) -> Value {
    payload["status"] = json!("ok");
    payload
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveRequest {
    framework: Value,
    semantics: Semantics,
    #[serde(default)]
    solver: SolverConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InvertRequest {
    framework: Value,
    semantics: Semantics,
    degrees: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RationalityRequest {
    framework: Value,
    semantics: Semantics,
    eps: Option<f64>,
    #[serde(default = "default_corner_limit")]
    corner_limit: usize,
    #[serde(default)]
    verify_car: bool,
}

fn default_corner_limit() -> usize {
    DEFAULT_CORNER_LIMIT
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RefineRequest {
    framework: Value,
    semantics: Semantics,
    #[serde(default = "default_eps")]
    eps: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CorrectRequest {
    framework: Value,
    semantics: Semantics,
    #[serde(default = "default_eps")]
    eps: f64,
    #[serde(default = "default_strategy")]
    strategy: u8,
    #[serde(default = "default_costs")]
    costs: CostPreset,
    subset: Option<Vec<String>>,
    max_subset_args: Option<usize>,
}

fn default_strategy() -> u8 {
    1
}

fn default_costs() -> CostPreset {
    CostPreset::Custom
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleRequest {
    framework: Value,
    semantics: Semantics,
    #[serde(default = "default_sample_count")]
    n: usize,
    #[serde(default = "default_max_tries")]
    max_tries: usize,
    #[serde(default)]
    seed: u64,
}

fn default_sample_count() -> usize {
    5
}

fn default_max_tries() -> usize {
    100
}

pub fn handle(op: Operation, body: Value) -> Result<Value, ApiError> {
    match op {
        Operation::Solve => solve(parse(body)?),
        Operation::Invert => invert(parse(body)?),
        Operation::Rationality => rationality(parse(body)?),
        Operation::Refine => refinement(parse(body)?),
        Operation::Correct => correct(parse(body)?),
        Operation::Sample => sample(parse(body)?),
    }
}

fn solve(req: SolveRequest) -> Result<Value, ApiError> {
    let waf = waf_from(req.framework)?;
    let degrees = solve_degrees(&waf, req.semantics, &req.solver)?;
    Ok(ok(json!({
        "semantics": req.semantics,
        "solver": req.solver,
        "degrees": waf.graph.named(&degrees),
        "residual": residual(&waf, req.semantics, &degrees),
    })))
}

fn invert(req: InvertRequest) -> Result<Value, ApiError> {
    let caf = caf_from(req.framework)?;
    let degrees = caf.graph.vector_from_map(&req.degrees)?;
    if let Some((id, d)) = req.degrees.iter().find(|(_, d)| !(0.0..=1.0).contains(*d)) {
        return Err(ApiError::bad_request(format!(
            "degree of `{id}` must lie in [0, 1], got {d}"
        )));
    }
    let cfg = SolverConfig::default();
    let weights = invert_weights(&caf.graph, &degrees, req.semantics, &cfg);
    Ok(ok(json!({
        "semantics": req.semantics,
        "degrees": req.degrees,
        "weights": caf.graph.named(&weights),
        "achievable": is_achievable(&caf.graph, &degrees, req.semantics, &cfg),
    })))
}

fn rationality(req: RationalityRequest) -> Result<Value, ApiError> {
    let caf = caf_from(req.framework)?;
    let sem = req.semantics;
    let status = assess(&caf, sem, req.corner_limit);
    let mut out = json!({
        "semantics": sem,
        "corner_limit": req.corner_limit,
        "kind": status.kind,
        "corners_inside": status.corners_inside,
        "corners_total": status.corners_total,
        "refinable_axes": status.refinable_axes,
        "rational": is_rational(&caf, sem),
        "fully_rational": is_fully_rational(&caf, sem),
    });
    if let Some(eps) = req.eps {
        out["eps"] = json!(eps);
        out["epsilon_rational"] = json!(is_epsilon_rational(&caf, sem, eps));
    }
    if req.verify_car && sem == Semantics::Car {
        out["verify_car"] = if caf.len() <= CROSS_CHECK_MAX_ARGS {
            let check = cross_check_by_sampling(&caf, sem, CROSS_CHECK_SAMPLES, 0)
                .expect("size checked above");
            serde_json::to_value(check).expect("serializable")
        } else {
            json!({ "skipped": format!("cross-check limited to {CROSS_CHECK_MAX_ARGS} arguments") })
        };
    }
    Ok(ok(out))
}

fn refinement(req: RefineRequest) -> Result<Value, ApiError> {
    let caf = caf_from(req.framework)?;
    let report = refine(&caf, req.semantics, req.eps)?;
    Ok(ok(json!({
        "semantics": req.semantics,
        "eps": req.eps,
        "refined": report.refined,
        "tightened": report.tightened,
        "iterations": report.iterations,
    })))
}

fn correct(req: CorrectRequest) -> Result<Value, ApiError> {
    let caf = caf_from(req.framework)?;
    let costs = cost_presets(req.costs, &caf)?;
    let subset = req
        .subset
        .as_ref()
        .map(|ids| {
            ids.iter()
                .map(|id| caf.graph.require(id))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    let result = match req.strategy {
        1 => correct_strategy1(&caf, req.semantics, &costs, req.eps, subset.as_deref())?,
        2 => {
            if subset.is_some() {
                return Err(ApiError::bad_request("`subset` applies to strategy 1 only"));
            }
            correct_strategy2(&caf, req.semantics, &costs, req.eps, req.max_subset_args)?
        }
        other => {
            return Err(ApiError::bad_request(format!(
                "strategy must be 1 or 2, got {other}"
            )))
        }
    };
    Ok(ok(json!({
        "semantics": req.semantics,
        "eps": req.eps,
        "strategy": req.strategy,
        "costs": req.costs,
        "max_subset_args": req.max_subset_args,
        "corrected": result.corrected,
        "total_cost": result.total_cost,
        "modified": result.modified,
        "parameter_t": result.parameter_t,
        "subset": result.subset,
    })))
}

fn sample(req: SampleRequest) -> Result<Value, ApiError> {
    let caf = caf_from(req.framework)?;
    let batch = sample_weights(&caf, req.semantics, req.n, req.max_tries, req.seed)?;
    let entries: Vec<Value> = batch
        .entries
        .iter()
        .map(|e| {
            json!({
                "weights": caf.graph.named(&e.weights),
                "degrees": caf.graph.named(&e.degrees),
                "method": e.method,
            })
        })
        .collect();
    Ok(ok(json!({
        "semantics": req.semantics,
        "n": req.n,
        "max_tries": req.max_tries,
        "seed": req.seed,
        "entries": entries,
        "attempted": batch.attempted,
    })))
}
