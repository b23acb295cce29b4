#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

use argstrength_core::framework::{AttackGraph, Caf, Interval, Waf};
use argstrength_core::semantics::{solve_degrees, Semantics, SolverConfig};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn data_json(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(data(name)).unwrap()).unwrap()
}

pub fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_argstrength"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn cli_json(args: &[&str]) -> Result<Value, String> {
    let out = run_cli(args);
    if !out.status.success() {
        return Err(format!(
            "{args:?} exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    serde_json::from_slice(&out.stdout).map_err(|e| format!("{args:?}: invalid JSON: {e}"))
}

#[derive(Clone, Copy)]
pub enum Kind {
    Str,
    Num,
    Bool,
    Obj,
    Arr,
    NumOrNull,
}

fn matches(v: &Value, kind: Kind) -> bool {
    match kind {
        Kind::Str => v.is_string(),
        Kind::Num => v.is_number(),
        Kind::Bool => v.is_boolean(),
        Kind::Obj => v.is_object(),
        Kind::Arr => v.is_array(),
        Kind::NumOrNull => v.is_number() || v.is_null(),
    }
}

/// Required keys and their JSON types for each response shape.
pub fn schema(name: &str) -> &'static [(&'static str, Kind)] {
    use Kind::*;
    match name {
        "solve" => &[("status", Str), ("semantics", Str), ("degrees", Obj), ("residual", Num), ("solver", Obj)],
        "invert" => &[("status", Str), ("semantics", Str), ("degrees", Obj), ("weights", Obj), ("achievable", Bool)],
        "rationality" => &[
            ("status", Str),
            ("semantics", Str),
            ("kind", Str),
            ("corners_inside", NumOrNull),
            ("corners_total", NumOrNull),
            ("refinable_axes", Arr),
            ("rational", Bool),
            ("fully_rational", Bool),
        ],
        "refine" => &[("status", Str), ("semantics", Str), ("eps", Num), ("refined", Obj), ("tightened", Arr), ("iterations", Num)],
        "correct" => &[
            ("status", Str),
            ("semantics", Str),
            ("eps", Num),
            ("strategy", Num),
            ("corrected", Obj),
            ("total_cost", Num),
            ("modified", Arr),
            ("parameter_t", Num),
            ("subset", Arr),
        ],
        "sample" => &[("status", Str), ("semantics", Str), ("n", Num), ("seed", Num), ("entries", Arr), ("attempted", Num)],
        "eval" => &[("status", Str), ("rows", Num), ("summary", Arr), ("config", Obj)],
        "health" => &[("status", Str)],
        _ => panic!("no schema for {name}"),
    }
}

pub fn check_schema(name: &str, v: &Value) -> Result<(), String> {
    for &(key, kind) in schema(name) {
        match v.get(key) {
            Some(x) if matches(x, kind) => {}
            Some(x) => return Err(format!("{name}: `{key}` has unexpected type: {x}")),
            None => return Err(format!("{name}: missing `{key}` in {v}")),
        }
    }
    if v["status"] != "ok" {
        return Err(format!("{name}: status is {}", v["status"]));
    }
    if name == "rationality"
        && !["IRRATIONAL", "RATIONAL", "FULLY_RATIONAL"].contains(&v["kind"].as_str().unwrap_or(""))
    {
        return Err(format!("rationality: bad kind {}", v["kind"]));
    }
    for key in ["refined", "corrected"] {
        if let Some(doc) = v.get(key) {
            Caf::from_value(doc.clone()).map_err(|e| format!("{name}: `{key}` is not a framework: {e}"))?;
        }
    }
    Ok(())
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> AttackGraph {
    let p: f64 = rng.random_range(0.0..0.7);
    let self_loops = rng.random_bool(0.2);
    let mut g = AttackGraph::new((0..n).map(|i| format!("a{i}"))).unwrap();
    for s in 0..n {
        for t in 0..n {
            if (s != t || self_loops) && rng.random_bool(p) {
                g.add_attack(&format!("a{s}"), &format!("a{t}")).unwrap();
            }
        }
    }
    g
}

pub fn random_weight(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random(),
    }
}

pub fn random_waf(rng: &mut ChaCha8Rng, max_n: usize) -> Waf {
    let n = rng.random_range(1..=max_n);
    let g = random_graph(rng, n);
    let w = (0..n).map(|_| random_weight(rng)).collect();
    Waf::new(g, w).unwrap()
}

/// A framework that is rational under `sem` by construction: intervals are
/// drawn around the degrees of a random weighting.
pub fn rational_caf_around_solution(rng: &mut ChaCha8Rng, max_n: usize, sem: Semantics) -> Caf {
    let waf = random_waf(rng, max_n);
    let d = solve_degrees(&waf, sem, &SolverConfig::default()).unwrap();
    let intervals = d
        .iter()
        .map(|&x| {
            let lo = x * rng.random::<f64>();
            let hi = x + (1.0 - x) * rng.random::<f64>();
            Interval::new(lo, hi).unwrap()
        })
        .collect();
    Caf::new(waf.graph, intervals, None).unwrap()
}

/// Uniformly random intervals on a random graph.
pub fn random_caf(rng: &mut ChaCha8Rng, max_n: usize) -> Caf {
    let n = rng.random_range(1..=max_n);
    let g = random_graph(rng, n);
    let intervals = (0..n)
        .map(|_| {
            let (a, b): (f64, f64) = (rng.random(), rng.random());
            Interval::new(a.min(b), a.max(b)).unwrap()
        })
        .collect();
    Caf::new(g, intervals, None).unwrap()
}
