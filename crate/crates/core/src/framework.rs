//! Argumentation frameworks, constrained frameworks and their JSON form.
//!
//! Arguments keep the order in which they were declared. Every per-argument
//! vector in this crate (weights, degrees, intervals, costs) is indexed by that
//! declaration order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

/// Absolute tolerance used for interval comparisons.
pub const TOLERANCE: f64 = 1e-9;

pub type ArgumentId = String;

#[derive(Debug, Error)]
pub enum FrameworkError {
    #[error("malformed framework document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("argument id must be non-empty")]
    EmptyId,
    #[error("argument `{0}` declared more than once")]
    DuplicateArgument(ArgumentId),
    #[error("unknown argument `{0}`")]
    UnknownArgument(ArgumentId),
    #[error("argument `{id}`: invalid interval [{lo}, {hi}] (need 0 <= lo <= hi <= 1)")]
    InvalidInterval { id: ArgumentId, lo: f64, hi: f64 },
    #[error("argument `{id}`: cost must be strictly positive and finite, got {cost}")]
    InvalidCost { id: ArgumentId, cost: f64 },
    #[error("argument `{id}`: weight must lie in [0, 1], got {weight}")]
    InvalidWeight { id: ArgumentId, weight: f64 },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// A closed sub-interval of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Option<Self> {
        (lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi && hi <= 1.0)
            .then_some(Interval { lo, hi })
    }

    pub fn point(d: f64) -> Option<Self> {
        Self::new(d, d)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo - TOLERANCE && x <= self.hi + TOLERANCE
    }

    /// `self ⊆ other`, up to [`TOLERANCE`].
    pub fn is_within(&self, other: &Interval) -> bool {
        self.lo >= other.lo - TOLERANCE && self.hi <= other.hi + TOLERANCE
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Arguments and the attack relation between them.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackGraph {
    ids: Vec<ArgumentId>,
    index: HashMap<ArgumentId, usize>,
    attacks: Vec<(usize, usize)>,
    attackers: Vec<Vec<usize>>,
}

impl AttackGraph {
    pub fn new<I, S>(ids: I) -> Result<Self, FrameworkError>
    where
        I: IntoIterator<Item = S>,
        S: Into<ArgumentId>,
    {
        let mut graph = AttackGraph {
            ids: Vec::new(),
            index: HashMap::new(),
            attacks: Vec::new(),
            attackers: Vec::new(),
        };
        for id in ids {
            let id = id.into();
            if id.is_empty() {
                return Err(FrameworkError::EmptyId);
            }
            if graph.index.contains_key(&id) {
                return Err(FrameworkError::DuplicateArgument(id));
            }
            graph.index.insert(id.clone(), graph.ids.len());
            graph.ids.push(id);
            graph.attackers.push(Vec::new());
        }
        Ok(graph)
    }

    /// Builds a graph from ids and `(attacker, target)` pairs.
    pub fn with_attacks<I, S>(ids: I, attacks: &[(&str, &str)]) -> Result<Self, FrameworkError>
    where
        I: IntoIterator<Item = S>,
        S: Into<ArgumentId>,
    {
        let mut graph = Self::new(ids)?;
        for (from, to) in attacks {
            graph.add_attack(from, to)?;
        }
        Ok(graph)
    }

    /// Adds `from → to`. Returns `false` when the attack was already present.
    pub fn add_attack(&mut self, from: &str, to: &str) -> Result<bool, FrameworkError> {
        let src = self.require(from)?;
        let dst = self.require(to)?;
        Ok(self.add_attack_index(src, dst))
    }

    pub(crate) fn add_attack_index(&mut self, src: usize, dst: usize) -> bool {
        if self.attackers[dst].contains(&src) {
            return false;
        }
        self.attacks.push((src, dst));
        self.attackers[dst].push(src);
        true
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[ArgumentId] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<usize, FrameworkError> {
        self.index_of(id)
            .ok_or_else(|| FrameworkError::UnknownArgument(id.to_owned()))
    }

    /// Attacks as `(attacker, target)` index pairs, in insertion order.
    pub fn attacks(&self) -> &[(usize, usize)] {
        &self.attacks
    }

    /// Indices of the direct attackers of argument `i`.
    pub fn attackers_of(&self, i: usize) -> &[usize] {
        &self.attackers[i]
    }

    /// The set of arguments attacking `id`.
    pub fn attackers(&self, id: &str) -> Result<HashSet<&str>, FrameworkError> {
        let i = self.require(id)?;
        Ok(self.attackers[i].iter().map(|&b| self.id(b)).collect())
    }

    /// Pairs each value of an index-aligned vector with its argument id.
    pub fn named(&self, values: &[f64]) -> BTreeMap<ArgumentId, f64> {
        self.ids.iter().cloned().zip(values.iter().copied()).collect()
    }

    /// Reads an id-keyed map into a vector in declaration order. Every
    /// argument must be present.
    pub fn vector_from_map(
        &self,
        map: &BTreeMap<ArgumentId, f64>,
    ) -> Result<Vec<f64>, FrameworkError> {
        for key in map.keys() {
            self.require(key)?;
        }
        self.ids
            .iter()
            .map(|id| {
                map.get(id)
                    .copied()
                    .ok_or_else(|| FrameworkError::UnknownArgument(id.clone()))
            })
            .collect()
    }
}

/// Weighted argumentation framework.
#[derive(Debug, Clone, PartialEq)]
pub struct Waf {
    pub graph: AttackGraph,
    pub weights: Vec<f64>,
}

impl Waf {
    pub fn new(graph: AttackGraph, weights: Vec<f64>) -> Result<Self, FrameworkError> {
        if weights.len() != graph.len() {
            return Err(FrameworkError::LengthMismatch {
                expected: graph.len(),
                got: weights.len(),
            });
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(0.0..=1.0).contains(&w) {
                return Err(FrameworkError::InvalidWeight {
                    id: graph.id(i).to_owned(),
                    weight: w,
                });
            }
        }
        Ok(Waf { graph, weights })
    }

    /// Parses a framework document, reading each argument's `weight`
    /// (defaulting to 1).
    pub fn from_json(text: &str) -> Result<Self, FrameworkError> {
        let doc: Document = serde_json::from_str(text)?;
        let graph = doc.graph()?;
        let weights = doc
            .arguments
            .iter()
            .map(|a| a.weight.unwrap_or(1.0))
            .collect();
        Waf::new(graph, weights)
    }

    pub fn to_json(&self) -> Value {
        let args: Vec<Value> = self
            .graph
            .ids()
            .iter()
            .zip(&self.weights)
            .map(|(id, &w)| serde_json::json!({ "id": id, "weight": w }))
            .collect();
        serde_json::json!({ "arguments": args, "attacks": attacks_json(&self.graph) })
    }
}

/// Constrained argumentation framework: an attack graph with an admissible
/// degree interval and a modification cost per argument.
#[derive(Debug, Clone, PartialEq)]
pub struct Caf {
    pub graph: AttackGraph,
    intervals: Vec<Interval>,
    costs: Vec<f64>,
}

impl Caf {
    pub fn new(
        graph: AttackGraph,
        intervals: Vec<Interval>,
        costs: Option<Vec<f64>>,
    ) -> Result<Self, FrameworkError> {
        let n = graph.len();
        if intervals.len() != n {
            return Err(FrameworkError::LengthMismatch {
                expected: n,
                got: intervals.len(),
            });
        }
        for (i, iv) in intervals.iter().enumerate() {
            if Interval::new(iv.lo, iv.hi).is_none() {
                return Err(FrameworkError::InvalidInterval {
                    id: graph.id(i).to_owned(),
                    lo: iv.lo,
                    hi: iv.hi,
                });
            }
        }
        let costs = costs.unwrap_or_else(|| vec![1.0; n]);
        if costs.len() != n {
            return Err(FrameworkError::LengthMismatch {
                expected: n,
                got: costs.len(),
            });
        }
        for (i, &c) in costs.iter().enumerate() {
            if !(c.is_finite() && c > 0.0) {
                return Err(FrameworkError::InvalidCost {
                    id: graph.id(i).to_owned(),
                    cost: c,
                });
            }
        }
        Ok(Caf {
            graph,
            intervals,
            costs,
        })
    }

    /// Every interval set to `[0, 1]`, unit costs.
    pub fn unconstrained(graph: AttackGraph) -> Self {
        let n = graph.len();
        Caf {
            graph,
            intervals: vec![Interval::UNIT; n],
            costs: vec![1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn interval(&self, i: usize) -> Interval {
        self.intervals[i]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn mins(&self) -> Vec<f64> {
        self.intervals.iter().map(|iv| iv.lo).collect()
    }

    pub fn maxs(&self) -> Vec<f64> {
        self.intervals.iter().map(|iv| iv.hi).collect()
    }

    /// Copy of this framework with interval `i` replaced.
    pub fn with_interval(&self, i: usize, interval: Interval) -> Caf {
        let mut out = self.clone();
        out.intervals[i] = interval;
        out
    }

    pub(crate) fn set_interval(&mut self, i: usize, interval: Interval) {
        debug_assert!(Interval::new(interval.lo, interval.hi).is_some());
        self.intervals[i] = interval;
    }

    pub fn with_costs(&self, costs: Vec<f64>) -> Result<Caf, FrameworkError> {
        Caf::new(self.graph.clone(), self.intervals.clone(), Some(costs))
    }

    /// Parses the canonical JSON document, filling a missing interval with
    /// `[0, 1]` and a missing cost with 1.
    pub fn from_json(text: &str) -> Result<Self, FrameworkError> {
        let doc: Document = serde_json::from_str(text)?;
        doc.into_caf()
    }

    pub fn from_value(value: Value) -> Result<Self, FrameworkError> {
        let doc: Document = serde_json::from_value(value)?;
        doc.into_caf()
    }

    pub fn to_json(&self) -> Value {
        let args: Vec<Value> = (0..self.len())
            .map(|i| {
                let iv = self.intervals[i];
                serde_json::json!({
                    "id": self.graph.id(i),
                    "interval": [iv.lo, iv.hi],
                    "cost": number(self.costs[i]),
                })
            })
            .collect();
        serde_json::json!({ "arguments": args, "attacks": attacks_json(&self.graph) })
    }

    pub fn to_json_string(&self) -> String {
        self.to_json().to_string()
    }
}

impl Serialize for Caf {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Caf {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = Document::deserialize(deserializer)?;
        doc.into_caf().map_err(serde::de::Error::custom)
    }
}

/// Integral values are written without a fractional part.
fn number(x: f64) -> Value {
    if x.fract() == 0.0 && x.abs() < 9.0e15 {
        Value::from(x as i64)
    } else {
        Value::from(x)
    }
}

fn attacks_json(graph: &AttackGraph) -> Value {
    graph
        .attacks()
        .iter()
        .map(|&(s, t)| serde_json::json!([graph.id(s), graph.id(t)]))
        .collect()
}

#[derive(Debug, Deserialize)]
struct ArgumentEntry {
    id: String,
    interval: Option<[f64; 2]>,
    cost: Option<f64>,
    weight: Option<f64>,
    #[serde(flatten)]
    extra: BTreeMap<String, Value>,
}

#[derive(Debug, Deserialize)]
struct Document {
    arguments: Vec<ArgumentEntry>,
    #[serde(default)]
    attacks: Vec<(String, String)>,
    #[serde(flatten)]
    extra: BTreeMap<String, Value>,
}

impl Document {
    fn graph(&self) -> Result<AttackGraph, FrameworkError> {
        for key in self.extra.keys() {
            log::warn!("ignoring unknown top-level key `{key}`");
        }
        for arg in &self.arguments {
            for key in arg.extra.keys() {
                log::warn!("argument `{}`: ignoring unknown key `{key}`", arg.id);
            }
        }
        let mut graph = AttackGraph::new(self.arguments.iter().map(|a| a.id.clone()))?;
        for (from, to) in &self.attacks {
            if !graph.add_attack(from, to)? {
                log::warn!("duplicate attack ({from}, {to}) ignored");
            }
        }
        Ok(graph)
    }

    fn into_caf(self) -> Result<Caf, FrameworkError> {
        let graph = self.graph()?;
        let mut intervals = Vec::with_capacity(graph.len());
        let mut costs = Vec::with_capacity(graph.len());
        for arg in &self.arguments {
            let iv = match arg.interval {
                None => Interval::UNIT,
                Some([lo, hi]) => Interval::new(lo, hi).ok_or_else(|| {
                    FrameworkError::InvalidInterval {
                        id: arg.id.clone(),
                        lo,
                        hi,
                    }
                })?,
            };
            intervals.push(iv);
            costs.push(arg.cost.unwrap_or(1.0));
        }
        Caf::new(graph, intervals, Some(costs))
    }
}
