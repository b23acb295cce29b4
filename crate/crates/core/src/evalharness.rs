//! Benchmark harness: random irrational instances repaired by both
//! correction strategies, emitted as CSV rows.

use std::io;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correction::{correct_strategy1, correct_strategy2, CorrectionError, Strategy};
use crate::framework::{AttackGraph, Caf, Interval};
use crate::rationality::is_rational;
use crate::semantics::Semantics;

/// Consecutive rational draws tolerated before giving up on an instance.
pub const MAX_IRRATIONAL_DRAWS: usize = 10_000;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error("no irrational instance after {0} draws; the configuration likely cannot produce one")]
    NoIrrationalInstance(usize),
    #[error("correction failed for n={n}, seed={seed}, {semantics}: {source}")]
    Correction {
        n: usize,
        seed: u64,
        semantics: Semantics,
        #[source]
        source: CorrectionError,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub runs_per_n: usize,
    pub edge_prob: f64,
    /// Range of the random lower bound `x` in each interval `[x, 1]`.
    pub lo_range: [f64; 2],
    /// Inclusive range of the integer costs.
    pub cost_range: [u32; 2],
    pub semantics: Vec<Semantics>,
    pub eps: f64,
    pub seed: u64,
    pub allow_self_attacks: bool,
    pub s2_arg_cap: Option<usize>,
    /// Reuse one instance per `(n, run)` across all semantics instead of
    /// drawing one per semantics.
    pub shared_instances: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_min: 4,
            n_max: 14,
            runs_per_n: 40,
            edge_prob: 0.5,
            lo_range: [0.8, 1.0],
            cost_range: [1, 11],
            semantics: Semantics::ALL.to_vec(),
            eps: 1e-6,
            seed: 0,
            allow_self_attacks: false,
            s2_arg_cap: None,
            shared_instances: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: &str| Err(HarnessError::InvalidConfig(msg.to_owned()));
        if self.n_min < 1 || self.n_min > self.n_max {
            return fail("need 1 <= n_min <= n_max");
        }
        if !(0.0..=1.0).contains(&self.edge_prob) {
            return fail("edge_prob must lie in [0, 1]");
        }
        if self.runs_per_n < 1 {
            return fail("runs_per_n must be at least 1");
        }
        if Interval::new(self.lo_range[0], self.lo_range[1]).is_none() {
            return fail("lo_range must be a sub-interval of [0, 1]");
        }
        if self.cost_range[0] < 1 || self.cost_range[0] > self.cost_range[1] {
            return fail("cost_range must satisfy 1 <= lo <= hi");
        }
        if self.semantics.is_empty() {
            return fail("at least one semantics is required");
        }
        if !(self.eps > 0.0) {
            return fail("eps must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub n: usize,
    pub seed: u64,
    pub semantics: Semantics,
    pub strategy: Strategy,
    pub total_cost: f64,
    pub num_modified: usize,
    pub runtime_ms: f64,
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for a counter path below `master`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(master), |acc, &p| mix(acc ^ mix(p)))
}

/// Directed G(n, p) over ordered pairs, intervals `[x, 1]` with `x` uniform
/// in `lo_range`, integer costs uniform in `cost_range`.
pub fn generate_instance(n: usize, cfg: &ExperimentConfig, instance_seed: u64) -> Caf {
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed);
    let mut graph = AttackGraph::new((0..n).map(|i| format!("a{i}")))
        .expect("generated ids are unique and non-empty");
    for src in 0..n {
        for dst in 0..n {
            if src == dst && !cfg.allow_self_attacks {
                continue;
            }
            if rng.random::<f64>() < cfg.edge_prob {
                graph.add_attack_index(src, dst);
            }
        }
    }
    let [lo_min, lo_max] = cfg.lo_range;
    let intervals = (0..n)
        .map(|_| {
            let x = (lo_min + rng.random::<f64>() * (lo_max - lo_min)).min(1.0);
            Interval { lo: x, hi: 1.0 }
        })
        .collect();
    let [c_min, c_max] = cfg.cost_range;
    let costs = (0..n)
        .map(|_| f64::from(rng.random_range(c_min..=c_max)))
        .collect();
    Caf::new(graph, intervals, Some(costs)).expect("generated framework is valid")
}

/// First instance from the stream that is irrational under every semantics
/// in `semantics`.
pub fn make_irrational_instance_for(
    n: usize,
    semantics: &[Semantics],
    cfg: &ExperimentConfig,
    stream_seed: u64,
) -> Result<Caf, HarnessError> {
    for attempt in 0..MAX_IRRATIONAL_DRAWS {
        let caf = generate_instance(n, cfg, derive_seed(stream_seed, &[attempt as u64]));
        if semantics.iter().all(|&sem| !is_rational(&caf, sem)) {
            log::debug!("n={n}: irrational instance after {attempt} discards");
            return Ok(caf);
        }
    }
    Err(HarnessError::NoIrrationalInstance(MAX_IRRATIONAL_DRAWS))
}

pub fn make_irrational_instance(
    n: usize,
    sem: Semantics,
    cfg: &ExperimentConfig,
    stream_seed: u64,
) -> Result<Caf, HarnessError> {
    make_irrational_instance_for(n, &[sem], cfg, stream_seed)
}

struct Cell {
    n: usize,
    run: usize,
    sem_index: usize,
}

fn run_cell(cfg: &ExperimentConfig, cell: &Cell) -> Result<[ExperimentRow; 2], HarnessError> {
    let sem = cfg.semantics[cell.sem_index];
    let (stream_seed, instance) = if cfg.shared_instances {
        let seed = derive_seed(cfg.seed, &[cell.n as u64, cell.run as u64]);
        (seed, make_irrational_instance_for(cell.n, &cfg.semantics, cfg, seed)?)
    } else {
        let seed = derive_seed(
            cfg.seed,
            &[cell.n as u64, cell.run as u64, 1 + cell.sem_index as u64],
        );
        (seed, make_irrational_instance(cell.n, sem, cfg, seed)?)
    };
    let wrap = |source| HarnessError::Correction {
        n: cell.n,
        seed: stream_seed,
        semantics: sem,
        source,
    };
    let costs = instance.costs().to_vec();

    let start = Instant::now();
    let s1 = correct_strategy1(&instance, sem, &costs, cfg.eps, None).map_err(wrap)?;
    let s1_ms = start.elapsed().as_secs_f64() * 1e3;

    let start = Instant::now();
    let s2 = correct_strategy2(&instance, sem, &costs, cfg.eps, cfg.s2_arg_cap).map_err(wrap)?;
    let s2_ms = start.elapsed().as_secs_f64() * 1e3;

    let row = |strategy, total_cost, num_modified, runtime_ms| ExperimentRow {
        n: cell.n,
        seed: stream_seed,
        semantics: sem,
        strategy,
        total_cost,
        num_modified,
        runtime_ms,
    };
    Ok([
        row(Strategy::S1, s1.total_cost, s1.modified.len(), s1_ms),
        row(Strategy::S2, s2.total_cost, s2.modified.len(), s2_ms),
    ])
}

/// Runs every `(n, run, semantics)` cell and returns two rows per cell (S1
/// then S2), ordered by `n`, run and semantics.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>, HarnessError> {
    cfg.validate()?;
    let cells: Vec<Cell> = (cfg.n_min..=cfg.n_max)
        .flat_map(|n| {
            (0..cfg.runs_per_n).flat_map(move |run| {
                (0..cfg.semantics.len()).map(move |sem_index| Cell { n, run, sem_index })
            })
        })
        .collect();
    let rows = cells
        .par_iter()
        .map(|cell| run_cell(cfg, cell))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(rows.into_iter().flatten().collect())
}

pub const CSV_HEADER: [&str; 7] = [
    "n",
    "seed",
    "semantics",
    "strategy",
    "total_cost",
    "num_modified",
    "runtime_ms",
];

pub fn write_csv<W: io::Write>(rows: &[ExperimentRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.seed.to_string(),
            r.semantics.to_string(),
            format!("{:?}", r.strategy),
            r.total_cost.to_string(),
            r.num_modified.to_string(),
            format!("{:.3}", r.runtime_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[ExperimentRow], path: &Path) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path)?;
    write_csv(rows, io::BufWriter::new(file))
}

/// Mean and standard deviation of a metric per `(n, semantics, strategy)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub n: usize,
    pub semantics: Semantics,
    pub strategy: Strategy,
    pub runs: usize,
    pub mean_cost: f64,
    pub std_cost: f64,
    pub mean_modified: f64,
    pub std_modified: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn summarize(rows: &[ExperimentRow]) -> Vec<GroupSummary> {
    let mut keys: Vec<(usize, Semantics, Strategy)> = Vec::new();
    for r in rows {
        let key = (r.n, r.semantics, r.strategy);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(n, semantics, strategy)| {
            let group: Vec<&ExperimentRow> = rows
                .iter()
                .filter(|r| r.n == n && r.semantics == semantics && r.strategy == strategy)
                .collect();
            let costs: Vec<f64> = group.iter().map(|r| r.total_cost).collect();
            let modified: Vec<f64> = group.iter().map(|r| r.num_modified as f64).collect();
            let (mean_cost, std_cost) = mean_std(&costs);
            let (mean_modified, std_modified) = mean_std(&modified);
            GroupSummary {
                n,
                semantics,
                strategy,
                runs: group.len(),
                mean_cost,
                std_cost,
                mean_modified,
                std_modified,
            }
        })
        .collect()
}
