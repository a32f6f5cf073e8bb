//! Random instances and timed algorithm comparisons.

use crate::admg::{Admg, Edge};
use crate::error::{Error, Result};
use crate::exact::{is_feasible, Bounds, ExactSolver, Solution};
use crate::heuristics::{best_heuristic, heid1, heid2};
use crate::io::GraphFile;
use crate::mcip::{
    mcip_heuristic, mcip_solve_until, t2_edge_id_to_mcip, McipHeuristic, McipSolution,
};
use crate::probmodel::{score_solution, to_edge_id_weights, Objective, ProbabilisticAdmg, Weight};
use crate::vset::{VertexId, VertexSet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

/// Draws rejected before [`Error::GenerationExhausted`].
pub const MAX_DRAWS: usize = 10_000;
pub const DEFAULT_BATCH: usize = 50;
pub const DEFAULT_TIMEOUT_SECS: u64 = 180;

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub n_vertices: usize,
    /// `None` means `ln(n) / n`.
    pub edge_sparsity: Option<f64>,
    pub prob_low: f64,
    pub prob_high: f64,
    pub seed: u64,
    pub require_feasible: bool,
}

impl GenConfig {
    pub fn new(n_vertices: usize, seed: u64) -> Self {
        GenConfig {
            n_vertices,
            edge_sparsity: None,
            prob_low: 0.51,
            prob_high: 1.0,
            seed,
            require_feasible: true,
        }
    }

    pub fn sparsity(&self) -> f64 {
        self.edge_sparsity
            .unwrap_or_else(|| (self.n_vertices as f64).ln() / self.n_vertices as f64)
    }

    fn validate(&self) -> Result<()> {
        let s = self.sparsity();
        if self.n_vertices < 2 {
            return Err(Error::InvalidConfig("need at least 2 vertices".into()));
        }
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::InvalidConfig(format!("sparsity {s} outside (0, 1]")));
        }
        if !(self.prob_low > 0.0 && self.prob_low <= self.prob_high && self.prob_high <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "probability bounds [{}, {}] invalid",
                self.prob_low, self.prob_high
            )));
        }
        Ok(())
    }
}

/// A probabilistic graph with its query target.
#[derive(Debug, Clone)]
pub struct BenchInstance {
    pub id: String,
    pub pg: ProbabilisticAdmg,
    pub target: VertexSet,
}

impl BenchInstance {
    fn fingerprint(&self) -> Vec<Edge> {
        self.pg.graph.edges().collect()
    }
}

fn last_in_order(g: &Admg) -> VertexSet {
    let last = *g.topological_order().last().expect("graph has vertices");
    VertexSet::singleton(g.n(), last)
}

fn feasible(pg: &ProbabilisticAdmg, target: &VertexSet) -> bool {
    to_edge_id_weights(pg, Objective::MostPlausible, target)
        .map(|inst| is_feasible(&inst))
        .unwrap_or(false)
}

fn draw(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> (ProbabilisticAdmg, VertexSet) {
    let n = cfg.n_vertices;
    let s = cfg.sparsity();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(s) {
                edges.push(Edge::directed(
                    VertexId::from(order[i]),
                    VertexId::from(order[j]),
                ));
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(s) {
                edges.push(Edge::bidirected(VertexId::from(i), VertexId::from(j)));
            }
        }
    }
    let prob: BTreeMap<Edge, f64> = edges
        .iter()
        .map(|e| (*e, rng.gen_range(cfg.prob_low..=cfg.prob_high)))
        .collect();
    let g = Admg::from_parts(names, edges).expect("edges follow a topological order");
    let target = last_in_order(&g);
    (
        ProbabilisticAdmg::new(g, prob).expect("probabilities drawn in range"),
        target,
    )
}

fn draw_until_feasible(
    cfg: &GenConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(ProbabilisticAdmg, VertexSet)> {
    for _ in 0..MAX_DRAWS {
        let (pg, target) = draw(cfg, rng);
        if !cfg.require_feasible || feasible(&pg, &target) {
            return Ok((pg, target));
        }
    }
    Err(Error::GenerationExhausted(MAX_DRAWS))
}

/// One random instance; deterministic in the seed.
pub fn generate_instance(cfg: &GenConfig) -> Result<BenchInstance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (pg, target) = draw_until_feasible(cfg, &mut rng)?;
    Ok(BenchInstance {
        id: format!("n{}-s{}", cfg.n_vertices, cfg.seed),
        pg,
        target,
    })
}

/// `count` instances from one seeded stream, with repeated edge sets
/// rejected.
pub fn generate_batch(cfg: &GenConfig, count: usize) -> Result<Vec<BenchInstance>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seen: HashSet<Vec<Edge>> = HashSet::new();
    let mut out = Vec::with_capacity(count);
    let mut duplicates = 0;
    while out.len() < count {
        let (pg, target) = draw_until_feasible(cfg, &mut rng)?;
        let inst = BenchInstance {
            id: format!("n{}-s{}-{}", cfg.n_vertices, cfg.seed, out.len()),
            pg,
            target,
        };
        if seen.insert(inst.fingerprint()) {
            out.push(inst);
        } else {
            duplicates += 1;
            if duplicates >= MAX_DRAWS {
                return Err(Error::GenerationExhausted(MAX_DRAWS));
            }
        }
    }
    Ok(out)
}

/// Loads a directed skeleton and adds random bidirected edges and
/// probabilities the same way [`generate_instance`] does.
pub fn ingest_real_graph(
    path: &Path,
    bidirected_sparsity: Option<f64>,
    prob_low: f64,
    prob_high: f64,
    seed: u64,
) -> Result<BenchInstance> {
    let text = std::fs::read_to_string(path)?;
    let skeleton = GraphFile::parse(&text, None)?.resolve()?.graph;
    let n = skeleton.n();
    let cfg = GenConfig {
        n_vertices: n,
        edge_sparsity: bidirected_sparsity,
        prob_low,
        prob_high,
        seed,
        require_feasible: false,
    };
    cfg.validate()?;
    let s = cfg.sparsity();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<Edge> = skeleton.directed_edges().to_vec();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(s) {
                edges.push(Edge::bidirected(VertexId::from(i), VertexId::from(j)));
            }
        }
    }
    let prob = edges
        .iter()
        .map(|e| (*e, rng.gen_range(prob_low..=prob_high)))
        .collect();
    let g = Admg::from_parts(skeleton.names().to_vec(), edges)?;
    let target = last_in_order(&g);
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("graph");
    Ok(BenchInstance {
        id: format!("{stem}-s{seed}"),
        pg: ProbabilisticAdmg::new(g, prob)?,
        target,
    })
}

/// `P(kept) / P(full)`: the product of `(1 - p) / p` over removed edges.
pub fn plausibility_ratio(pg: &ProbabilisticAdmg, sol: &Solution) -> Result<f64> {
    let mut log = 0.0;
    for e in &sol.removed {
        let p = pg
            .prob(e)
            .ok_or_else(|| Error::UnknownEdge(pg.graph.edge_label(e)))?;
        log += (1.0 - p).ln() - p.ln();
    }
    Ok(log.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Heid1,
    Heid2,
    EdgeIdExact,
    McipViaT2Exact,
    McipViaT2Heid1,
    McipViaT2Heid2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Heid1,
        Algorithm::Heid2,
        Algorithm::EdgeIdExact,
        Algorithm::McipViaT2Exact,
        Algorithm::McipViaT2Heid1,
        Algorithm::McipViaT2Heid2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Heid1 => "heid1",
            Algorithm::Heid2 => "heid2",
            Algorithm::EdgeIdExact => "edgeid_exact",
            Algorithm::McipViaT2Exact => "mcip_via_t2_exact",
            Algorithm::McipViaT2Heid1 => "mcip_via_t2_heid1",
            Algorithm::McipViaT2Heid2 => "mcip_via_t2_heid2",
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub algorithm: String,
    pub graph_id: String,
    pub n: usize,
    pub ed: usize,
    pub eb: usize,
    pub runtime_s: f64,
    pub cost: Option<Weight>,
    pub score: Option<f64>,
    pub timed_out: bool,
    pub found: bool,
    /// Removal set, kept for replay checks; not persisted.
    pub removed: Option<BTreeSet<Edge>>,
}

#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub timeout: Duration,
    pub objective: Objective,
    /// Worker threads; 1 runs sequentially.
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            timeout: Duration::from_secs(DEFAULT_TIMEOUT_SECS),
            objective: Objective::MostProbable,
            jobs: 1,
        }
    }
}

struct Outcome {
    removed: Option<BTreeSet<Edge>>,
    timed_out: bool,
}

fn from_mcip(map: &crate::mcip::EdgeVertexMap, sol: Result<McipSolution>) -> Outcome {
    match sol {
        Ok(s) => Outcome {
            removed: s
                .identifiable
                .then(|| s.intervened.iter().map(|v| map.backward[v]).collect()),
            timed_out: s.timed_out,
        },
        Err(_) => Outcome {
            removed: None,
            timed_out: false,
        },
    }
}

fn run_one(inst: &BenchInstance, alg: Algorithm, cfg: &RunConfig) -> TrialRecord {
    let g = &inst.pg.graph;
    let mut record = TrialRecord {
        algorithm: alg.name().to_string(),
        graph_id: inst.id.clone(),
        n: g.n(),
        ed: g.directed_edges().len(),
        eb: g.bidirected_edges().len(),
        runtime_s: 0.0,
        cost: None,
        score: None,
        timed_out: false,
        found: false,
        removed: None,
    };
    let weighted = match to_edge_id_weights(&inst.pg, cfg.objective, &inst.target) {
        Ok(w) => w,
        Err(_) => return record,
    };
    let upper = match alg {
        Algorithm::EdgeIdExact | Algorithm::McipViaT2Exact => best_heuristic(&weighted)
            .map(|h| h.solution.cost)
            .unwrap_or(Weight::INFINITE),
        _ => Weight::INFINITE,
    };
    let bounds = Bounds {
        upper,
        threshold: Weight::ZERO,
    };

    let start = Instant::now();
    let deadline = Some(start + cfg.timeout);
    let outcome = match alg {
        Algorithm::Heid1 | Algorithm::Heid2 => {
            let h = if alg == Algorithm::Heid1 {
                heid1(&weighted)
            } else {
                heid2(&weighted)
            };
            Outcome {
                removed: h.ok().map(|h| h.solution.removed),
                timed_out: false,
            }
        }
        Algorithm::EdgeIdExact => match ExactSolver::new(&weighted)
            .bounds(bounds)
            .deadline(deadline)
            .solve()
        {
            Ok(s) => Outcome {
                removed: s.identifiable.then_some(s.removed),
                timed_out: s.timed_out,
            },
            Err(_) => Outcome {
                removed: None,
                timed_out: false,
            },
        },
        Algorithm::McipViaT2Exact | Algorithm::McipViaT2Heid1 | Algorithm::McipViaT2Heid2 => {
            match t2_edge_id_to_mcip(&weighted) {
                Err(_) => Outcome {
                    removed: None,
                    timed_out: false,
                },
                Ok((m, map)) => {
                    let sol = match alg {
                        Algorithm::McipViaT2Exact => mcip_solve_until(&m, bounds, deadline),
                        Algorithm::McipViaT2Heid1 => mcip_heuristic(&m, McipHeuristic::Heid1),
                        _ => mcip_heuristic(&m, McipHeuristic::Heid2),
                    };
                    from_mcip(&map, sol)
                }
            }
        }
    };
    record.runtime_s = start.elapsed().as_secs_f64();
    record.timed_out = outcome.timed_out;
    if let Some(removed) = outcome.removed {
        record.found = true;
        record.cost = Some(weighted.cost_of(&removed));
        record.score = match cfg.objective {
            Objective::RawWeights => None,
            o => score_solution(&inst.pg, &removed, o).ok(),
        };
        record.removed = Some(removed);
    }
    record
}

/// Runs every algorithm on every instance. Records come back in
/// (instance, algorithm) order regardless of `jobs`.
pub fn run_comparison(
    instances: &[BenchInstance],
    algorithms: &[Algorithm],
    cfg: &RunConfig,
) -> Vec<TrialRecord> {
    let tasks: Vec<(&BenchInstance, Algorithm)> = instances
        .iter()
        .flat_map(|i| algorithms.iter().map(move |a| (i, *a)))
        .collect();
    if cfg.jobs <= 1 {
        return tasks.into_iter().map(|(i, a)| run_one(i, a, cfg)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .expect("thread pool");
    pool.install(|| tasks.par_iter().map(|(i, a)| run_one(i, *a, cfg)).collect())
}

pub const CSV_HEADER: [&str; 10] = [
    "algorithm",
    "graph_id",
    "n",
    "ed",
    "eb",
    "runtime_s",
    "cost",
    "score",
    "timed_out",
    "found",
];

fn cell<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes the results table. `with_runtime = false` blanks the runtime
/// column, which makes the output reproducible byte for byte.
pub fn write_csv<W: Write>(records: &[TrialRecord], out: W, with_runtime: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record([
            r.algorithm.clone(),
            r.graph_id.clone(),
            r.n.to_string(),
            r.ed.to_string(),
            r.eb.to_string(),
            if with_runtime {
                format!("{:.6}", r.runtime_s)
            } else {
                String::new()
            },
            cell(r.cost),
            cell(r.score),
            r.timed_out.to_string(),
            r.found.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Quantiles {
    pub p5: f64,
    pub median: f64,
    pub p95: f64,
}

impl Quantiles {
    /// Nearest-rank quantiles; `None` on empty input.
    pub fn of(mut xs: Vec<f64>) -> Option<Quantiles> {
        if xs.is_empty() {
            return None;
        }
        xs.sort_by(f64::total_cmp);
        let at = |q: f64| xs[((q * xs.len() as f64).ceil() as usize).clamp(1, xs.len()) - 1];
        Some(Quantiles {
            p5: at(0.05),
            median: at(0.5),
            p95: at(0.95),
        })
    }
}

/// Summary row per (algorithm, n).
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AggregateRow {
    pub algorithm: String,
    pub n: usize,
    pub trials: usize,
    pub timed_out_fraction: f64,
    pub runtime_s: Option<Quantiles>,
    /// Over trials with a finite cost.
    pub cost: Option<Quantiles>,
}

pub fn aggregate(records: &[TrialRecord]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(String, usize), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.algorithm.clone(), r.n))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((algorithm, n), rs)| AggregateRow {
            trials: rs.len(),
            timed_out_fraction: rs.iter().filter(|r| r.timed_out).count() as f64 / rs.len() as f64,
            runtime_s: Quantiles::of(rs.iter().map(|r| r.runtime_s).collect()),
            cost: Quantiles::of(
                rs.iter()
                    .filter_map(|r| r.cost.filter(|c| c.is_finite()).map(|c| c.value()))
                    .collect(),
            ),
            algorithm,
            n,
        })
        .collect()
}
