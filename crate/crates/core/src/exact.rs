//! Exact minimum-weight edge removal by branch and bound.
//!
//! Each search node restricts the current graph to its maximal hedge and
//! shrinks it greedily to a minimal subgraph that still blocks
//! identifiability. Any solution removes one of that subgraph's removable
//! edges, so the node branches on those, cheapest first: first with the
//! edge removed, then with the edge pinned as irremovable for the rest of
//! that node. Bounds shrink as solutions are found; a threshold allows
//! early exit.
//!
//! Exclusion constraints ("at least one of these edges must be removed")
//! are checked inside the same search. A node only succeeds once its graph
//! is hedge-free and every constraint is hit. A hedge-free node with open
//! constraints branches on the edges of its smallest open constraint, even
//! when they lie outside the hedge.

use crate::admg::{Adjacency, Admg, Edge};
use crate::error::{Error, Result};
use crate::probmodel::{
    score_solution, to_edge_id_weights, Objective, ProbabilisticAdmg, Weight, WeightedInstance,
};
use crate::vset::{VertexId, VertexSet};
use std::collections::BTreeSet;
use std::time::Instant;

/// Maximum number of finite edges the brute-force oracle will enumerate.
pub const ORACLE_EDGE_LIMIT: usize = 24;

/// Outcome of a removal search.
#[derive(Debug, Clone)]
pub struct Solution {
    pub removed: BTreeSet<Edge>,
    pub cost: Weight,
    pub identifiable: bool,
    pub score: Option<f64>,
    pub kept_graph: Admg,
    /// Set when a deadline interrupted the search; the solution is then the
    /// best found so far.
    pub timed_out: bool,
}

impl Solution {
    pub(crate) fn from_removed(inst: &WeightedInstance, removed: BTreeSet<Edge>) -> Solution {
        let kept_graph = inst.graph.without_edges(&removed);
        let identifiable = kept_graph
            .is_identifiable(&inst.target)
            .expect("target belongs to instance graph");
        Solution {
            cost: inst.cost_of(&removed),
            removed,
            identifiable,
            score: None,
            kept_graph,
            timed_out: false,
        }
    }

    fn not_found(inst: &WeightedInstance, timed_out: bool) -> Solution {
        Solution {
            removed: BTreeSet::new(),
            cost: Weight::INFINITE,
            identifiable: false,
            score: None,
            kept_graph: inst.graph.clone(),
            timed_out,
        }
    }

    /// Attaches the objective value of this removal set.
    pub fn scored(mut self, pg: &ProbabilisticAdmg, objective: Objective) -> Result<Solution> {
        self.score = match objective {
            Objective::RawWeights => None,
            _ => Some(score_solution(pg, &self.removed, objective)?),
        };
        Ok(self)
    }
}

/// Requires that at least one of the listed edges is removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusionConstraint {
    must_intersect: BTreeSet<Edge>,
}

impl ExclusionConstraint {
    pub fn new<I: IntoIterator<Item = Edge>>(edges: I) -> Result<Self> {
        let must_intersect: BTreeSet<Edge> = edges.into_iter().collect();
        if must_intersect.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(ExclusionConstraint { must_intersect })
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.must_intersect
    }

    pub fn is_satisfied_by(&self, removed: &BTreeSet<Edge>) -> bool {
        self.must_intersect.iter().any(|e| removed.contains(e))
    }
}

/// Upper bound and early-exit threshold for the search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub upper: Weight,
    pub threshold: Weight,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            upper: Weight::INFINITE,
            threshold: Weight::ZERO,
        }
    }
}

/// Configurable entry point for the branch and bound.
#[derive(Debug, Clone)]
pub struct ExactSolver<'a> {
    inst: &'a WeightedInstance,
    bounds: Bounds,
    constraints: Vec<ExclusionConstraint>,
    deadline: Option<Instant>,
}

impl<'a> ExactSolver<'a> {
    pub fn new(inst: &'a WeightedInstance) -> Self {
        ExactSolver {
            inst,
            bounds: Bounds::default(),
            constraints: Vec::new(),
            deadline: None,
        }
    }

    pub fn bounds(mut self, bounds: Bounds) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn constraints(mut self, constraints: &[ExclusionConstraint]) -> Self {
        self.constraints = constraints.to_vec();
        self
    }

    pub fn deadline(mut self, deadline: Option<Instant>) -> Self {
        self.deadline = deadline;
        self
    }

    /// Runs the search. Without constraints an exhausted search yields a
    /// solution with `identifiable == false`; with constraints and an
    /// unbounded search it yields [`Error::Infeasible`].
    pub fn solve(&self) -> Result<Solution> {
        let inst = self.inst;
        if self.bounds.threshold > self.bounds.upper {
            return Err(Error::InvalidBounds);
        }
        for c in &self.constraints {
            if let Some(e) = c.edges().iter().find(|e| !inst.graph.contains_edge(e)) {
                return Err(Error::UnknownEdge(format!("{e:?}")));
            }
        }

        let hedge = inst.graph.maximal_hedge_vertices(&inst.target)?;
        let (compact, old_ids) = inst.graph.induced_subgraph(&hedge);
        let mut new_of = vec![None; inst.graph.n()];
        for (i, v) in old_ids.iter().enumerate() {
            new_of[v.index()] = Some(VertexId::from(i));
        }
        let lift = |e: Edge| -> Edge {
            let (a, b) = e.endpoints();
            let (a, b) = (old_ids[a.index()], old_ids[b.index()]);
            if e.is_directed() {
                Edge::directed(a, b)
            } else {
                Edge::bidirected(a, b)
            }
        };

        let mut table = EdgeTable::default();
        for e in compact.edges() {
            let orig = lift(e);
            table.push(orig, Some(e), inst.weight(&orig).value());
        }
        let mut constraint_ids = Vec::new();
        for c in &self.constraints {
            let ids = c
                .edges()
                .iter()
                .map(|orig| match table.orig.iter().position(|x| x == orig) {
                    Some(i) => i,
                    None => table.push(*orig, None, inst.weight(orig).value()),
                })
                .collect();
            constraint_ids.push(ids);
        }

        let target = VertexSet::from_ids(
            compact.n(),
            inst.target
                .iter()
                .map(|v| new_of[v.index()].expect("target lies in its hedge")),
        );
        let root = Frame {
            adj: compact.adjacency().clone(),
            present: (0..table.len())
                .filter(|&i| table.local[i].is_some())
                .collect(),
        };
        let mut search = Search {
            excluded: vec![false; table.len()],
            on_path: vec![false; table.len()],
            table,
            target,
            constraints: constraint_ids,
            deadline: self.deadline,
            timed_out: false,
        };
        let found = search.explore(
            &root,
            self.bounds.upper.value(),
            self.bounds.threshold.value(),
        );
        let timed_out = search.timed_out;

        match found {
            Some((_, ids)) => {
                let removed: BTreeSet<Edge> = ids.iter().map(|&i| search.table.orig[i]).collect();
                let mut sol = Solution::from_removed(inst, removed);
                debug_assert!(sol.identifiable);
                sol.timed_out = timed_out;
                Ok(sol)
            }
            None if !self.constraints.is_empty()
                && !timed_out
                && self.bounds.upper.is_infinite() =>
            {
                Err(Error::Infeasible)
            }
            None => Ok(Solution::not_found(inst, timed_out)),
        }
    }
}

#[derive(Default)]
struct EdgeTable {
    orig: Vec<Edge>,
    local: Vec<Option<Edge>>,
    weight: Vec<f64>,
}

impl EdgeTable {
    fn push(&mut self, orig: Edge, local: Option<Edge>, weight: f64) -> usize {
        self.orig.push(orig);
        self.local.push(local);
        self.weight.push(weight);
        self.orig.len() - 1
    }

    fn len(&self) -> usize {
        self.orig.len()
    }
}

struct Frame {
    adj: Adjacency,
    present: Vec<usize>,
}

struct Search {
    table: EdgeTable,
    target: VertexSet,
    constraints: Vec<Vec<usize>>,
    excluded: Vec<bool>,
    on_path: Vec<bool>,
    deadline: Option<Instant>,
    timed_out: bool,
}

/// Slack on bound comparisons so that subtracting weights along a path
/// never prunes a solution whose cost equals the supplied upper bound.
fn slack(bound: f64) -> f64 {
    1e-9 * bound.abs().max(1.0)
}

impl Search {
    fn expired(&mut self) -> bool {
        if !self.timed_out {
            if let Some(d) = self.deadline {
                self.timed_out = Instant::now() >= d;
            }
        }
        self.timed_out
    }

    /// Removable edges of a minimal non-identifiable subgraph of `h`. Every
    /// completion has to remove at least one of them.
    fn witness_edges(&self, h: &Frame) -> Vec<usize> {
        let mut removable: Vec<usize> = h
            .present
            .iter()
            .copied()
            .filter(|&i| !self.excluded[i] && self.table.weight[i].is_finite())
            .collect();
        removable.sort_by(|&i, &j| {
            self.table.weight[j]
                .total_cmp(&self.table.weight[i])
                .then(self.table.orig[j].cmp(&self.table.orig[i]))
        });
        let mut witness = h.adj.clone();
        let mut kept = Vec::new();
        for i in removable {
            let local = self.table.local[i].expect("present edges are in the graph");
            let mut trial = witness.clone();
            trial.remove(local);
            if trial.maximal_hedge(&self.target) != self.target {
                witness = trial;
            } else {
                kept.push(i);
            }
        }
        kept
    }

    /// Returns the cheapest completion found within `ub`, as (cost, edge ids).
    fn explore(&mut self, frame: &Frame, mut ub: f64, th: f64) -> Option<(f64, Vec<usize>)> {
        if self.expired() {
            return None;
        }
        let hedge = frame.adj.maximal_hedge(&self.target);
        let hedge_free = hedge == self.target;
        let unsatisfied: Vec<usize> = (0..self.constraints.len())
            .filter(|&c| !self.constraints[c].iter().any(|&e| self.on_path[e]))
            .collect();
        if hedge_free && unsatisfied.is_empty() {
            return Some((0.0, Vec::new()));
        }

        let mut adj = frame.adj.clone();
        adj.restrict(&hedge);
        let present: Vec<usize> = frame
            .present
            .iter()
            .copied()
            .filter(|&i| {
                let (a, b) = self.table.local[i].unwrap().endpoints();
                hedge.contains(a) && hedge.contains(b)
            })
            .collect();
        let h = Frame { adj, present };
        let mut candidates: Vec<usize> = if hedge_free {
            unsatisfied
                .iter()
                .map(|&c| &self.constraints[c])
                .min_by_key(|c| c.len())
                .cloned()
                .unwrap_or_default()
        } else {
            self.witness_edges(&h)
        };
        candidates.sort_unstable();
        candidates.dedup();

        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut pinned = Vec::new();
        loop {
            let pick = candidates
                .iter()
                .copied()
                .filter(|&i| !self.excluded[i] && !self.on_path[i])
                .min_by(|&i, &j| {
                    self.table.weight[i]
                        .total_cmp(&self.table.weight[j])
                        .then(self.table.orig[i].cmp(&self.table.orig[j]))
                });
            let Some(e) = pick else { break };
            let w = self.table.weight[e];
            if w.is_infinite() || w > ub + slack(ub) {
                break;
            }

            let child = match self.table.local[e] {
                Some(local) if h.present.contains(&e) => {
                    let mut adj = h.adj.clone();
                    adj.remove(local);
                    let present = h.present.iter().copied().filter(|&i| i != e).collect();
                    Frame { adj, present }
                }
                _ => Frame {
                    adj: h.adj.clone(),
                    present: h.present.clone(),
                },
            };
            self.on_path[e] = true;
            let result = self.explore(&child, ub - w, th - w);
            self.on_path[e] = false;

            if let Some((sub_cost, mut ids)) = result {
                let cost = w + sub_cost;
                if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                    ids.push(e);
                    best = Some((cost, ids));
                    ub = ub.min(cost);
                    if ub <= th {
                        break;
                    }
                }
            }
            if self.timed_out {
                break;
            }
            self.excluded[e] = true;
            pinned.push(e);
        }
        for e in pinned {
            self.excluded[e] = false;
        }
        best
    }
}

/// Branch and bound with the given upper bound and threshold.
pub fn edge_id_exact(
    inst: &WeightedInstance,
    upper: Weight,
    threshold: Weight,
) -> Result<Solution> {
    ExactSolver::new(inst)
        .bounds(Bounds { upper, threshold })
        .solve()
}

/// Branch and bound where every constraint must be hit by the removal set.
pub fn edge_id_exact_constrained(
    inst: &WeightedInstance,
    constraints: &[ExclusionConstraint],
    bounds: Bounds,
) -> Result<Solution> {
    ExactSolver::new(inst)
        .bounds(bounds)
        .constraints(constraints)
        .solve()
}

/// True iff removing every finite-weight edge makes the target identifiable.
pub fn is_feasible(inst: &WeightedInstance) -> bool {
    let finite = inst.finite_edges();
    inst.graph
        .without_edges(&finite)
        .is_identifiable(&inst.target)
        .unwrap_or(false)
}

/// Exhaustive search over subsets of finite edges inside the maximal hedge.
/// Ties go to fewer edges, then to the lexicographically smaller edge list.
pub fn oracle_solve(inst: &WeightedInstance) -> Result<Solution> {
    let hedge = inst.graph.maximal_hedge_vertices(&inst.target)?;
    let pool: Vec<Edge> = inst
        .finite_edges()
        .into_iter()
        .filter(|e| {
            let (a, b) = e.endpoints();
            hedge.contains(a) && hedge.contains(b)
        })
        .collect();
    if pool.len() > ORACLE_EDGE_LIMIT {
        return Err(Error::TooLarge(pool.len()));
    }
    let mut best: Option<(Weight, Vec<Edge>)> = None;
    for mask in 0u32..(1u32 << pool.len()) {
        let subset: Vec<Edge> = (0..pool.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| pool[i])
            .collect();
        let cost = inst.cost_of(&subset);
        let better =
            |b: &(Weight, Vec<Edge>)| (cost, subset.len(), &subset) < (b.0, b.1.len(), &b.1);
        if best.as_ref().is_some_and(|b| !better(b)) {
            continue;
        }
        if inst
            .graph
            .without_edges(&subset)
            .is_identifiable(&inst.target)?
        {
            best = Some((cost, subset));
        }
    }
    let (_, removed) = best.ok_or(Error::Infeasible)?;
    Ok(Solution::from_removed(inst, removed.into_iter().collect()))
}

/// Up to `n` best identifiable subgraphs, each found by re-solving with a
/// constraint that excludes every previously kept uncertain edge set.
pub fn rank_top_n(
    pg: &ProbabilisticAdmg,
    target: &VertexSet,
    objective: Objective,
    n: usize,
) -> Result<Vec<Solution>> {
    let inst = to_edge_id_weights(pg, objective, target)?;
    let mut constraints: Vec<ExclusionConstraint> = Vec::new();
    let mut ranked = Vec::new();
    while ranked.len() < n {
        let sol = match edge_id_exact_constrained(&inst, &constraints, Bounds::default()) {
            Ok(s) if s.identifiable => s.scored(pg, objective)?,
            Ok(_) | Err(Error::Infeasible) => break,
            Err(e) => return Err(e),
        };
        let kept_uncertain: Vec<Edge> = inst
            .weights()
            .iter()
            .filter(|(e, w)| w.is_finite() && w.value() > 0.0 && !sol.removed.contains(*e))
            .map(|(e, _)| *e)
            .collect();
        ranked.push(sol);
        match ExclusionConstraint::new(kept_uncertain) {
            Ok(c) => constraints.push(c),
            Err(_) => break,
        }
    }
    Ok(ranked)
}
