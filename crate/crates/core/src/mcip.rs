//! Minimum-cost intervention (MCIP) and its reductions to edge removal.
//!
//! Intervening on a vertex deletes its incoming directed edges and all of
//! its bidirected edges. MCIP asks for the cheapest vertex set whose
//! intervention makes `Q[Y]` identifiable.
//!
//! [`t1_mcip_to_edge_id`] splits each non-target vertex into an upper and a
//! lower copy joined by one costed bidirected edge, so removing that edge
//! plays the role of intervening. [`t2_edge_id_to_mcip`] goes the other way:
//! every edge becomes a costed representative vertex, plus a scaffold of
//! extra target vertices that keeps hedges spanning several target
//! vertices alive.
//!
//! Naming of generated vertices:
//!
//! * split copies: `v#1` (directed layer) and `v#2` (bidirected layer);
//! * edge representatives: `x#d(u,v)`, `z#b(u,v)`, ... where the leading
//!   letter says whether both (`y`), one (`z`) or none (`x`) of the
//!   endpoints are targets;
//! * scaffold vertices for the target pair at positions `i < j`:
//!   `<target>@ij` and `y#b(u,v)@ij` (positions joined by `.` when any
//!   exceeds 9);
//! * gadget vertices carry an `@g<n>` suffix, `n` being the vertex count
//!   before the gadget was added.

use crate::admg::{Admg, AdmgBuilder, Edge, EdgeKind};
use crate::error::{Error, Result};
use crate::exact::{Bounds, ExactSolver, ExclusionConstraint, Solution};
use crate::heuristics::{heid1, heid2};
use crate::probmodel::{Weight, WeightedInstance};
use crate::vset::{VertexId, VertexSet};
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

/// Graph, per-vertex intervention cost and target set.
#[derive(Debug, Clone)]
pub struct McipInstance {
    pub graph: Admg,
    cost: Vec<Weight>,
    pub target: VertexSet,
}

impl McipInstance {
    pub fn new(graph: Admg, cost: Vec<Weight>, target: VertexSet) -> Result<Self> {
        if target.is_empty() {
            return Err(Error::EmptyTarget);
        }
        if target.universe() != graph.n() || cost.len() != graph.n() {
            return Err(Error::UnknownVertex(format!(
                "instance sizes disagree: {} vertices, {} costs, target over {}",
                graph.n(),
                cost.len(),
                target.universe()
            )));
        }
        Ok(McipInstance {
            graph,
            cost,
            target,
        })
    }

    pub fn cost(&self, v: VertexId) -> Weight {
        self.cost[v.index()]
    }

    pub fn costs(&self) -> &[Weight] {
        &self.cost
    }

    pub fn cost_of(&self, vertices: &BTreeSet<VertexId>) -> Weight {
        vertices.iter().map(|v| self.cost(*v)).sum()
    }

    /// Graph after intervening on `on`.
    pub fn intervene(&self, on: &BTreeSet<VertexId>) -> Admg {
        let cut: Vec<Edge> = self
            .graph
            .edges()
            .filter(|e| match e.kind() {
                EdgeKind::Directed => on.contains(&e.endpoints().1),
                EdgeKind::Bidirected => {
                    on.contains(&e.endpoints().0) || on.contains(&e.endpoints().1)
                }
            })
            .collect();
        self.graph.without_edges(&cut)
    }

    pub fn identifiable_after(&self, on: &BTreeSet<VertexId>) -> Result<bool> {
        self.intervene(on).is_identifiable(&self.target)
    }
}

/// Intervention set with its cost.
#[derive(Debug, Clone)]
pub struct McipSolution {
    pub intervened: BTreeSet<VertexId>,
    pub cost: Weight,
    pub identifiable: bool,
    pub timed_out: bool,
}

/// Layer of a vertex produced by [`t2_edge_id_to_mcip`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Top,
    Bottom,
}

/// Correspondence between edges and their representative vertices.
#[derive(Debug, Clone, Default)]
pub struct EdgeVertexMap {
    pub forward: BTreeMap<Edge, VertexId>,
    pub backward: BTreeMap<VertexId, Edge>,
    pub layer: Vec<Layer>,
    /// `'x'`, `'z'` or `'y'` for each representative vertex.
    pub case_tag: BTreeMap<VertexId, char>,
}

fn target_positions(i: usize, j: usize, k: usize) -> String {
    if k > 9 {
        format!("{}.{}", i + 1, j + 1)
    } else {
        format!("{}{}", i + 1, j + 1)
    }
}

/// Split every non-target vertex; the split edge carries the vertex cost.
/// Directed edges leaving target vertices are kept as well, so targets that
/// span several districts reduce correctly. Returns the instance and the
/// split edge of each non-target vertex.
pub fn t1_mcip_to_edge_id(
    m: &McipInstance,
) -> Result<(WeightedInstance, BTreeMap<VertexId, Edge>)> {
    let g = &m.graph;
    let y = &m.target;
    let mut b = Admg::builder();
    let mut lower = Vec::with_capacity(g.n());
    let mut upper = Vec::with_capacity(g.n());
    for v in g.vertices() {
        if y.contains(v) {
            let id = b.vertex(g.name(v));
            lower.push(id);
            upper.push(id);
        } else {
            lower.push(b.add_vertex(&format!("{}#1", g.name(v)))?);
            upper.push(b.add_vertex(&format!("{}#2", g.name(v)))?);
        }
    }
    let mut weights = BTreeMap::new();
    let mut split = BTreeMap::new();
    for v in g.vertices().filter(|v| !y.contains(*v)) {
        let (lo, up) = (lower[v.index()], upper[v.index()]);
        let joint = Edge::bidirected(lo, up);
        b.add_edge(joint)?;
        weights.insert(joint, m.cost(v));
        split.insert(v, joint);
        let link = Edge::directed(up, lo);
        b.add_edge(link)?;
        weights.insert(link, Weight::INFINITE);
    }
    for e in g.edges() {
        let (a, c) = e.endpoints();
        let lifted = match e.kind() {
            EdgeKind::Bidirected => Edge::bidirected(upper[a.index()], upper[c.index()]),
            EdgeKind::Directed => Edge::directed(lower[a.index()], lower[c.index()]),
        };
        b.add_edge(lifted)?;
        weights.insert(lifted, Weight::INFINITE);
    }
    let h = b.build()?;
    let target = VertexSet::from_ids(h.n(), y.iter().map(|v| lower[v.index()]));
    Ok((WeightedInstance::new(h, weights, target)?, split))
}

/// Edge-removal instance to MCIP instance. Original vertices keep their ids.
pub fn t2_edge_id_to_mcip(inst: &WeightedInstance) -> Result<(McipInstance, EdgeVertexMap)> {
    let g = &inst.graph;
    let y = &inst.target;
    if y.is_empty() {
        return Err(Error::EmptyTarget);
    }
    let mut b = Admg::builder();
    let mut cost: Vec<Weight> = Vec::new();
    let mut map = EdgeVertexMap::default();
    for v in g.vertices() {
        b.add_vertex(g.name(v))?;
        cost.push(Weight::INFINITE);
        map.layer.push(Layer::Top);
    }
    let in_y = |v: VertexId| y.contains(v);
    let outside: Vec<VertexId> = g.vertices().filter(|v| !in_y(*v)).collect();

    let mut add = |b: &mut AdmgBuilder,
                   name: String,
                   c: Weight,
                   layer: Layer,
                   map: &mut EdgeVertexMap|
     -> Result<VertexId> {
        let id = b.add_vertex(&name)?;
        cost.push(c);
        map.layer.push(layer);
        Ok(id)
    };

    for &e in g.directed_edges() {
        let (src, dst) = e.endpoints();
        let tag = match (in_y(src), in_y(dst)) {
            (false, false) => 'x',
            (true, true) => 'y',
            _ => 'z',
        };
        let name = format!("{tag}#d({},{})", g.name(src), g.name(dst));
        let rep = add(&mut b, name, inst.weight(&e), Layer::Top, &mut map)?;
        b.add_edge(Edge::directed(src, rep))?;
        b.add_edge(Edge::directed(rep, dst))?;
        b.add_edge(Edge::bidirected(src, rep))?;
        map.forward.insert(e, rep);
        map.backward.insert(rep, e);
        map.case_tag.insert(rep, tag);
    }
    for &e in g.bidirected_edges() {
        let (u, v) = e.endpoints();
        let tag = match (in_y(u), in_y(v)) {
            (false, false) => 'x',
            (true, true) => 'y',
            _ => 'z',
        };
        let name = format!("{tag}#b({},{})", g.name(u), g.name(v));
        let rep = add(&mut b, name, inst.weight(&e), Layer::Top, &mut map)?;
        b.add_edge(Edge::bidirected(rep, u))?;
        b.add_edge(Edge::bidirected(rep, v))?;
        match tag {
            'x' => {
                b.add_edge(Edge::directed(rep, u))?;
                b.add_edge(Edge::directed(rep, v))?;
            }
            'z' => {
                let x = if in_y(u) { v } else { u };
                b.add_edge(Edge::directed(rep, x))?;
            }
            _ => {
                for &x in &outside {
                    b.add_edge(Edge::directed(rep, x))?;
                }
            }
        }
        map.forward.insert(e, rep);
        map.backward.insert(rep, e);
        map.case_tag.insert(rep, tag);
    }

    let order: Vec<VertexId> = g
        .topological_order()
        .into_iter()
        .filter(|v| in_y(*v))
        .collect();
    let k = order.len();
    let position: BTreeMap<VertexId, usize> =
        order.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut scaffold_targets = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let tag = target_positions(i, j, k);
            let mut bottom = BTreeMap::new();
            for (p, &yk) in order.iter().enumerate().take(j + 1).skip(i) {
                let id = add(
                    &mut b,
                    format!("{}@{tag}", g.name(yk)),
                    Weight::INFINITE,
                    Layer::Bottom,
                    &mut map,
                )?;
                b.add_edge(Edge::directed(yk, id))?;
                bottom.insert(p, id);
            }
            for p in i + 1..j {
                b.add_edge(Edge::directed(bottom[&p], bottom[&i]))?;
            }
            b.add_edge(Edge::directed(bottom[&i], bottom[&j]))?;
            b.add_edge(Edge::bidirected(order[j], bottom[&i]))?;
            for &e in g.bidirected_edges() {
                let (u, v) = e.endpoints();
                let (Some(&pu), Some(&pv)) = (position.get(&u), position.get(&v)) else {
                    continue;
                };
                if pu < i || pu > j || pv < i || pv > j {
                    continue;
                }
                let name = format!("y#b({},{})@{tag}", g.name(u), g.name(v));
                let id = add(&mut b, name, Weight::INFINITE, Layer::Bottom, &mut map)?;
                b.add_edge(Edge::bidirected(id, bottom[&pu]))?;
                b.add_edge(Edge::bidirected(id, bottom[&pv]))?;
                b.add_edge(Edge::directed(id, map.forward[&e]))?;
            }
            scaffold_targets.push(bottom[&j]);
        }
    }

    let h = b.build()?;
    let mut target = VertexSet::from_ids(h.n(), y.iter());
    for v in scaffold_targets {
        target.insert(v);
    }
    Ok((McipInstance::new(h, cost, target)?, map))
}

fn check_gadget_input(m: &McipInstance, x_set: &[VertexId]) -> Result<()> {
    if x_set.is_empty() {
        return Err(Error::EmptySet);
    }
    if let Some(v) = x_set.iter().find(|v| v.index() >= m.graph.n()) {
        return Err(Error::UnknownVertex(format!("#{}", v.0)));
    }
    Ok(())
}

fn extend_instance(
    m: &McipInstance,
    new_names: &[String],
    edges: impl Fn(&[VertexId]) -> Vec<Edge>,
    new_target: usize,
) -> Result<McipInstance> {
    let mut b = Admg::builder();
    for v in m.graph.vertices() {
        b.add_vertex(m.graph.name(v))?;
    }
    for e in m.graph.edges() {
        b.add_edge(e)?;
    }
    let ids: Vec<VertexId> = new_names
        .iter()
        .map(|n| b.add_vertex(n))
        .collect::<Result<_>>()?;
    for e in edges(&ids) {
        b.add_edge(e)?;
    }
    let g = b.build()?;
    let mut cost = m.costs().to_vec();
    cost.extend(std::iter::repeat_n(Weight::INFINITE, ids.len()));
    let mut target = VertexSet::from_ids(g.n(), m.target.iter());
    target.insert(ids[new_target]);
    McipInstance::new(g, cost, target)
}

/// Chain gadget: primes `x_i'` linked in a chain ending at a new target.
/// Forces at least one of `x_set` into every solution when `|x_set| <= 2`;
/// for longer sets a hedge through the rest of the graph can survive an
/// intervention on an interior member (see [`add_exclusion_gadget`]).
pub fn add_negative_correlation_gadget(
    m: &McipInstance,
    x_set: &[VertexId],
) -> Result<McipInstance> {
    check_gadget_input(m, x_set)?;
    let tag = m.graph.n();
    let len = x_set.len();
    let mut names: Vec<String> = x_set
        .iter()
        .map(|x| format!("{}'@g{tag}", m.graph.name(*x)))
        .collect();
    names.push(format!("yhat@g{tag}"));
    let edges = |ids: &[VertexId]| {
        let (primes, sink) = (&ids[..len], ids[len]);
        let mut out = Vec::new();
        for i in 0..len {
            out.push(Edge::directed(x_set[i], primes[i]));
            out.push(Edge::bidirected(x_set[i], primes[i]));
            if i + 1 < len {
                out.push(Edge::directed(primes[i], primes[i + 1]));
                out.push(Edge::bidirected(primes[i], x_set[i + 1]));
            }
        }
        out.push(Edge::directed(primes[len - 1], sink));
        out.push(Edge::bidirected(x_set[0], sink));
        out
    };
    extend_instance(m, &names, edges, len)
}

/// Hub gadget: a new target `yhat` whose only bidirected neighbour is a hub
/// `q`; `q` feeds a chain `c_1 -> ... -> c_m -> yhat`, each `c_i` has
/// `x_i` as its only bidirected neighbour and `x_i -> c_i`. Every hedge for
/// `yhat` must contain all of `x_set`, so intervening on any single member
/// dissolves it.
pub fn add_exclusion_gadget(m: &McipInstance, x_set: &[VertexId]) -> Result<McipInstance> {
    check_gadget_input(m, x_set)?;
    let tag = m.graph.n();
    let len = x_set.len();
    let mut names = vec![format!("yhat@g{tag}"), format!("q@g{tag}")];
    names.extend(
        x_set
            .iter()
            .map(|x| format!("c({})@g{tag}", m.graph.name(*x))),
    );
    let edges = |ids: &[VertexId]| {
        let (sink, hub, chain) = (ids[0], ids[1], &ids[2..]);
        let mut out = vec![
            Edge::bidirected(sink, hub),
            Edge::directed(hub, chain[0]),
            Edge::directed(chain[len - 1], sink),
        ];
        for i in 0..len {
            out.push(Edge::bidirected(hub, x_set[i]));
            out.push(Edge::bidirected(chain[i], x_set[i]));
            out.push(Edge::directed(x_set[i], chain[i]));
            if i + 1 < len {
                out.push(Edge::directed(chain[i], chain[i + 1]));
            }
        }
        out
    };
    extend_instance(m, &names, edges, 0)
}

fn map_back(m: &McipInstance, split: &BTreeMap<VertexId, Edge>, sol: &Solution) -> McipSolution {
    let intervened: BTreeSet<VertexId> = split
        .iter()
        .filter(|(_, e)| sol.removed.contains(e))
        .map(|(v, _)| *v)
        .collect();
    let identifiable = sol.identifiable
        && m.identifiable_after(&intervened)
            .expect("intervention set belongs to the instance");
    debug_assert_eq!(
        identifiable, sol.identifiable,
        "split reduction disagreed with direct check"
    );
    McipSolution {
        cost: m.cost_of(&intervened),
        intervened,
        identifiable,
        timed_out: sol.timed_out,
    }
}

/// Exact MCIP through the split reduction and branch and bound.
pub fn mcip_solve(m: &McipInstance, bounds: Bounds) -> Result<McipSolution> {
    mcip_solve_until(m, bounds, None)
}

pub fn mcip_solve_until(
    m: &McipInstance,
    bounds: Bounds,
    deadline: Option<Instant>,
) -> Result<McipSolution> {
    let (inst, split) = t1_mcip_to_edge_id(m)?;
    let sol = ExactSolver::new(&inst)
        .bounds(bounds)
        .deadline(deadline)
        .solve()?;
    let out = map_back(m, &split, &sol);
    if !out.identifiable && !out.timed_out && bounds.upper.is_infinite() {
        return Err(Error::Infeasible);
    }
    Ok(out)
}

/// Which min-cut heuristic to run on the split image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McipHeuristic {
    Heid1,
    Heid2,
}

pub fn mcip_heuristic(m: &McipInstance, which: McipHeuristic) -> Result<McipSolution> {
    let (inst, split) = t1_mcip_to_edge_id(m)?;
    let h = match which {
        McipHeuristic::Heid1 => heid1(&inst)?,
        McipHeuristic::Heid2 => heid2(&inst)?,
    };
    Ok(map_back(m, &split, &h.solution))
}

/// Exclusion gadget used by [`constrained_pipeline_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetStyle {
    /// [`add_exclusion_gadget`].
    Hub,
    /// [`add_negative_correlation_gadget`].
    Chain,
}

/// Constrained edge removal solved as MCIP with one gadget per constraint.
pub fn constrained_pipeline(
    inst: &WeightedInstance,
    constraints: &[ExclusionConstraint],
) -> Result<Solution> {
    constrained_pipeline_with(inst, constraints, GadgetStyle::Hub, Bounds::default())
}

pub fn constrained_pipeline_with(
    inst: &WeightedInstance,
    constraints: &[ExclusionConstraint],
    style: GadgetStyle,
    bounds: Bounds,
) -> Result<Solution> {
    let (mut m, map) = t2_edge_id_to_mcip(inst)?;
    for c in constraints {
        let reps: Vec<VertexId> = c
            .edges()
            .iter()
            .map(|e| {
                map.forward
                    .get(e)
                    .copied()
                    .ok_or_else(|| Error::UnknownEdge(format!("{e:?}")))
            })
            .collect::<Result<_>>()?;
        m = match style {
            GadgetStyle::Hub => add_exclusion_gadget(&m, &reps)?,
            GadgetStyle::Chain => add_negative_correlation_gadget(&m, &reps)?,
        };
    }
    let sol = mcip_solve(&m, bounds)?;
    if !sol.identifiable {
        return Ok(Solution {
            removed: BTreeSet::new(),
            cost: Weight::INFINITE,
            identifiable: false,
            score: None,
            kept_graph: inst.graph.clone(),
            timed_out: sol.timed_out,
        });
    }
    let removed: BTreeSet<Edge> = sol.intervened.iter().map(|v| map.backward[v]).collect();
    let mut out = Solution::from_removed(inst, removed);
    out.timed_out = sol.timed_out;
    Ok(out)
}

/// Unconstrained edge removal through both reductions.
pub fn edge_id_via_mcip(inst: &WeightedInstance) -> Result<Solution> {
    constrained_pipeline(inst, &[])
}
