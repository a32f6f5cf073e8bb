//! Min-cut heuristics for edge removal.
//!
//! Every hedge for `Q[Y]` contains a vertex outside `Y` that is either a
//! bidirected neighbour of `Y` or a parent of `Y`. The two heuristics each
//! pick one of these families as sources and cut the other edge type:
//!
//! * [`heid1`]: sources are bidirected neighbours of `Y`; the cut runs over
//!   directed edges, and cutting a source arc removes that vertex's
//!   bidirected edges into `Y`.
//! * [`heid2`]: sources are parents of `Y`; the cut runs over bidirected
//!   edges (undirected flow), and cutting a source arc removes that vertex's
//!   directed edges into `Y`.
//!
//! Both work on the maximal hedge only.

use crate::admg::Edge;
use crate::error::{Error, Result};
use crate::exact::Solution;
use crate::probmodel::{Weight, WeightedInstance};
use crate::vset::{VertexId, VertexSet};
use std::collections::{BTreeSet, VecDeque};

/// Residual capacities at or below this are treated as saturated.
const RESIDUAL_EPS: f64 = 1e-12;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArcId(pub usize);

#[derive(Debug, Clone)]
struct ArcSpec {
    from: NodeId,
    to: NodeId,
    capacity: Weight,
    undirected: bool,
}

/// s-t flow network with extended-real capacities. Undirected edges are a
/// pair of opposing arcs that share one capacity.
#[derive(Debug, Clone, Default)]
pub struct FlowNetwork {
    arcs: Vec<ArcSpec>,
    n_nodes: usize,
}

/// Result of [`FlowNetwork::min_cut`].
#[derive(Debug, Clone)]
pub struct MinCut {
    /// Arcs leaving the source side, in insertion order.
    pub arcs: Vec<ArcId>,
    /// Max-flow value; infinite when no finite cut exists.
    pub value: Weight,
    /// Nodes reachable from the source in the final residual graph.
    pub source_side: Vec<bool>,
}

impl FlowNetwork {
    pub fn new(n_nodes: usize) -> Self {
        FlowNetwork {
            arcs: Vec::new(),
            n_nodes,
        }
    }

    pub fn add_node(&mut self) -> NodeId {
        self.n_nodes += 1;
        self.n_nodes - 1
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn add_arc(&mut self, from: NodeId, to: NodeId, capacity: Weight) -> ArcId {
        self.push(from, to, capacity, false)
    }

    pub fn add_undirected(&mut self, u: NodeId, v: NodeId, capacity: Weight) -> ArcId {
        self.push(u, v, capacity, true)
    }

    fn push(&mut self, from: NodeId, to: NodeId, capacity: Weight, undirected: bool) -> ArcId {
        assert!(
            from < self.n_nodes && to < self.n_nodes,
            "arc endpoint out of range"
        );
        self.arcs.push(ArcSpec {
            from,
            to,
            capacity,
            undirected,
        });
        ArcId(self.arcs.len() - 1)
    }

    pub fn capacity(&self, arc: ArcId) -> Weight {
        self.arcs[arc.0].capacity
    }

    pub fn endpoints(&self, arc: ArcId) -> (NodeId, NodeId) {
        (self.arcs[arc.0].from, self.arcs[arc.0].to)
    }

    /// Dinic max flow followed by residual reachability from `s`.
    pub fn min_cut(&self, s: NodeId, t: NodeId) -> MinCut {
        assert_ne!(s, t, "source and sink must differ");
        let mut residual = Residual::new(self);

        let uncuttable = residual.reachable(s, |c| c.is_infinite());
        if uncuttable[t] {
            return MinCut {
                arcs: Vec::new(),
                value: Weight::INFINITE,
                source_side: uncuttable,
            };
        }

        let mut flow = 0.0;
        while let Some(level) = residual.levels(s, t) {
            let mut next = vec![0usize; self.n_nodes];
            loop {
                let pushed = residual.augment(s, t, f64::INFINITY, &level, &mut next);
                if pushed <= 0.0 {
                    break;
                }
                flow += pushed;
            }
        }

        let source_side = residual.reachable(s, |c| c > RESIDUAL_EPS);
        let arcs = self
            .arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| {
                let (f, t) = (source_side[a.from], source_side[a.to]);
                if a.undirected {
                    f != t
                } else {
                    f && !t
                }
            })
            .map(|(i, _)| ArcId(i))
            .collect();
        MinCut {
            arcs,
            value: Weight::new(flow).expect("flow is non-negative"),
            source_side,
        }
    }
}

struct Residual {
    head: Vec<NodeId>,
    cap: Vec<f64>,
    out: Vec<Vec<usize>>,
}

impl Residual {
    fn new(net: &FlowNetwork) -> Self {
        let mut r = Residual {
            head: Vec::with_capacity(2 * net.arcs.len()),
            cap: Vec::with_capacity(2 * net.arcs.len()),
            out: vec![Vec::new(); net.n_nodes],
        };
        for a in &net.arcs {
            let c = a.capacity.value();
            let back = if a.undirected { c } else { 0.0 };
            r.out[a.from].push(r.head.len());
            r.head.push(a.to);
            r.cap.push(c);
            r.out[a.to].push(r.head.len());
            r.head.push(a.from);
            r.cap.push(back);
        }
        r
    }

    fn reachable(&self, s: NodeId, usable: impl Fn(f64) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.out.len()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &k in &self.out[u] {
                let v = self.head[k];
                if !seen[v] && usable(self.cap[k]) {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    fn levels(&self, s: NodeId, t: NodeId) -> Option<Vec<usize>> {
        let mut level = vec![usize::MAX; self.out.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &k in &self.out[u] {
                let v = self.head[k];
                if level[v] == usize::MAX && self.cap[k] > RESIDUAL_EPS {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        (level[t] != usize::MAX).then_some(level)
    }

    fn augment(
        &mut self,
        u: NodeId,
        t: NodeId,
        limit: f64,
        level: &[usize],
        next: &mut [usize],
    ) -> f64 {
        if u == t {
            return limit;
        }
        while next[u] < self.out[u].len() {
            let k = self.out[u][next[u]];
            let v = self.head[k];
            if self.cap[k] > RESIDUAL_EPS && level[v] == level[u] + 1 {
                let pushed = self.augment(v, t, limit.min(self.cap[k]), level, next);
                if pushed > 0.0 {
                    self.cap[k] -= pushed;
                    self.cap[k ^ 1] += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0.0
    }
}

/// What a cut arc stood for in the original instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CutArc {
    /// The arc from the super-source to this vertex.
    Source(VertexId),
    /// An arc realizing an original edge.
    Edge(Edge),
}

#[derive(Debug, Clone)]
pub struct CutProvenance {
    pub arc: CutArc,
    pub capacity: Weight,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone)]
pub struct HeuristicSolution {
    pub solution: Solution,
    pub provenance: Vec<CutProvenance>,
    pub algorithm: &'static str,
}

/// Per-arc provenance collected while building a network.
struct Gadget {
    net: FlowNetwork,
    meaning: Vec<(CutArc, Vec<Edge>)>,
}

impl Gadget {
    fn new(n: usize) -> Self {
        Gadget {
            net: FlowNetwork::new(n),
            meaning: Vec::new(),
        }
    }

    fn arc(
        &mut self,
        from: NodeId,
        to: NodeId,
        cap: Weight,
        undirected: bool,
        arc: CutArc,
        edges: Vec<Edge>,
    ) {
        if undirected {
            self.net.add_undirected(from, to, cap);
        } else {
            self.net.add_arc(from, to, cap);
        }
        self.meaning.push((arc, edges));
    }

    fn plain(&mut self, from: NodeId, to: NodeId, undirected: bool) {
        self.arc(
            from,
            to,
            Weight::INFINITE,
            undirected,
            CutArc::Source(VertexId(u32::MAX)),
            Vec::new(),
        );
    }

    fn cut(self, s: NodeId, t: NodeId) -> Result<Vec<CutProvenance>> {
        let cut = self.net.min_cut(s, t);
        if cut.value.is_infinite() {
            return Err(Error::Infeasible);
        }
        Ok(cut
            .arcs
            .iter()
            .map(|a| {
                let (arc, edges) = self.meaning[a.0].clone();
                CutProvenance {
                    arc,
                    capacity: self.net.capacity(*a),
                    edges,
                }
            })
            .collect())
    }
}

fn finish(
    inst: &WeightedInstance,
    provenance: Vec<CutProvenance>,
    algorithm: &'static str,
) -> HeuristicSolution {
    let removed: BTreeSet<Edge> = provenance
        .iter()
        .flat_map(|p| p.edges.iter().copied())
        .collect();
    let solution = Solution::from_removed(inst, removed);
    debug_assert!(solution.identifiable, "{algorithm} left a hedge");
    HeuristicSolution {
        solution,
        provenance,
        algorithm,
    }
}

/// Sources: bidirected neighbours of the target; cut over directed edges.
pub fn heid1(inst: &WeightedInstance) -> Result<HeuristicSolution> {
    let g = &inst.graph;
    let y = &inst.target;
    let hedge = g.maximal_hedge_vertices(y)?;
    if hedge == *y {
        return Ok(finish(inst, Vec::new(), "heid1"));
    }
    let n = g.n();
    let mut gadget = Gadget::new(n + 2);
    let (source, sink) = (n, n + 1);
    for &e in g.directed_edges() {
        let (a, b) = e.endpoints();
        if hedge.contains(a) && hedge.contains(b) {
            gadget.arc(
                a.index(),
                b.index(),
                inst.weight(&e),
                false,
                CutArc::Edge(e),
                vec![e],
            );
        }
    }
    for z in hedge.difference(y).iter() {
        let into_target: Vec<Edge> = g
            .spouses(z)
            .intersection(y)
            .iter()
            .map(|t| Edge::bidirected(z, t))
            .collect();
        if !into_target.is_empty() {
            let cap = inst.cost_of(&into_target);
            gadget.arc(
                source,
                z.index(),
                cap,
                false,
                CutArc::Source(z),
                into_target,
            );
        }
    }
    for t in y.iter() {
        gadget.plain(t.index(), sink, false);
    }
    Ok(finish(inst, gadget.cut(source, sink)?, "heid1"))
}

/// Sources: parents of the target; cut over bidirected edges. Run once per
/// district of the target, results unioned. Hulls may overlap, so an edge
/// cut for two districts is listed once.
pub fn heid2(inst: &WeightedInstance) -> Result<HeuristicSolution> {
    let g = &inst.graph;
    let y = &inst.target;
    let mut provenance = Vec::new();
    for district in g.districts(y)? {
        let hull = g.hedge_hull(&district)?;
        if hull == district {
            continue;
        }
        for p in heid2_district(inst, &hull, &district)? {
            if !provenance
                .iter()
                .any(|q: &CutProvenance| q.arc == p.arc && q.edges == p.edges)
            {
                provenance.push(p);
            }
        }
    }
    Ok(finish(inst, provenance, "heid2"))
}

fn heid2_district(
    inst: &WeightedInstance,
    hull: &VertexSet,
    district: &VertexSet,
) -> Result<Vec<CutProvenance>> {
    let g = &inst.graph;
    let n = g.n();
    let mut gadget = Gadget::new(n + 2);
    let (source, sink) = (n, n + 1);
    for &e in g.bidirected_edges() {
        let (a, b) = e.endpoints();
        if hull.contains(a) && hull.contains(b) {
            gadget.arc(
                a.index(),
                b.index(),
                inst.weight(&e),
                true,
                CutArc::Edge(e),
                vec![e],
            );
        }
    }
    for z in hull.difference(district).iter() {
        let into_target: Vec<Edge> = g
            .children(z)
            .intersection(district)
            .iter()
            .map(|t| Edge::directed(z, t))
            .collect();
        if !into_target.is_empty() {
            let cap = inst.cost_of(&into_target);
            gadget.arc(source, z.index(), cap, true, CutArc::Source(z), into_target);
        }
    }
    for t in district.iter() {
        gadget.plain(t.index(), sink, true);
    }
    gadget.cut(source, sink)
}

/// Cheaper of the two heuristics; ties go to [`heid1`].
pub fn best_heuristic(inst: &WeightedInstance) -> Result<HeuristicSolution> {
    match (heid1(inst), heid2(inst)) {
        (Ok(a), Ok(b)) => Ok(if b.solution.cost < a.solution.cost {
            b
        } else {
            a
        }),
        (Ok(a), Err(_)) => Ok(a),
        (Err(_), Ok(b)) => Ok(b),
        (Err(e), Err(_)) => Err(e),
    }
}
