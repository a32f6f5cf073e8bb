//! Acyclic directed mixed graphs and the hedge machinery.
//!
//! Vertices are dense indices with unique string labels. Directed edges
//! encode direct causation, bidirected edges encode latent confounding.
//! Identifiability of `Q[Y]` is decided with the hedge criterion: the
//! maximal hedge is computed by alternating district and ancestor
//! restrictions until a fixpoint, and `Q[Y]` is identifiable exactly when
//! that fixpoint collapses to `Y`.

use crate::error::{Error, Result};
use crate::vset::{VertexId, VertexSet};
use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};

/// Edge kind. Bidirected sorts before directed, which is the tie-break
/// order used by the exact solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Bidirected,
    Directed,
}

/// A directed edge `a -> b` or a bidirected edge `a <-> b` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    kind: EdgeKind,
    a: VertexId,
    b: VertexId,
}

impl Edge {
    pub fn directed(src: VertexId, dst: VertexId) -> Edge {
        Edge {
            kind: EdgeKind::Directed,
            a: src,
            b: dst,
        }
    }

    /// Endpoint order is normalized, so `bidirected(u, v) == bidirected(v, u)`.
    pub fn bidirected(u: VertexId, v: VertexId) -> Edge {
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        Edge {
            kind: EdgeKind::Bidirected,
            a,
            b,
        }
    }

    pub fn kind(&self) -> EdgeKind {
        self.kind
    }

    pub fn is_directed(&self) -> bool {
        self.kind == EdgeKind::Directed
    }

    /// `(src, dst)` for directed edges, `(min, max)` for bidirected ones.
    pub fn endpoints(&self) -> (VertexId, VertexId) {
        (self.a, self.b)
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.a == v || self.b == v
    }
}

/// Parent, child and spouse bitsets; the working representation shared by
/// the graph type and the solvers.
#[derive(Clone, Debug)]
pub(crate) struct Adjacency {
    pub parents: Vec<VertexSet>,
    pub children: Vec<VertexSet>,
    pub spouses: Vec<VertexSet>,
}

impl Adjacency {
    pub fn new(n: usize) -> Self {
        Adjacency {
            parents: vec![VertexSet::empty(n); n],
            children: vec![VertexSet::empty(n); n],
            spouses: vec![VertexSet::empty(n); n],
        }
    }

    pub fn n(&self) -> usize {
        self.parents.len()
    }

    pub fn add(&mut self, e: Edge) {
        let (a, b) = e.endpoints();
        match e.kind() {
            EdgeKind::Directed => {
                self.children[a.index()].insert(b);
                self.parents[b.index()].insert(a);
            }
            EdgeKind::Bidirected => {
                self.spouses[a.index()].insert(b);
                self.spouses[b.index()].insert(a);
            }
        }
    }

    pub fn remove(&mut self, e: Edge) {
        let (a, b) = e.endpoints();
        match e.kind() {
            EdgeKind::Directed => {
                self.children[a.index()].remove(b);
                self.parents[b.index()].remove(a);
            }
            EdgeKind::Bidirected => {
                self.spouses[a.index()].remove(b);
                self.spouses[b.index()].remove(a);
            }
        }
    }

    pub fn has(&self, e: Edge) -> bool {
        let (a, b) = e.endpoints();
        match e.kind() {
            EdgeKind::Directed => self.children[a.index()].contains(b),
            EdgeKind::Bidirected => self.spouses[a.index()].contains(b),
        }
    }

    /// Drops every edge with an endpoint outside `keep`.
    pub fn restrict(&mut self, keep: &VertexSet) {
        for v in 0..self.n() {
            let vid = VertexId::from(v);
            if keep.contains(vid) {
                self.parents[v].intersect_with(keep);
                self.children[v].intersect_with(keep);
                self.spouses[v].intersect_with(keep);
            } else {
                self.parents[v] = VertexSet::empty(self.n());
                self.children[v] = VertexSet::empty(self.n());
                self.spouses[v] = VertexSet::empty(self.n());
            }
        }
    }

    fn closure(&self, seed: &VertexSet, within: &VertexSet, step: &[VertexSet]) -> VertexSet {
        let mut reached = seed.intersection(within);
        let mut frontier: Vec<VertexId> = reached.iter().collect();
        while let Some(v) = frontier.pop() {
            for u in step[v.index()].iter() {
                if within.contains(u) && reached.insert(u) {
                    frontier.push(u);
                }
            }
        }
        reached
    }

    /// Vertices of `within` connected to `seed` by bidirected paths inside `within`.
    pub fn district_within(&self, seed: &VertexSet, within: &VertexSet) -> VertexSet {
        self.closure(seed, within, &self.spouses)
    }

    /// Ancestors of `seed` in the subgraph induced by `within`.
    pub fn ancestors_within(&self, seed: &VertexSet, within: &VertexSet) -> VertexSet {
        self.closure(seed, within, &self.parents)
    }

    pub fn components(&self, s: &VertexSet) -> Vec<VertexSet> {
        let mut rest = s.clone();
        let mut out = Vec::new();
        while let Some(v) = rest.first() {
            let comp = self.district_within(&VertexSet::singleton(self.n(), v), s);
            rest.difference_with(&comp);
            out.push(comp);
        }
        out
    }

    pub fn hull(&self, district: &VertexSet) -> VertexSet {
        let mut h = VertexSet::full(self.n());
        loop {
            let c = self.district_within(district, &h);
            let a = self.ancestors_within(district, &c);
            if a == c {
                return a;
            }
            h = a;
        }
    }

    pub fn maximal_hedge(&self, target: &VertexSet) -> VertexSet {
        let mut m = VertexSet::empty(self.n());
        for d in self.components(target) {
            m.union_with(&self.hull(&d));
        }
        m
    }
}

/// An acyclic directed mixed graph. Immutable once built.
#[derive(Clone, Debug)]
pub struct Admg {
    names: Vec<String>,
    lookup: HashMap<String, VertexId>,
    directed: Vec<Edge>,
    bidirected: Vec<Edge>,
    adj: Adjacency,
}

impl Admg {
    pub fn builder() -> AdmgBuilder {
        AdmgBuilder::default()
    }

    /// Builds a graph from labels and edges, validating every invariant.
    pub fn from_parts<I: IntoIterator<Item = Edge>>(names: Vec<String>, edges: I) -> Result<Admg> {
        let mut b = AdmgBuilder::default();
        for name in names {
            b.add_vertex(&name)?;
        }
        for e in edges {
            b.add_edge(e)?;
        }
        b.build()
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.n()).map(VertexId::from)
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Option<VertexId> {
        self.lookup.get(name).copied()
    }

    pub fn resolve(&self, name: &str) -> Result<VertexId> {
        self.id(name)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    /// Resolves labels to a vertex set.
    pub fn set_of<S: AsRef<str>>(&self, names: &[S]) -> Result<VertexSet> {
        let mut s = self.empty_set();
        for name in names {
            s.insert(self.resolve(name.as_ref())?);
        }
        Ok(s)
    }

    pub fn empty_set(&self) -> VertexSet {
        VertexSet::empty(self.n())
    }

    pub fn full_set(&self) -> VertexSet {
        VertexSet::full(self.n())
    }

    pub fn directed_edges(&self) -> &[Edge] {
        &self.directed
    }

    pub fn bidirected_edges(&self) -> &[Edge] {
        &self.bidirected
    }

    /// All edges in canonical order (bidirected first, then directed).
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.bidirected.iter().chain(self.directed.iter()).copied()
    }

    pub fn n_edges(&self) -> usize {
        self.directed.len() + self.bidirected.len()
    }

    pub fn contains_edge(&self, e: &Edge) -> bool {
        let (a, b) = e.endpoints();
        a.index() < self.n() && b.index() < self.n() && self.adj.has(*e)
    }

    pub fn parents(&self, v: VertexId) -> &VertexSet {
        &self.adj.parents[v.index()]
    }

    pub fn children(&self, v: VertexId) -> &VertexSet {
        &self.adj.children[v.index()]
    }

    pub fn spouses(&self, v: VertexId) -> &VertexSet {
        &self.adj.spouses[v.index()]
    }

    pub(crate) fn adjacency(&self) -> &Adjacency {
        &self.adj
    }

    /// Human-readable edge label such as `z->x` or `x<->z`.
    pub fn edge_label(&self, e: &Edge) -> String {
        let (a, b) = e.endpoints();
        let arrow = if e.is_directed() { "->" } else { "<->" };
        format!("{}{}{}", self.name(a), arrow, self.name(b))
    }

    /// Labels of a vertex set in index order, e.g. `{x,z,t}`.
    pub fn set_label(&self, s: &VertexSet) -> String {
        let parts: Vec<&str> = s.iter().map(|v| self.name(v)).collect();
        format!("{{{}}}", parts.join(","))
    }

    /// Same vertex set with the given edges dropped. Unknown edges are ignored.
    pub fn without_edges<'a, I: IntoIterator<Item = &'a Edge>>(&self, removed: I) -> Admg {
        let drop: HashSet<Edge> = removed.into_iter().copied().collect();
        let mut g = self.clone();
        g.directed.retain(|e| !drop.contains(e));
        g.bidirected.retain(|e| !drop.contains(e));
        for e in &drop {
            if self.contains_edge(e) {
                g.adj.remove(*e);
            }
        }
        g
    }

    /// Subgraph induced by `keep`, re-indexed in ascending order of the kept
    /// vertices. Returns the graph and the original id of each new vertex.
    pub fn induced_subgraph(&self, keep: &VertexSet) -> (Admg, Vec<VertexId>) {
        let old_ids: Vec<VertexId> = keep.iter().collect();
        let mut new_of = vec![None; self.n()];
        for (i, v) in old_ids.iter().enumerate() {
            new_of[v.index()] = Some(VertexId::from(i));
        }
        let mut b = AdmgBuilder::default();
        for v in &old_ids {
            b.vertex(self.name(*v));
        }
        for e in self.edges() {
            let (a, c) = e.endpoints();
            if let (Some(na), Some(nc)) = (new_of[a.index()], new_of[c.index()]) {
                let ne = match e.kind() {
                    EdgeKind::Directed => Edge::directed(na, nc),
                    EdgeKind::Bidirected => Edge::bidirected(na, nc),
                };
                b.add_edge(ne)
                    .expect("induced subgraph of a valid graph is valid");
            }
        }
        (
            b.build()
                .expect("induced subgraph of a valid graph is acyclic"),
            old_ids,
        )
    }

    /// Deterministic topological order: Kahn's algorithm, smallest index first.
    pub fn topological_order(&self) -> Vec<VertexId> {
        kahn(self.n(), &self.adj).expect("graph invariant: directed part is acyclic")
    }

    fn check_set(&self, s: &VertexSet) -> Result<()> {
        if s.universe() != self.n() {
            let foreign = s
                .iter()
                .find(|v| v.index() >= self.n())
                .map(|v| format!("#{}", v.0))
                .unwrap_or_else(|| format!("set over {} vertices", s.universe()));
            return Err(Error::UnknownVertex(foreign));
        }
        Ok(())
    }

    /// Bidirected components of the subgraph induced by `s`, ordered by
    /// smallest member.
    pub fn districts(&self, s: &VertexSet) -> Result<Vec<VertexSet>> {
        self.check_set(s)?;
        Ok(self.adj.components(s))
    }

    /// Reflexive ancestors of `s` over directed edges.
    pub fn ancestors(&self, s: &VertexSet) -> Result<VertexSet> {
        self.check_set(s)?;
        Ok(self.adj.ancestors_within(s, &self.full_set()))
    }

    /// Union of all hedges for `Q[district]`, plus the district itself.
    pub fn hedge_hull(&self, district: &VertexSet) -> Result<VertexSet> {
        self.check_set(district)?;
        if self.adj.components(district).len() != 1 {
            return Err(Error::NotADistrict);
        }
        Ok(self.adj.hull(district))
    }

    /// Vertex set of the maximal hedge for `Q[target]`.
    pub fn maximal_hedge_vertices(&self, target: &VertexSet) -> Result<VertexSet> {
        self.check_set(target)?;
        if target.is_empty() {
            return Err(Error::EmptyTarget);
        }
        Ok(self.adj.maximal_hedge(target))
    }

    /// The maximal hedge as an induced, re-indexed subgraph (labels kept).
    pub fn maximal_hedge(&self, target: &VertexSet) -> Result<Admg> {
        let m = self.maximal_hedge_vertices(target)?;
        Ok(self.induced_subgraph(&m).0)
    }

    /// Hedge criterion: true iff no hedge exists for any district of `target`.
    pub fn is_identifiable(&self, target: &VertexSet) -> Result<bool> {
        Ok(self.maximal_hedge_vertices(target)? == *target)
    }

    /// Target of `Q[.]` equivalent to `P_x(y)`: ancestors of `y` after
    /// deleting `x`.
    pub fn general_query_to_qy(&self, x: &VertexSet, y: &VertexSet) -> Result<VertexSet> {
        self.check_set(x)?;
        self.check_set(y)?;
        if x.intersects(y) {
            return Err(Error::OverlappingSets);
        }
        let rest = self.full_set().difference(x);
        Ok(self.adj.ancestors_within(y, &rest))
    }
}

fn kahn(n: usize, adj: &Adjacency) -> std::result::Result<Vec<VertexId>, VertexId> {
    let mut indeg: Vec<usize> = adj.parents.iter().map(|p| p.len()).collect();
    let mut heap: BinaryHeap<Reverse<VertexId>> = (0..n)
        .map(VertexId::from)
        .filter(|v| indeg[v.index()] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = heap.pop() {
        order.push(v);
        for c in adj.children[v.index()].iter() {
            indeg[c.index()] -= 1;
            if indeg[c.index()] == 0 {
                heap.push(Reverse(c));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        let stuck = (0..n).find(|&i| indeg[i] > 0).unwrap();
        Err(VertexId::from(stuck))
    }
}

/// Incremental graph construction with validation at [`AdmgBuilder::build`].
#[derive(Default, Debug, Clone)]
pub struct AdmgBuilder {
    names: Vec<String>,
    lookup: HashMap<String, VertexId>,
    edges: BTreeSet<Edge>,
}

impl AdmgBuilder {
    /// Adds a new vertex; fails on a repeated label.
    pub fn add_vertex(&mut self, name: &str) -> Result<VertexId> {
        if self.lookup.contains_key(name) {
            return Err(Error::DuplicateVertex(name.to_string()));
        }
        Ok(self.vertex(name))
    }

    /// Returns the vertex with this label, creating it if needed.
    pub fn vertex(&mut self, name: &str) -> VertexId {
        if let Some(&v) = self.lookup.get(name) {
            return v;
        }
        let v = VertexId::from(self.names.len());
        self.names.push(name.to_string());
        self.lookup.insert(name.to_string(), v);
        v
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn add_edge(&mut self, e: Edge) -> Result<()> {
        let (a, b) = e.endpoints();
        let n = self.names.len();
        for v in [a, b] {
            if v.index() >= n {
                return Err(Error::UnknownVertex(format!("#{}", v.0)));
            }
        }
        if a == b {
            return Err(Error::SelfLoop(self.names[a.index()].clone()));
        }
        if !self.edges.insert(e) {
            let arrow = if e.is_directed() { "->" } else { "<->" };
            return Err(Error::DuplicateEdge(format!(
                "{}{}{}",
                self.names[a.index()],
                arrow,
                self.names[b.index()]
            )));
        }
        Ok(())
    }

    pub fn directed(&mut self, src: &str, dst: &str) -> Result<&mut Self> {
        let (s, d) = (self.vertex(src), self.vertex(dst));
        self.add_edge(Edge::directed(s, d))?;
        Ok(self)
    }

    pub fn bidirected(&mut self, u: &str, v: &str) -> Result<&mut Self> {
        let (a, b) = (self.vertex(u), self.vertex(v));
        self.add_edge(Edge::bidirected(a, b))?;
        Ok(self)
    }

    pub fn build(self) -> Result<Admg> {
        let n = self.names.len();
        let mut adj = Adjacency::new(n);
        let mut directed = Vec::new();
        let mut bidirected = Vec::new();
        for &e in &self.edges {
            adj.add(e);
            match e.kind() {
                EdgeKind::Directed => directed.push(e),
                EdgeKind::Bidirected => bidirected.push(e),
            }
        }
        if let Err(v) = kahn(n, &adj) {
            return Err(Error::CycleDetected(self.names[v.index()].clone()));
        }
        Ok(Admg {
            names: self.names,
            lookup: self.lookup,
            directed,
            bidirected,
            adj,
        })
    }
}
