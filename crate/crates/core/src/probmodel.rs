//! Edge probabilities, subgraph scores and the mapping to edge weights.
//!
//! Edges exist independently with probability `p`. A kept edge set `S` has
//! probability `prod_{e in S} p_e * prod_{e not in S} (1 - p_e)`, and its
//! plausibility is the total probability of all subgraphs of `S`, which
//! simplifies to `prod_{e not in S} (1 - p_e)`.
//!
//! Maximizing either score over identifiable subgraphs is a minimum-weight
//! edge removal problem:
//!
//! | objective        | weight                    | inverse                 |
//! |------------------|---------------------------|-------------------------|
//! | `MostProbable`   | `max(0, ln(p / (1 - p)))` | `p = e^w / (1 + e^w)`   |
//! | `MostPlausible`  | `-ln(1 - p)`              | `p = 1 - e^-w`          |
//!
//! Certain edges (`p = 1`) map to an infinite weight under both.

use crate::admg::{Admg, Edge};
use crate::error::{Error, Result};
use crate::vset::VertexSet;
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::iter::Sum;
use std::ops::Add;

/// Non-negative extended real.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weight(f64);

impl Weight {
    pub const ZERO: Weight = Weight(0.0);
    pub const INFINITE: Weight = Weight(f64::INFINITY);

    /// Rejects negative values and NaN.
    pub fn new(value: f64) -> Option<Weight> {
        (value >= 0.0).then_some(Weight(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl Eq for Weight {}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Weight {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for Weight {
    type Output = Weight;
    fn add(self, rhs: Weight) -> Weight {
        Weight(self.0 + rhs.0)
    }
}

impl Sum for Weight {
    fn sum<I: Iterator<Item = Weight>>(iter: I) -> Weight {
        iter.fold(Weight::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Which score the removal problem optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    MostProbable,
    MostPlausible,
    /// Edge values are already weights.
    RawWeights,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::MostProbable => "most-probable",
            Objective::MostPlausible => "most-plausible",
            Objective::RawWeights => "weights",
        }
    }
}

/// Graph whose every edge carries an existence probability in `(0, 1]`.
#[derive(Debug, Clone)]
pub struct ProbabilisticAdmg {
    pub graph: Admg,
    prob: BTreeMap<Edge, f64>,
}

impl ProbabilisticAdmg {
    pub fn new(graph: Admg, prob: BTreeMap<Edge, f64>) -> Result<Self> {
        for e in graph.edges() {
            match prob.get(&e) {
                None => return Err(Error::UnknownEdge(graph.edge_label(&e))),
                Some(&p) if !(p > 0.0 && p <= 1.0) => {
                    return Err(Error::InvalidProbability {
                        edge: graph.edge_label(&e),
                        value: p,
                    })
                }
                _ => {}
            }
        }
        if prob.len() != graph.n_edges() {
            let extra = prob.keys().find(|e| !graph.contains_edge(e)).unwrap();
            return Err(Error::UnknownEdge(format!("{extra:?}")));
        }
        Ok(ProbabilisticAdmg { graph, prob })
    }

    /// Every edge gets probability one.
    pub fn certain(graph: Admg) -> Self {
        let prob = graph.edges().map(|e| (e, 1.0)).collect();
        ProbabilisticAdmg { graph, prob }
    }

    pub fn prob(&self, e: &Edge) -> Option<f64> {
        self.prob.get(e).copied()
    }

    pub fn probabilities(&self) -> &BTreeMap<Edge, f64> {
        &self.prob
    }

    /// Edges with `p < 0.5`: free to remove under the most-probable objective.
    pub fn below_half(&self) -> Vec<Edge> {
        self.prob
            .iter()
            .filter(|(_, &p)| p < 0.5)
            .map(|(e, _)| *e)
            .collect()
    }

    fn kept_set<'a, I: IntoIterator<Item = &'a Edge>>(&self, kept: I) -> Result<HashSet<Edge>> {
        let set: HashSet<Edge> = kept.into_iter().copied().collect();
        for e in &set {
            if !self.prob.contains_key(e) {
                return Err(Error::UnknownEdge(format!("{e:?}")));
            }
        }
        Ok(set)
    }
}

/// Edge-removal instance: graph, weights and the target of `Q[target]`.
#[derive(Debug, Clone)]
pub struct WeightedInstance {
    pub graph: Admg,
    weights: BTreeMap<Edge, Weight>,
    pub target: VertexSet,
}

impl WeightedInstance {
    pub fn new(graph: Admg, weights: BTreeMap<Edge, Weight>, target: VertexSet) -> Result<Self> {
        if target.is_empty() {
            return Err(Error::EmptyTarget);
        }
        if target.universe() != graph.n() {
            return Err(Error::UnknownVertex(format!(
                "target over {} vertices",
                target.universe()
            )));
        }
        for e in graph.edges() {
            if !weights.contains_key(&e) {
                return Err(Error::UnknownEdge(graph.edge_label(&e)));
            }
        }
        if weights.len() != graph.n_edges() {
            let extra = weights.keys().find(|e| !graph.contains_edge(e)).unwrap();
            return Err(Error::UnknownEdge(format!("{extra:?}")));
        }
        Ok(WeightedInstance {
            graph,
            weights,
            target,
        })
    }

    pub fn weight(&self, e: &Edge) -> Weight {
        self.weights[e]
    }

    pub fn weights(&self) -> &BTreeMap<Edge, Weight> {
        &self.weights
    }

    /// Sum of weights over `edges`, in canonical edge order.
    pub fn cost_of<'a, I: IntoIterator<Item = &'a Edge>>(&self, edges: I) -> Weight {
        let mut sorted: Vec<Edge> = edges.into_iter().copied().collect();
        sorted.sort();
        sorted.dedup();
        sorted.iter().map(|e| self.weight(e)).sum()
    }

    /// Edges with finite weight.
    pub fn finite_edges(&self) -> Vec<Edge> {
        self.weights
            .iter()
            .filter(|(_, w)| w.is_finite())
            .map(|(e, _)| *e)
            .collect()
    }
}

/// Probability of observing exactly `kept`.
pub fn subgraph_probability<'a, I>(pg: &ProbabilisticAdmg, kept: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a Edge>,
{
    let kept = pg.kept_set(kept)?;
    let log: f64 = pg
        .prob
        .iter()
        .map(|(e, &p)| {
            if kept.contains(e) {
                p.ln()
            } else {
                (1.0 - p).ln()
            }
        })
        .sum();
    Ok(log.exp())
}

/// Total probability of all subgraphs of `kept`.
pub fn plausibility<'a, I>(pg: &ProbabilisticAdmg, kept: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a Edge>,
{
    let kept = pg.kept_set(kept)?;
    let log: f64 = pg
        .prob
        .iter()
        .filter(|(e, _)| !kept.contains(*e))
        .map(|(_, &p)| (1.0 - p).ln())
        .sum();
    Ok(log.exp())
}

pub fn probability_to_weight(p: f64, objective: Objective) -> Result<Weight> {
    if p >= 1.0 {
        return Ok(Weight::INFINITE);
    }
    match objective {
        Objective::MostProbable => Ok(Weight((p / (1.0 - p)).ln().max(0.0))),
        Objective::MostPlausible => Ok(Weight(-(1.0 - p).ln())),
        Objective::RawWeights => Err(Error::UnsupportedObjective("weights")),
    }
}

pub fn weight_to_probability(w: Weight, objective: Objective) -> Result<f64> {
    if w.is_infinite() {
        return Ok(1.0);
    }
    let w = w.value();
    match objective {
        Objective::MostProbable => Ok(1.0 / (1.0 + (-w).exp())),
        Objective::MostPlausible => Ok(-(-w).exp_m1()),
        Objective::RawWeights => Err(Error::UnsupportedObjective("weights")),
    }
}

pub fn to_edge_id_weights(
    pg: &ProbabilisticAdmg,
    objective: Objective,
    target: &VertexSet,
) -> Result<WeightedInstance> {
    if target.is_empty() {
        return Err(Error::EmptyTarget);
    }
    let weights = pg
        .prob
        .iter()
        .map(|(e, &p)| Ok((*e, probability_to_weight(p, objective)?)))
        .collect::<Result<_>>()?;
    WeightedInstance::new(pg.graph.clone(), weights, target.clone())
}

/// Inverse of [`to_edge_id_weights`].
pub fn from_edge_id_weights(
    inst: &WeightedInstance,
    objective: Objective,
) -> Result<ProbabilisticAdmg> {
    let prob = inst
        .weights
        .iter()
        .map(|(e, &w)| Ok((*e, weight_to_probability(w, objective)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    ProbabilisticAdmg::new(inst.graph.clone(), prob)
}

/// Objective value of removing `removed`. Under `MostProbable` the edges
/// with `p < 0.5` are dropped from the kept graph as well.
pub fn score_solution<'a, I>(
    pg: &ProbabilisticAdmg,
    removed: I,
    objective: Objective,
) -> Result<f64>
where
    I: IntoIterator<Item = &'a Edge>,
{
    let removed = pg.kept_set(removed)?;
    let kept: Vec<Edge> = pg
        .prob
        .iter()
        .filter(|(e, &p)| {
            !removed.contains(*e) && !(objective == Objective::MostProbable && p < 0.5)
        })
        .map(|(e, _)| *e)
        .collect();
    match objective {
        Objective::MostProbable => subgraph_probability(pg, &kept),
        Objective::MostPlausible => plausibility(pg, &kept),
        Objective::RawWeights => Err(Error::UnsupportedObjective("weights")),
    }
}
