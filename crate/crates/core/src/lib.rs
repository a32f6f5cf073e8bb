//! Minimum-cost edge removal for causal effect identification.
//!
//! Given a mixed graph whose edges exist with known probabilities, find the
//! cheapest set of edges to delete so that a causal query becomes
//! identifiable by the hedge criterion.
//!
//! * [`admg`]: graphs, districts, ancestors, hedge hulls.
//! * [`probmodel`]: edge probabilities, subgraph scores, weight mappings.
//! * [`exact`]: branch and bound, brute-force oracle, ranking.
//! * [`heuristics`]: min-cut heuristics and the max-flow engine.
//! * [`mcip`]: reductions to and from minimum-cost intervention.
//! * [`harness`]: random instances and timed benchmark runs.
//! * [`io`]: JSON and line-oriented graph files.

pub mod admg;
pub mod error;
pub mod exact;
pub mod harness;
pub mod heuristics;
pub mod io;
pub mod mcip;
pub mod probmodel;
pub mod vset;

pub use admg::{Admg, AdmgBuilder, Edge, EdgeKind};
pub use error::{Error, Result};
pub use probmodel::{Objective, ProbabilisticAdmg, Weight, WeightedInstance};
pub use vset::{VertexId, VertexSet};
