//! Graph files.
//!
//! JSON is the canonical format:
//!
//! ```json
//! {"vertices": ["z", "x", "y"],
//!  "directed":   [{"src": "z", "dst": "x", "p": 1.0}],
//!  "bidirected": [{"u": "z", "v": "y", "p": 0.9}]}
//! ```
//!
//! `p` defaults to 1.0. MCIP instances add `"costs"` (one entry per vertex,
//! aligned with `"vertices"`) and any file may carry a `"target"` list.
//! Infinite values are written as the string `"inf"`.
//!
//! The line format is meant for hand-written fixtures:
//!
//! ```text
//! # comment
//! v z            vertex (optional; endpoints are added on first use)
//! v x 2.5        vertex with intervention cost
//! d z x 1.0      directed edge with value
//! b z y 0.9      bidirected edge with value
//! t y            target vertex (repeatable)
//! ```
//!
//! Numbers are written in shortest round-trip form, so parsing a written
//! file reproduces every value bit for bit.

use crate::admg::{Admg, AdmgBuilder, Edge};
use crate::error::{Error, Result};
use crate::mcip::McipInstance;
use crate::probmodel::{ProbabilisticAdmg, Weight, WeightedInstance};
use crate::vset::{VertexId, VertexSet};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// A number that may be infinite; `"inf"` in JSON.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Value(pub f64);

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Value(x)),
            Raw::Text(t) => parse_number(&t)
                .map(Value)
                .ok_or_else(|| serde::de::Error::custom(format!("not a number: `{t}`"))),
        }
    }
}

fn parse_number(t: &str) -> Option<f64> {
    match t {
        "inf" | "Infinity" | "infinity" => Some(f64::INFINITY),
        _ => t.parse::<f64>().ok().filter(|x| !x.is_nan()),
    }
}

fn fmt_number(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else {
        format!("{x}")
    }
}

fn default_value() -> Value {
    Value(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectedEntry {
    pub src: String,
    pub dst: String,
    #[serde(default = "default_value")]
    pub p: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidirectedEntry {
    pub u: String,
    pub v: String,
    #[serde(default = "default_value")]
    pub p: Value,
}

/// On-disk graph document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    #[serde(default)]
    pub vertices: Vec<String>,
    #[serde(default)]
    pub directed: Vec<DirectedEntry>,
    #[serde(default)]
    pub bidirected: Vec<BidirectedEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Lines,
}

/// A graph file resolved against its graph.
#[derive(Debug, Clone)]
pub struct ParsedGraph {
    pub graph: Admg,
    pub values: BTreeMap<Edge, f64>,
    pub costs: Option<Vec<Weight>>,
    pub target: Option<VertexSet>,
}

impl GraphFile {
    /// Parses JSON or lines; `None` detects by the first non-blank character.
    pub fn parse(text: &str, format: Option<Format>) -> Result<GraphFile> {
        let format = format.unwrap_or_else(|| {
            if text.trim_start().starts_with('{') {
                Format::Json
            } else {
                Format::Lines
            }
        });
        match format {
            Format::Json => Self::from_json(text),
            Format::Lines => Self::from_lines(text),
        }
    }

    pub fn from_json(text: &str) -> Result<GraphFile> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn from_lines(text: &str) -> Result<GraphFile> {
        let mut file = GraphFile {
            vertices: Vec::new(),
            directed: Vec::new(),
            bidirected: Vec::new(),
            costs: None,
            target: None,
        };
        let mut cost_of: BTreeMap<String, f64> = BTreeMap::new();
        let mut seen = std::collections::HashSet::new();
        let mut touch = |file: &mut GraphFile, name: &str| {
            if seen.insert(name.to_string()) {
                file.vertices.push(name.to_string());
            }
        };
        let mut any = false;
        for (lineno, raw) in text.lines().enumerate() {
            let mut tokens: Vec<(usize, &str)> = tokens_with_columns(raw);
            if let Some(i) = tokens.iter().position(|(_, t)| t.starts_with('#')) {
                tokens.truncate(i);
            }
            let Some(&(col0, head)) = tokens.first() else {
                continue;
            };
            any = true;
            let err = |column: usize, message: String| Error::Parse {
                line: lineno + 1,
                column,
                message,
            };
            let number = |idx: usize| -> Result<Option<f64>> {
                match tokens.get(idx) {
                    None => Ok(None),
                    Some(&(c, t)) => parse_number(t)
                        .map(Some)
                        .ok_or_else(|| err(c, format!("expected a number, found `{t}`"))),
                }
            };
            let arity = |min: usize, max: usize| -> Result<()> {
                if tokens.len() < min || tokens.len() > max {
                    let c = tokens.get(max).map_or(col0, |t| t.0);
                    Err(err(
                        c,
                        format!("`{head}` takes {} to {} fields", min - 1, max - 1),
                    ))
                } else {
                    Ok(())
                }
            };
            match head {
                "d" | "b" => {
                    arity(3, 4)?;
                    let (a, c) = (tokens[1].1, tokens[2].1);
                    let p = Value(number(3)?.unwrap_or(1.0));
                    touch(&mut file, a);
                    touch(&mut file, c);
                    if head == "d" {
                        file.directed.push(DirectedEntry {
                            src: a.into(),
                            dst: c.into(),
                            p,
                        });
                    } else {
                        file.bidirected.push(BidirectedEntry {
                            u: a.into(),
                            v: c.into(),
                            p,
                        });
                    }
                }
                "v" => {
                    arity(2, 3)?;
                    touch(&mut file, tokens[1].1);
                    if let Some(c) = number(2)? {
                        cost_of.insert(tokens[1].1.to_string(), c);
                    }
                }
                "t" => {
                    if tokens.len() < 2 {
                        return Err(err(col0, "`t` needs at least one vertex".into()));
                    }
                    let t = file.target.get_or_insert_with(Vec::new);
                    for &(_, name) in &tokens[1..] {
                        t.push(name.to_string());
                    }
                }
                other => return Err(err(col0, format!("unknown record type `{other}`"))),
            }
        }
        if !any {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: "empty graph file".into(),
            });
        }
        if !cost_of.is_empty() {
            let costs = file
                .vertices
                .iter()
                .map(|v| Value(cost_of.get(v).copied().unwrap_or(f64::INFINITY)))
                .collect();
            file.costs = Some(costs);
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("graph files always serialize");
        s.push('\n');
        s
    }

    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        let with_cost: Vec<Option<f64>> = match &self.costs {
            Some(c) => c.iter().map(|v| Some(v.0)).collect(),
            None => vec![None; self.vertices.len()],
        };
        for (v, c) in self.vertices.iter().zip(with_cost) {
            match c {
                Some(c) => writeln!(out, "v {v} {}", fmt_number(c)).unwrap(),
                None => writeln!(out, "v {v}").unwrap(),
            }
        }
        for e in &self.directed {
            writeln!(out, "d {} {} {}", e.src, e.dst, fmt_number(e.p.0)).unwrap();
        }
        for e in &self.bidirected {
            writeln!(out, "b {} {} {}", e.u, e.v, fmt_number(e.p.0)).unwrap();
        }
        if let Some(t) = &self.target {
            writeln!(out, "t {}", t.join(" ")).unwrap();
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Lines => self.to_lines(),
        }
    }

    /// Builds the graph and resolves values, costs and target.
    pub fn resolve(&self) -> Result<ParsedGraph> {
        let mut b = Admg::builder();
        for v in &self.vertices {
            b.add_vertex(v)?;
        }
        let mut values = BTreeMap::new();
        for e in &self.directed {
            let (s, d) = (self.known(&mut b, &e.src)?, self.known(&mut b, &e.dst)?);
            let edge = Edge::directed(s, d);
            b.add_edge(edge)?;
            values.insert(edge, e.p.0);
        }
        for e in &self.bidirected {
            let (u, v) = (self.known(&mut b, &e.u)?, self.known(&mut b, &e.v)?);
            let edge = Edge::bidirected(u, v);
            b.add_edge(edge)?;
            values.insert(edge, e.p.0);
        }
        let graph = b.build()?;
        let costs = match &self.costs {
            None => None,
            Some(c) if c.len() != graph.n() => {
                return Err(Error::Parse {
                    line: 0,
                    column: 0,
                    message: format!("{} costs for {} vertices", c.len(), graph.n()),
                })
            }
            Some(c) => Some(
                c.iter()
                    .zip(graph.names())
                    .map(|(v, name)| {
                        Weight::new(v.0).ok_or_else(|| Error::InvalidWeight {
                            edge: name.clone(),
                            value: v.0,
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        let target = match &self.target {
            None => None,
            Some(t) => Some(graph.set_of(t)?),
        };
        Ok(ParsedGraph {
            graph,
            values,
            costs,
            target,
        })
    }

    fn known(&self, b: &mut AdmgBuilder, name: &str) -> Result<VertexId> {
        if self.vertices.iter().any(|v| v == name) {
            Ok(b.vertex(name))
        } else {
            Err(Error::UnknownVertex(name.to_string()))
        }
    }

    fn skeleton(g: &Admg, value: impl Fn(&Edge) -> f64) -> GraphFile {
        GraphFile {
            vertices: g.names().to_vec(),
            directed: g
                .directed_edges()
                .iter()
                .map(|e| {
                    let (a, b) = e.endpoints();
                    DirectedEntry {
                        src: g.name(a).into(),
                        dst: g.name(b).into(),
                        p: Value(value(e)),
                    }
                })
                .collect(),
            bidirected: g
                .bidirected_edges()
                .iter()
                .map(|e| {
                    let (a, b) = e.endpoints();
                    BidirectedEntry {
                        u: g.name(a).into(),
                        v: g.name(b).into(),
                        p: Value(value(e)),
                    }
                })
                .collect(),
            costs: None,
            target: None,
        }
    }

    pub fn from_admg(g: &Admg) -> GraphFile {
        Self::skeleton(g, |_| 1.0)
    }

    pub fn from_probabilistic(pg: &ProbabilisticAdmg) -> GraphFile {
        Self::skeleton(&pg.graph, |e| {
            pg.prob(e).expect("every edge has a probability")
        })
    }

    /// Weights go in the `p` fields; the target is included.
    pub fn from_weighted(inst: &WeightedInstance) -> GraphFile {
        let mut f = Self::skeleton(&inst.graph, |e| inst.weight(e).value());
        f.target = Some(names_of(&inst.graph, &inst.target));
        f
    }

    pub fn from_mcip(m: &McipInstance) -> GraphFile {
        let mut f = Self::from_admg(&m.graph);
        f.costs = Some(m.costs().iter().map(|w| Value(w.value())).collect());
        f.target = Some(names_of(&m.graph, &m.target));
        f
    }

    pub fn with_target(mut self, g: &Admg, target: &VertexSet) -> GraphFile {
        self.target = Some(names_of(g, target));
        self
    }
}

fn names_of(g: &Admg, s: &VertexSet) -> Vec<String> {
    s.iter().map(|v| g.name(v).to_string()).collect()
}

fn tokens_with_columns(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

impl ParsedGraph {
    /// Interprets edge values as probabilities in `(0, 1]`.
    pub fn probabilistic(&self) -> Result<ProbabilisticAdmg> {
        ProbabilisticAdmg::new(self.graph.clone(), self.values.clone())
    }

    /// Interprets edge values as weights.
    pub fn weighted(&self, target: &VertexSet) -> Result<WeightedInstance> {
        let weights = self
            .values
            .iter()
            .map(|(e, &w)| {
                Weight::new(w)
                    .map(|w| (*e, w))
                    .ok_or_else(|| Error::InvalidWeight {
                        edge: self.graph.edge_label(e),
                        value: w,
                    })
            })
            .collect::<Result<_>>()?;
        WeightedInstance::new(self.graph.clone(), weights, target.clone())
    }

    /// Uses vertex costs; missing costs count as infinite.
    pub fn mcip(&self, target: &VertexSet) -> Result<McipInstance> {
        let cost = self
            .costs
            .clone()
            .unwrap_or_else(|| vec![Weight::INFINITE; self.graph.n()]);
        McipInstance::new(self.graph.clone(), cost, target.clone())
    }
}
