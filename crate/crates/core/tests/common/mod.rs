//! Shared fixtures and brute-force oracles for the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use hedgecut_core::probmodel::{
    to_edge_id_weights, Objective, ProbabilisticAdmg, Weight, WeightedInstance,
};
use hedgecut_core::{Admg, Edge, VertexId, VertexSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// The four-vertex running example: `z->x`, `t->x`, `x->y` certain, and
/// bidirected `z<->x` 0.7, `z<->y` 0.9, `t<->x` 0.7, `z<->t` 1.0.
pub fn running_example() -> ProbabilisticAdmg {
    let mut b = Admg::builder();
    for v in ["x", "y", "z", "t"] {
        b.vertex(v);
    }
    b.directed("z", "x").unwrap();
    b.directed("t", "x").unwrap();
    b.directed("x", "y").unwrap();
    b.bidirected("z", "x").unwrap();
    b.bidirected("z", "y").unwrap();
    b.bidirected("t", "x").unwrap();
    b.bidirected("z", "t").unwrap();
    let g = b.build().unwrap();
    let probs = [
        (edge(&g, "z", "->", "x"), 1.0),
        (edge(&g, "t", "->", "x"), 1.0),
        (edge(&g, "x", "->", "y"), 1.0),
        (edge(&g, "z", "<->", "x"), 0.7),
        (edge(&g, "z", "<->", "y"), 0.9),
        (edge(&g, "t", "<->", "x"), 0.7),
        (edge(&g, "z", "<->", "t"), 1.0),
    ];
    ProbabilisticAdmg::new(g, probs.into_iter().collect()).unwrap()
}

pub fn edge(g: &Admg, a: &str, arrow: &str, b: &str) -> Edge {
    let (a, b) = (g.resolve(a).unwrap(), g.resolve(b).unwrap());
    match arrow {
        "->" => Edge::directed(a, b),
        "<->" => Edge::bidirected(a, b),
        other => panic!("bad arrow {other}"),
    }
}

pub fn set(g: &Admg, names: &[&str]) -> VertexSet {
    g.set_of(names).unwrap()
}

pub fn instance(pg: &ProbabilisticAdmg, objective: Objective, target: &[&str]) -> WeightedInstance {
    to_edge_id_weights(pg, objective, &set(&pg.graph, target)).unwrap()
}

/// Brute-force hedge test straight from the definition: some `X` strictly
/// containing a district `D` of `G[Y]` such that `G[X]` is bidirected-connected
/// and every vertex of `X` has a directed path to `D` inside `G[X]`.
/// Uses adjacency matrices only, independent of the library's set code.
pub fn has_hedge_brute_force(g: &Admg, target: &[usize]) -> bool {
    let n = g.n();
    assert!(n <= 12);
    let mut dir = vec![vec![false; n]; n];
    let mut bi = vec![vec![false; n]; n];
    for e in g.directed_edges() {
        let (a, b) = e.endpoints();
        dir[a.index()][b.index()] = true;
    }
    for e in g.bidirected_edges() {
        let (a, b) = e.endpoints();
        bi[a.index()][b.index()] = true;
        bi[b.index()][a.index()] = true;
    }
    let in_mask = |mask: u32, v: usize| mask >> v & 1 == 1;
    let connected_component = |mask: u32, start: usize| -> u32 {
        let mut seen = 1u32 << start;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if in_mask(mask, v) && !in_mask(seen, v) && bi[u][v] {
                    seen |= 1 << v;
                    stack.push(v);
                }
            }
        }
        seen
    };
    let y_mask: u32 = target.iter().map(|&v| 1u32 << v).sum();
    let mut districts = Vec::new();
    let mut left = y_mask;
    while left != 0 {
        let v = left.trailing_zeros() as usize;
        let comp = connected_component(y_mask, v);
        districts.push(comp);
        left &= !comp;
    }
    for d in districts {
        for x in 0u32..(1 << n) {
            if x & d != d || x == d {
                continue;
            }
            let start = d.trailing_zeros() as usize;
            if connected_component(x, start) != x {
                continue;
            }
            // Reverse reachability to d inside x.
            let mut anc = d;
            loop {
                let mut grew = false;
                for u in 0..n {
                    if in_mask(x, u)
                        && !in_mask(anc, u)
                        && (0..n).any(|v| in_mask(anc, v) && dir[u][v])
                    {
                        anc |= 1 << u;
                        grew = true;
                    }
                }
                if !grew {
                    break;
                }
            }
            if anc == x {
                return true;
            }
        }
    }
    false
}

/// Random graph over a random topological order with independent edges.
pub fn random_admg(rng: &mut ChaCha8Rng, n: usize, p_dir: f64, p_bi: f64) -> Admg {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut b = Admg::builder();
    for i in 0..n {
        b.vertex(&format!("v{i}"));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p_dir) {
                b.add_edge(Edge::directed(
                    VertexId(order[i] as u32),
                    VertexId(order[j] as u32),
                ))
                .unwrap();
            }
            if rng.gen_bool(p_bi) {
                b.add_edge(Edge::bidirected(VertexId(i as u32), VertexId(j as u32)))
                    .unwrap();
            }
        }
    }
    b.build().unwrap()
}

/// Random weights: mostly finite, some infinite, a few zero.
pub fn random_weights(rng: &mut ChaCha8Rng, g: &Admg, p_inf: f64) -> BTreeMap<Edge, Weight> {
    g.edges()
        .map(|e| {
            let w = if rng.gen_bool(p_inf) {
                Weight::INFINITE
            } else if rng.gen_bool(0.05) {
                Weight::ZERO
            } else {
                Weight::new((rng.gen_range(1..=40) as f64) / 8.0 + rng.gen_range(0.0..1e-3))
                    .unwrap()
            };
            (e, w)
        })
        .collect()
}

pub fn random_target(rng: &mut ChaCha8Rng, n: usize, max_size: usize) -> VertexSet {
    let k = rng.gen_range(1..=max_size.min(n));
    let mut ids: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        ids.swap(i, rng.gen_range(0..=i));
    }
    VertexSet::from_ids(n, ids[..k].iter().map(|&i| VertexId(i as u32)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
