//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Every tolerance and sample size is a constant below.

#![allow(clippy::approx_constant)]

mod common;

use common::*;
use hedgecut_core::exact::{
    edge_id_exact, edge_id_exact_constrained, is_feasible, oracle_solve, Bounds, ExactSolver,
    ExclusionConstraint,
};
use hedgecut_core::harness::{
    generate_batch, generate_instance, plausibility_ratio, run_comparison, write_csv, Algorithm,
    GenConfig, RunConfig,
};
use hedgecut_core::heuristics::{best_heuristic, heid1, heid2};
use hedgecut_core::mcip::{
    constrained_pipeline, t1_mcip_to_edge_id, t2_edge_id_to_mcip, Layer, McipInstance,
};
use hedgecut_core::probmodel::{
    plausibility, score_solution, subgraph_probability, to_edge_id_weights, Objective, Weight,
    WeightedInstance,
};
use hedgecut_core::{Admg, Edge, Error, VertexId, VertexSet};
use rand::Rng;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

const PROB_TOL: f64 = 1e-9;
const EXAMPLE_RUNTIME: Duration = Duration::from_millis(1);
const ORACLE_INSTANCES: usize = 200;
const ORACLE_MAX_VERTICES: usize = 8;
const ORACLE_MAX_FINITE_EDGES: usize = 12;
const ORACLE_TOL: f64 = 1e-12;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const HEURISTIC_INSTANCES: u64 = 500;
const HEURISTIC_MAX_VERTICES: usize = 40;
const EXACT_DEADLINE: Duration = Duration::from_secs(10);
const EXAMPLE_COST_TOL: f64 = 1e-6;
const OPT_P1: f64 = 1.6946;
const OPT_P2: f64 = 2.3026;
const EXHAUSTIVE_VERTICES: usize = 4;
const T1_EDGE_LIMIT_AT_FIVE: u32 = 4;
const T2_EDGE_LIMIT_AT_FOUR: u32 = 6;
const T2_EDGE_LIMIT_AT_FIVE: u32 = 3;
const LARGER_SAMPLES: u64 = 200;
const SUBSETS_PER_SAMPLE: usize = 8;
const CONSTRAINED_INSTANCES: u64 = 100;
const CONSTRAINED_TOL: f64 = 1e-9;
const SCALE_VERTICES: usize = 250;
const SCALE_INSTANCES: u64 = 20;
const SCALE_LIMIT: Duration = Duration::from_secs(1);
const UB_INSTANCES: u64 = 200;
const UB_TOL: f64 = 1e-9;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn kept_without(g: &Admg, removed: &[Edge]) -> Vec<Edge> {
    g.edges().filter(|e| !removed.contains(e)).collect()
}

fn labels(g: &Admg, edges: &BTreeSet<Edge>) -> Vec<String> {
    edges.iter().map(|e| g.edge_label(e)).collect()
}

fn example_probabilities() -> Verdict {
    let pg = running_example();
    let g = &pg.graph;
    let g1 = kept_without(g, &[edge(g, "z", "<->", "y")]);
    let g2 = kept_without(g, &[edge(g, "z", "<->", "x"), edge(g, "t", "<->", "x")]);
    let eval = || -> hedgecut_core::Result<[f64; 4]> {
        Ok([
            subgraph_probability(&pg, &g1)?,
            subgraph_probability(&pg, &g2)?,
            plausibility(&pg, &g1)?,
            plausibility(&pg, &g2)?,
        ])
    };
    eval().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let got = eval().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let want = [0.049, 0.081, 0.1, 0.09];
    for (g, w) in got.iter().zip(want) {
        ensure(close(*g, w, PROB_TOL), || {
            format!("got {got:?}, want {want:?}")
        })?;
    }
    ensure(elapsed < EXAMPLE_RUNTIME, || format!("took {elapsed:?}"))?;
    Ok(format!("{got:?} in {elapsed:?}"))
}

fn objective_divergence() -> Verdict {
    let pg = running_example();
    let g = &pg.graph;
    let mut detail = Vec::new();
    for (objective, expect, score) in [
        (Objective::MostProbable, vec!["x<->t", "x<->z"], 0.081),
        (Objective::MostPlausible, vec!["y<->z"], 0.1),
    ] {
        let inst =
            to_edge_id_weights(&pg, objective, &set(g, &["y"])).map_err(|e| e.to_string())?;
        let exact =
            edge_id_exact(&inst, Weight::INFINITE, Weight::ZERO).map_err(|e| e.to_string())?;
        let oracle = oracle_solve(&inst).map_err(|e| e.to_string())?;
        let mut got = labels(g, &exact.removed);
        got.sort();
        ensure(got == expect, || format!("{objective:?}: removed {got:?}"))?;
        ensure(exact.removed == oracle.removed, || {
            format!("{objective:?}: oracle disagrees")
        })?;
        let s = score_solution(&pg, &exact.removed, objective).map_err(|e| e.to_string())?;
        ensure(close(s, score, PROB_TOL), || {
            format!("{objective:?}: score {s}")
        })?;
        detail.push(format!("{objective:?} removes {got:?} (score {s:.3})"));
    }
    Ok(detail.join("; "))
}

fn maximal_hedge_golden() -> Verdict {
    let g = running_example().graph;
    let hedge = g
        .maximal_hedge(&set(&g, &["x"]))
        .map_err(|e| e.to_string())?;
    let mut names = hedge.names().to_vec();
    names.sort();
    ensure(names == ["t", "x", "z"], || format!("vertices {names:?}"))?;
    let expected = g.induced_subgraph(&set(&g, &["x", "z", "t"])).0;
    let canon = |h: &Admg| {
        let mut out: Vec<String> = h
            .edges()
            .map(|e| {
                let (a, b) = e.endpoints();
                let (a, b) = (h.name(a), h.name(b));
                if e.is_directed() {
                    format!("{a}->{b}")
                } else {
                    format!("{}<->{}", a.min(b), a.max(b))
                }
            })
            .collect();
        out.sort();
        out
    };
    ensure(canon(&hedge) == canon(&expected), || {
        format!("edges {:?}", canon(&hedge))
    })?;
    Ok(format!("{:?}", canon(&hedge)))
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let mut checked = 0;
    let mut seed = 0u64;
    while checked < ORACLE_INSTANCES {
        seed += 1;
        let mut r = rng(seed);
        let n = r.gen_range(2..=ORACLE_MAX_VERTICES);
        let g = random_admg(&mut r, n, 0.4, 0.4);
        let y = random_target(&mut r, n, 3);
        let w = random_weights(&mut r, &g, 0.15);
        let inst = WeightedInstance::new(g, w, y).map_err(|e| e.to_string())?;
        if inst.finite_edges().len() > ORACLE_MAX_FINITE_EDGES {
            continue;
        }
        checked += 1;
        let exact =
            edge_id_exact(&inst, Weight::INFINITE, Weight::ZERO).map_err(|e| e.to_string())?;
        match oracle_solve(&inst) {
            Ok(o) => ensure(
                exact.identifiable && close(exact.cost.value(), o.cost.value(), ORACLE_TOL),
                || format!("seed {seed}: exact {} vs oracle {}", exact.cost, o.cost),
            )?,
            Err(Error::Infeasible) => ensure(!exact.identifiable, || {
                format!("seed {seed}: oracle infeasible")
            })?,
            Err(e) => return Err(format!("seed {seed}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < ORACLE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} instances in {elapsed:.2?}"))
}

fn heuristic_contract() -> Verdict {
    let mut compared = 0;
    let mut unfinished = 0;
    let mut no_output = [0usize; 2];
    for seed in 0..HEURISTIC_INSTANCES {
        let n = 5 + (seed as usize % (HEURISTIC_MAX_VERTICES - 4));
        let gen = generate_instance(&GenConfig::new(n, seed)).map_err(|e| e.to_string())?;
        let objective = if seed % 2 == 0 {
            Objective::MostProbable
        } else {
            Objective::MostPlausible
        };
        let inst =
            to_edge_id_weights(&gen.pg, objective, &gen.target).map_err(|e| e.to_string())?;
        ensure(is_feasible(&inst), || format!("{} is not feasible", gen.id))?;
        let exact = ExactSolver::new(&inst)
            .deadline(Some(Instant::now() + EXACT_DEADLINE))
            .solve()
            .map_err(|e| e.to_string())?;
        let exact_cost = (!exact.timed_out && exact.identifiable).then_some(exact.cost.value());
        if exact_cost.is_none() {
            unfinished += 1;
        } else {
            compared += 1;
        }
        for (k, h) in [heid1(&inst), heid2(&inst)].into_iter().enumerate() {
            match h {
                Ok(h) => {
                    let ok = inst
                        .graph
                        .without_edges(&h.solution.removed)
                        .is_identifiable(&inst.target)
                        .map_err(|e| e.to_string())?;
                    ensure(ok, || {
                        format!("{}: heid{} output not identifiable", gen.id, k + 1)
                    })?;
                    if let Some(c) = exact_cost {
                        ensure(h.solution.cost.value() >= c - UB_TOL, || {
                            format!(
                                "{}: heid{} {} below exact {c}",
                                gen.id,
                                k + 1,
                                h.solution.cost
                            )
                        })?;
                    }
                }
                Err(Error::Infeasible) => no_output[k] += 1,
                Err(e) => return Err(format!("{}: {e}", gen.id)),
            }
        }
    }
    let pg = running_example();
    let y = set(&pg.graph, &["y"]);
    let p1 = to_edge_id_weights(&pg, Objective::MostProbable, &y).map_err(|e| e.to_string())?;
    let p2 = to_edge_id_weights(&pg, Objective::MostPlausible, &y).map_err(|e| e.to_string())?;
    let h2 = heid2(&p1).map_err(|e| e.to_string())?.solution.cost.value();
    let h1 = heid1(&p2).map_err(|e| e.to_string())?.solution.cost.value();
    let opt1 = edge_id_exact(&p1, Weight::INFINITE, Weight::ZERO)
        .map_err(|e| e.to_string())?
        .cost
        .value();
    let opt2 = edge_id_exact(&p2, Weight::INFINITE, Weight::ZERO)
        .map_err(|e| e.to_string())?
        .cost
        .value();
    ensure(
        close(h2, OPT_P1, 1e-4) && close(h2, opt1, EXAMPLE_COST_TOL),
        || format!("heid2 on P1: {h2}"),
    )?;
    ensure(
        close(h1, OPT_P2, 1e-4) && close(h1, opt2, EXAMPLE_COST_TOL),
        || format!("heid1 on P2: {h1}"),
    )?;
    Ok(format!(
        "{HEURISTIC_INSTANCES} instances, {compared} compared with exact, {unfinished} exact past deadline, \
         no cut found: heid1 {} heid2 {}; example optima {h2:.4} / {h1:.4}",
        no_output[0], no_output[1]
    ))
}

/// Every ADMG on `n` vertices whose directed edges follow the order
/// 0, 1, ..., n-1 and that has at most `max_edges` edges. Up to relabelling
/// this covers every ADMG of that size.
fn canonical_graphs(n: usize, max_edges: u32) -> impl Iterator<Item = Admg> {
    let pairs: Vec<(u32, u32)> = (0..n as u32)
        .flat_map(|i| (i + 1..n as u32).map(move |j| (i, j)))
        .collect();
    let slots = 2 * pairs.len();
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    (0u64..1 << slots)
        .filter(move |m| m.count_ones() <= max_edges)
        .map(move |mask| {
            let edges = (0..slots).filter(|s| mask >> s & 1 == 1).map(|s| {
                let (a, b) = pairs[s % pairs.len()];
                if s < pairs.len() {
                    Edge::directed(VertexId(a), VertexId(b))
                } else {
                    Edge::bidirected(VertexId(a), VertexId(b))
                }
            });
            Admg::from_parts(names.clone(), edges.collect::<Vec<_>>())
                .expect("canonical graphs are acyclic")
        })
}

fn nonempty_subsets(n: usize) -> impl Iterator<Item = VertexSet> {
    (1u32..1 << n).map(move |m| {
        VertexSet::from_ids(
            n,
            (0..n)
                .filter(|i| m >> i & 1 == 1)
                .map(|i| VertexId(i as u32)),
        )
    })
}

/// Identifiability of `target` after deleting `gone` from `g`.
fn identifiable_without(g: &Admg, target: &VertexSet, gone: &BTreeSet<VertexId>) -> bool {
    let keep = VertexSet::from_ids(g.n(), g.vertices().filter(|v| !gone.contains(v)));
    let (sub, old) = g.induced_subgraph(&keep);
    let local = VertexSet::from_ids(
        sub.n(),
        old.iter()
            .enumerate()
            .filter(|(_, v)| target.contains(**v))
            .map(|(i, _)| VertexId(i as u32)),
    );
    sub.is_identifiable(&local)
        .expect("target survives deletion")
}

/// Checks the T1 equivalence for every intervention set in `choices`.
fn check_t1(g: &Admg, y: &VertexSet, choices: &[BTreeSet<VertexId>]) -> Result<usize, String> {
    let m = McipInstance::new(g.clone(), vec![Weight::new(1.0).unwrap(); g.n()], y.clone())
        .map_err(|e| e.to_string())?;
    let (image, split) = t1_mcip_to_edge_id(&m).map_err(|e| e.to_string())?;
    for x in choices {
        let direct = identifiable_without(g, y, x);
        let cut: Vec<Edge> = x.iter().map(|v| split[v]).collect();
        let via = image
            .graph
            .without_edges(&cut)
            .is_identifiable(&image.target)
            .map_err(|e| e.to_string())?;
        ensure(direct == via, || {
            format!(
                "T1 mismatch on {:?} with X = {x:?}",
                g.edges().collect::<Vec<_>>()
            )
        })?;
    }
    Ok(choices.len())
}

/// Checks the T2 equivalence for every edge deletion set in `choices`.
fn check_t2(g: &Admg, y: &VertexSet, choices: &[Vec<Edge>]) -> Result<usize, String> {
    let inst = WeightedInstance::new(
        g.clone(),
        g.edges().map(|e| (e, Weight::new(1.0).unwrap())).collect(),
        y.clone(),
    )
    .map_err(|e| e.to_string())?;
    let (m, map) = t2_edge_id_to_mcip(&inst).map_err(|e| e.to_string())?;
    for removed in choices {
        let direct = g
            .without_edges(removed)
            .is_identifiable(y)
            .map_err(|e| e.to_string())?;
        let reps: BTreeSet<VertexId> = removed.iter().map(|e| map.forward[e]).collect();
        let via = identifiable_without(&m.graph, &m.target, &reps);
        ensure(direct == via, || {
            format!(
                "T2 mismatch on {:?} removing {removed:?}",
                g.edges().collect::<Vec<_>>()
            )
        })?;
    }
    Ok(choices.len())
}

fn all_vertex_choices(g: &Admg, y: &VertexSet) -> Vec<BTreeSet<VertexId>> {
    let outside: Vec<VertexId> = g.vertices().filter(|v| !y.contains(*v)).collect();
    (0u32..1 << outside.len())
        .map(|m| {
            outside
                .iter()
                .enumerate()
                .filter(|(i, _)| m >> i & 1 == 1)
                .map(|(_, v)| *v)
                .collect()
        })
        .collect()
}

fn all_edge_choices(g: &Admg) -> Vec<Vec<Edge>> {
    let edges: Vec<Edge> = g.edges().collect();
    (0u32..1 << edges.len())
        .map(|m| {
            edges
                .iter()
                .enumerate()
                .filter(|(i, _)| m >> i & 1 == 1)
                .map(|(_, e)| *e)
                .collect()
        })
        .collect()
}

fn reduction_equivalences() -> Verdict {
    let mut t1_checks = 0;
    let mut t2_checks = 0;
    for n in 1..=EXHAUSTIVE_VERTICES + 1 {
        let t1_limit = if n <= EXHAUSTIVE_VERTICES {
            u32::MAX
        } else {
            T1_EDGE_LIMIT_AT_FIVE
        };
        let t2_limit = match n {
            n if n < EXHAUSTIVE_VERTICES => u32::MAX,
            n if n == EXHAUSTIVE_VERTICES => T2_EDGE_LIMIT_AT_FOUR,
            _ => T2_EDGE_LIMIT_AT_FIVE,
        };
        for g in canonical_graphs(n, t1_limit.max(t2_limit)) {
            let edges = g.n_edges() as u32;
            for y in nonempty_subsets(n) {
                if edges <= t1_limit {
                    t1_checks += check_t1(&g, &y, &all_vertex_choices(&g, &y))?;
                }
                if edges <= t2_limit {
                    t2_checks += check_t2(&g, &y, &all_edge_choices(&g))?;
                }
            }
        }
    }
    let mut sampled = 0;
    for seed in 0..LARGER_SAMPLES {
        let mut r = rng(seed.wrapping_mul(0x9e37_79b9));
        let n = r.gen_range(EXHAUSTIVE_VERTICES + 2..=9);
        let g = random_admg(&mut r, n, 0.35, 0.35);
        let y = random_target(&mut r, n, 3);
        let vertex_choices: Vec<BTreeSet<VertexId>> = (0..SUBSETS_PER_SAMPLE)
            .map(|_| {
                g.vertices()
                    .filter(|v| !y.contains(*v) && r.gen_bool(0.4))
                    .collect()
            })
            .collect();
        let edge_choices: Vec<Vec<Edge>> = (0..SUBSETS_PER_SAMPLE)
            .map(|_| g.edges().filter(|_| r.gen_bool(0.4)).collect())
            .collect();
        sampled += check_t1(&g, &y, &vertex_choices)? + check_t2(&g, &y, &edge_choices)?;
    }

    let b = {
        let mut b = Admg::builder();
        for v in ["x1", "x2", "y1", "y2"] {
            b.vertex(v);
        }
        b.directed("x2", "x1").map_err(|e| e.to_string())?;
        b.directed("x1", "y1").map_err(|e| e.to_string())?;
        b.bidirected("x1", "x2").map_err(|e| e.to_string())?;
        b.bidirected("x2", "y2").map_err(|e| e.to_string())?;
        b.bidirected("y1", "y2").map_err(|e| e.to_string())?;
        b.build().map_err(|e| e.to_string())?
    };
    let y = set(&b, &["y1", "y2"]);
    let inst = WeightedInstance::new(
        b.clone(),
        b.edges().map(|e| (e, Weight::new(1.0).unwrap())).collect(),
        y,
    )
    .map_err(|e| e.to_string())?;
    let (m, map) = t2_edge_id_to_mcip(&inst).map_err(|e| e.to_string())?;
    let mut target: Vec<&str> = m.target.iter().map(|v| m.graph.name(v)).collect();
    target.sort();
    ensure(m.graph.n() == 12, || {
        format!("T2 image has {} vertices", m.graph.n())
    })?;
    ensure(target == ["y1", "y2", "y2@12"], || {
        format!("T2 target {target:?}")
    })?;
    let bottom = map.layer.iter().filter(|l| **l == Layer::Bottom).count();
    Ok(format!(
        "T1 {t1_checks} and T2 {t2_checks} enumerated checks, {sampled} sampled checks; \
         two-target image has 12 vertices ({bottom} in the bottom layer), target {target:?}"
    ))
}

fn constraint_cross_validation() -> Verdict {
    let mut feasible = 0;
    let mut checked = 0;
    let mut seed = 0u64;
    while checked < CONSTRAINED_INSTANCES {
        seed += 1;
        let mut r = rng(seed ^ 0xc0ffee);
        let n = r.gen_range(3..=7);
        let g = random_admg(&mut r, n, 0.45, 0.45);
        if g.n_edges() == 0 {
            continue;
        }
        checked += 1;
        let y = random_target(&mut r, n, 2);
        let w = random_weights(&mut r, &g, 0.15);
        let inst = WeightedInstance::new(g.clone(), w, y).map_err(|e| e.to_string())?;
        let edges: Vec<Edge> = g.edges().collect();
        let constraints: Vec<ExclusionConstraint> = (0..r.gen_range(1..=3))
            .map(|_| {
                let k = r.gen_range(1..=edges.len().min(4));
                ExclusionConstraint::new((0..k).map(|_| edges[r.gen_range(0..edges.len())]))
                    .expect("non-empty")
            })
            .collect();
        let native = edge_id_exact_constrained(&inst, &constraints, Bounds::default());
        let pipeline = constrained_pipeline(&inst, &constraints);
        match (&native, &pipeline) {
            (Ok(a), Ok(b)) => {
                feasible += 1;
                ensure(
                    close(a.cost.value(), b.cost.value(), CONSTRAINED_TOL),
                    || format!("seed {seed}: native {} vs pipeline {}", a.cost, b.cost),
                )?
            }
            (Err(a), Err(b)) if a == b => {}
            _ => {
                return Err(format!(
                    "seed {seed}: native {:?} vs pipeline {:?}",
                    native.map(|s| s.cost),
                    pipeline.map(|s| s.cost)
                ))
            }
        }
    }
    Ok(format!(
        "{CONSTRAINED_INSTANCES} instances ({feasible} feasible) agree"
    ))
}

fn scale_behavior() -> Verdict {
    let mut slowest = Duration::ZERO;
    for seed in 0..SCALE_INSTANCES {
        let gen =
            generate_instance(&GenConfig::new(SCALE_VERTICES, seed)).map_err(|e| e.to_string())?;
        let inst = to_edge_id_weights(&gen.pg, Objective::MostProbable, &gen.target)
            .map_err(|e| e.to_string())?;
        for run in [heid1, heid2] {
            let start = Instant::now();
            let out = run(&inst);
            let t = start.elapsed();
            slowest = slowest.max(t);
            ensure(t < SCALE_LIMIT, || {
                format!("{}: heuristic took {t:?}", gen.id)
            })?;
            if let Ok(h) = out {
                ensure(h.solution.identifiable, || {
                    format!("{}: heuristic output not identifiable", gen.id)
                })?;
            }
        }
    }

    for seed in 0..UB_INSTANCES {
        let mut r = rng(seed ^ 0xb0b);
        let n = r.gen_range(2..=10);
        let g = random_admg(&mut r, n, 0.4, 0.4);
        let y = random_target(&mut r, n, 3);
        let w = random_weights(&mut r, &g, 0.1);
        let inst = WeightedInstance::new(g, w, y).map_err(|e| e.to_string())?;
        let free =
            edge_id_exact(&inst, Weight::INFINITE, Weight::ZERO).map_err(|e| e.to_string())?;
        let Ok(h) = best_heuristic(&inst) else {
            continue;
        };
        let bounded =
            edge_id_exact(&inst, h.solution.cost, Weight::ZERO).map_err(|e| e.to_string())?;
        let bounded_cost = if bounded.identifiable {
            bounded.cost
        } else {
            h.solution.cost
        };
        ensure(
            free.identifiable && bounded_cost.value() <= free.cost.value() + UB_TOL,
            || format!("seed {seed}: bounded {bounded_cost} vs free {}", free.cost),
        )?;
    }

    let mut cfg = GenConfig::new(10, 42);
    cfg.require_feasible = true;
    let csv_of = |jobs: usize| -> Result<Vec<u8>, String> {
        let instances = generate_batch(&cfg, 5).map_err(|e| e.to_string())?;
        let records = run_comparison(
            &instances,
            &Algorithm::ALL,
            &RunConfig {
                jobs,
                ..RunConfig::default()
            },
        );
        let mut out = Vec::new();
        write_csv(&records, &mut out, false).map_err(|e| e.to_string())?;
        Ok(out)
    };
    let first = csv_of(1)?;
    ensure(first == csv_of(1)? && first == csv_of(4)?, || {
        "benchmark CSV differs between runs".into()
    })?;
    Ok(format!(
        "slowest heuristic {slowest:.2?} at n = {SCALE_VERTICES}; upper bound never worse over {UB_INSTANCES} instances; \
         CSV stable ({} bytes)",
        first.len()
    ))
}

fn ratio_semantics() -> Verdict {
    let pg = running_example();
    let g = &pg.graph;
    let identifiable = hedgecut_core::ProbabilisticAdmg::new(
        g.without_edges(&[edge(g, "z", "<->", "y")]),
        g.edges()
            .filter(|e| *e != edge(g, "z", "<->", "y"))
            .map(|e| (e, pg.prob(&e).unwrap()))
            .collect(),
    )
    .map_err(|e| e.to_string())?;
    let inst = to_edge_id_weights(
        &identifiable,
        Objective::MostProbable,
        &set(&identifiable.graph, &["y"]),
    )
    .map_err(|e| e.to_string())?;
    let sol = edge_id_exact(&inst, Weight::INFINITE, Weight::ZERO).map_err(|e| e.to_string())?;
    ensure(sol.removed.is_empty() && sol.cost == Weight::ZERO, || {
        "expected an empty removal".into()
    })?;
    let empty = plausibility_ratio(&identifiable, &sol).map_err(|e| e.to_string())?;
    ensure(empty == 1.0, || format!("empty removal ratio {empty}"))?;

    let y = set(g, &["y"]);
    let full = to_edge_id_weights(&pg, Objective::MostPlausible, &y).map_err(|e| e.to_string())?;
    let sol = edge_id_exact(&full, Weight::INFINITE, Weight::ZERO).map_err(|e| e.to_string())?;
    let ratio = plausibility_ratio(&pg, &sol).map_err(|e| e.to_string())?;
    ensure(!sol.removed.is_empty() && ratio < 1.0, || {
        format!("non-empty removal ratio {ratio}")
    })?;
    Ok(format!(
        "empty removal: cost 0, ratio {empty}; running example: ratio {ratio:.4}"
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "example subgraph probabilities and plausibilities",
            example_probabilities,
        ),
        (
            "objectives pick different optimal subgraphs",
            objective_divergence,
        ),
        ("maximal hedge golden graph", maximal_hedge_golden),
        (
            "exact solver matches the brute-force oracle",
            oracle_equivalence,
        ),
        (
            "heuristic outputs are valid and never beat exact",
            heuristic_contract,
        ),
        (
            "reductions preserve identifiability",
            reduction_equivalences,
        ),
        (
            "constrained solver agrees with the gadget pipeline",
            constraint_cross_validation,
        ),
        ("scale, upper bound and benchmark stability", scale_behavior),
        ("plausibility ratio of an empty removal", ratio_semantics),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = check();
        let t = start.elapsed();
        match verdict {
            Ok(detail) => println!("PASS {} {name} [{t:.2?}]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name} [{t:.2?}]: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
