mod common;

use common::*;
use hedgecut_core::{Admg, Edge, Error, VertexId, VertexSet};
use proptest::prelude::*;
use rand::Rng;

fn sorted(mut parts: Vec<VertexSet>) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = parts
        .drain(..)
        .map(|p| p.iter().map(|v| v.index()).collect())
        .collect();
    out.sort();
    out
}

fn graph(directed: &[(&str, &str)], bidirected: &[(&str, &str)]) -> Admg {
    let mut b = Admg::builder();
    for (s, d) in directed {
        b.vertex(s);
        b.vertex(d);
        b.directed(s, d).unwrap();
    }
    for (u, v) in bidirected {
        b.vertex(u);
        b.vertex(v);
        b.bidirected(u, v).unwrap();
    }
    b.build().unwrap()
}

fn position(order: &[VertexId], g: &Admg, name: &str) -> usize {
    let v = g.resolve(name).unwrap();
    order.iter().position(|&u| u == v).unwrap()
}

#[test]
fn builder_rejects_invalid_graphs() {
    let mut b = Admg::builder();
    b.add_vertex("a").unwrap();
    assert_eq!(b.add_vertex("a"), Err(Error::DuplicateVertex("a".into())));
    b.vertex("b");
    b.directed("a", "b").unwrap();
    assert!(matches!(b.directed("a", "b"), Err(Error::DuplicateEdge(_))));
    b.bidirected("a", "b").unwrap();
    assert!(matches!(
        b.bidirected("b", "a"),
        Err(Error::DuplicateEdge(_))
    ));
    assert!(matches!(b.directed("a", "a"), Err(Error::SelfLoop(_))));
    assert!(matches!(
        b.add_edge(Edge::directed(VertexId(0), VertexId(7))),
        Err(Error::UnknownVertex(_))
    ));
    b.directed("b", "a").unwrap();
    assert!(matches!(b.build(), Err(Error::CycleDetected(_))));
}

#[test]
fn bidirected_edges_ignore_endpoint_order() {
    let (a, b) = (VertexId(3), VertexId(1));
    assert_eq!(Edge::bidirected(a, b), Edge::bidirected(b, a));
    assert_ne!(Edge::directed(a, b), Edge::directed(b, a));
}

#[test]
fn topological_order_examples() {
    let chain = graph(&[("z", "x"), ("x", "y")], &[]);
    let names: Vec<&str> = chain
        .topological_order()
        .iter()
        .map(|&v| chain.name(v))
        .collect();
    assert_eq!(names, ["z", "x", "y"]);

    let g = running_example().graph;
    let order = g.topological_order();
    for (before, after) in [("z", "x"), ("t", "x"), ("x", "y")] {
        assert!(position(&order, &g, before) < position(&order, &g, after));
    }

    let flat = graph(&[], &[("c", "a"), ("b", "d")]);
    assert_eq!(
        flat.topological_order(),
        flat.vertices().collect::<Vec<_>>()
    );
}

#[test]
fn district_examples() {
    let g = running_example().graph;
    assert_eq!(g.districts(&g.full_set()).unwrap(), vec![g.full_set()]);

    let no_bi = graph(&[("a", "b"), ("b", "c")], &[]);
    assert_eq!(no_bi.districts(&no_bi.full_set()).unwrap().len(), 3);

    let removed = [edge(&g, "z", "<->", "x"), edge(&g, "t", "<->", "x")];
    let g2 = g.without_edges(&removed);
    assert_eq!(
        sorted(g2.districts(&g2.full_set()).unwrap()),
        sorted(vec![set(&g2, &["x"]), set(&g2, &["y", "z", "t"])])
    );
}

#[test]
fn districts_reject_foreign_sets() {
    let g = running_example().graph;
    let foreign = VertexSet::full(9);
    assert!(matches!(
        g.districts(&foreign),
        Err(Error::UnknownVertex(_))
    ));
}

#[test]
fn ancestor_examples() {
    let g = running_example().graph;
    assert_eq!(g.ancestors(&set(&g, &["y"])).unwrap(), g.full_set());
    assert_eq!(g.ancestors(&g.empty_set()).unwrap(), g.empty_set());
    assert_eq!(g.ancestors(&g.full_set()).unwrap(), g.full_set());
}

#[test]
fn hedge_hull_examples() {
    let g = running_example().graph;
    assert_eq!(
        g.hedge_hull(&set(&g, &["x"])).unwrap(),
        set(&g, &["x", "z", "t"])
    );
    assert_eq!(g.hedge_hull(&set(&g, &["y"])).unwrap(), g.full_set());

    let no_bi = graph(&[("a", "b"), ("b", "c")], &[]);
    assert_eq!(
        no_bi.hedge_hull(&set(&no_bi, &["c"])).unwrap(),
        set(&no_bi, &["c"])
    );
    assert!(matches!(
        no_bi.hedge_hull(&set(&no_bi, &["a", "c"])),
        Err(Error::NotADistrict)
    ));
}

#[test]
fn maximal_hedge_of_x_is_the_induced_subgraph_on_x_z_t() {
    let g = running_example().graph;
    let hedge = g.maximal_hedge(&set(&g, &["x"])).unwrap();
    let mut names = hedge.names().to_vec();
    names.sort();
    assert_eq!(names, ["t", "x", "z"]);
    let canonical = |h: &Admg| {
        let mut labels: Vec<String> = h
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
        labels.sort();
        labels
    };
    assert_eq!(
        canonical(&hedge),
        ["t->x", "t<->x", "t<->z", "x<->z", "z->x"]
    );
}

#[test]
fn maximal_hedge_collapses_without_bidirected_edges() {
    let g = graph(&[("a", "b"), ("b", "c"), ("a", "c")], &[]);
    let y = set(&g, &["b", "c"]);
    assert_eq!(g.maximal_hedge_vertices(&y).unwrap(), y);
    assert_eq!(g.maximal_hedge(&y).unwrap().n(), 2);
}

#[test]
fn identifiability_examples() {
    let pg = running_example();
    let g = &pg.graph;
    assert!(!g.is_identifiable(&set(g, &["y"])).unwrap());
    let g1 = g.without_edges(&[edge(g, "z", "<->", "y")]);
    assert!(g1.is_identifiable(&set(&g1, &["y"])).unwrap());
    assert_eq!(
        g1.maximal_hedge_vertices(&set(&g1, &["y"])).unwrap(),
        set(&g1, &["y"])
    );
    assert!(g.is_identifiable(&g.full_set()).unwrap());
    assert_eq!(g.is_identifiable(&g.empty_set()), Err(Error::EmptyTarget));
}

#[test]
fn general_query_examples() {
    let g = graph(&[("z", "t"), ("z", "y"), ("t", "y")], &[]);
    assert_eq!(
        g.general_query_to_qy(&g.empty_set(), &set(&g, &["y"]))
            .unwrap(),
        set(&g, &["z", "t", "y"])
    );
    assert_eq!(
        g.general_query_to_qy(&set(&g, &["z", "t"]), &set(&g, &["y"]))
            .unwrap(),
        set(&g, &["y"])
    );
    let chain = graph(&[("z", "x"), ("x", "y")], &[]);
    assert_eq!(
        chain
            .general_query_to_qy(&set(&chain, &["x"]), &set(&chain, &["y"]))
            .unwrap(),
        set(&chain, &["y"])
    );
    assert_eq!(
        chain.general_query_to_qy(&set(&chain, &["y"]), &set(&chain, &["y"])),
        Err(Error::OverlappingSets)
    );
}

fn arb_graph() -> impl Strategy<Value = (Admg, VertexSet)> {
    (2usize..=7, any::<u64>(), 0.1f64..0.7, 0.1f64..0.7).prop_map(|(n, seed, pd, pb)| {
        let mut r = rng(seed);
        let g = random_admg(&mut r, n, pd, pb);
        let y = random_target(&mut r, n, 3);
        (g, y)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn identifiability_matches_brute_force_hedge_search((g, y) in arb_graph()) {
        let ids: Vec<usize> = y.iter().map(|v| v.index()).collect();
        prop_assert_eq!(g.is_identifiable(&y).unwrap(), !has_hedge_brute_force(&g, &ids));
    }

    #[test]
    fn hulls_are_fixpoints_between_district_and_ancestors((g, y) in arb_graph()) {
        for d in g.districts(&y).unwrap() {
            let hull = g.hedge_hull(&d).unwrap();
            prop_assert!(d.is_subset(&hull));
            prop_assert!(hull.is_subset(&g.ancestors(&d).unwrap()));
            let (sub, old) = g.induced_subgraph(&hull);
            let local = VertexSet::from_ids(
                sub.n(),
                d.iter().map(|v| VertexId::from(old.iter().position(|&o| o == v).unwrap())),
            );
            let district = sub
                .districts(&sub.full_set())
                .unwrap()
                .into_iter()
                .find(|p| p.intersects(&local))
                .unwrap();
            prop_assert_eq!(district, sub.full_set());
            prop_assert_eq!(sub.ancestors(&local).unwrap(), sub.full_set());
        }
    }

    #[test]
    fn identifiability_survives_edge_deletion((g, y) in arb_graph(), seed in any::<u64>()) {
        prop_assume!(g.is_identifiable(&y).unwrap());
        let mut r = rng(seed);
        let removed: Vec<Edge> = g.edges().filter(|_| r.gen_bool(0.5)).collect();
        prop_assert!(g.without_edges(&removed).is_identifiable(&y).unwrap());
    }

    #[test]
    fn edges_outside_the_maximal_hedge_are_irrelevant((g, y) in arb_graph(), seed in any::<u64>()) {
        let hedge = g.maximal_hedge_vertices(&y).unwrap();
        let mut r = rng(seed);
        let outside: Vec<Edge> = g
            .edges()
            .filter(|e| {
                let (a, b) = e.endpoints();
                !(hedge.contains(a) && hedge.contains(b)) && r.gen_bool(0.7)
            })
            .collect();
        prop_assert_eq!(
            g.without_edges(&outside).is_identifiable(&y).unwrap(),
            g.is_identifiable(&y).unwrap()
        );
    }

    #[test]
    fn topological_order_respects_every_directed_edge((g, _) in arb_graph()) {
        let order = g.topological_order();
        let mut pos = vec![0; g.n()];
        for (i, v) in order.iter().enumerate() {
            pos[v.index()] = i;
        }
        for e in g.directed_edges() {
            let (a, b) = e.endpoints();
            prop_assert!(pos[a.index()] < pos[b.index()]);
        }
    }

    #[test]
    fn districts_partition_their_input((g, y) in arb_graph()) {
        let s = g.ancestors(&y).unwrap();
        let parts = g.districts(&s).unwrap();
        let mut union = g.empty_set();
        for p in &parts {
            prop_assert!(!p.intersects(&union));
            union.union_with(p);
        }
        prop_assert_eq!(union, s);
    }
}
