use std::collections::BTreeSet;

use eda_core::bench::Dataset;
use eda_core::error::Error;
use eda_core::graph::{Graph, Pair, Perturbation};
use eda_core::seed;
use num_bigint::BigUint;

const NONE: [(usize, usize); 0] = [];

fn karate() -> Graph {
    Dataset::karate().graph
}

#[test]
fn edge_list_examples() {
    let g = Graph::from_edge_list("0 1\n1 2").unwrap();
    assert_eq!(g.node_count(), 3);
    assert_eq!(g.edges().collect::<Vec<_>>(), vec![Pair(0, 1), Pair(1, 2)]);
    assert!(matches!(Graph::from_edge_list("0 0"), Err(Error::Validation(_))));
    match Graph::from_edge_list("# header\n0 1\n1 x\n") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected parse error, got {other:?}"),
    }
    // reversed duplicates collapse
    assert_eq!(Graph::from_edge_list("0 1\n1 0\n0 1\n").unwrap().edge_count(), 1);
}

#[test]
fn karate_shape_and_degrees() {
    let g = karate();
    assert_eq!((g.node_count(), g.edge_count()), (34, 78));
    assert_eq!((g.degree(33), g.degree(0)), (17, 16));
    g.check_consistency().unwrap();
}

#[test]
fn apply_examples() {
    let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
    let p = Perturbation::new([(0, 2)], [(0, 1)]).unwrap();
    let h = g.apply(&p).unwrap();
    assert_eq!(h.edges().collect::<Vec<_>>(), vec![Pair(0, 2), Pair(1, 2)]);
    assert_eq!(g.edge_count(), 2, "original untouched");
    assert_eq!(g.apply(&Perturbation::empty()).unwrap(), g);

    let k = karate();
    let p = Perturbation::new([(4, 19)], [(23, 29)]).unwrap();
    let h = k.apply(&p).unwrap();
    assert_eq!(h.edge_count(), 78);
    assert!(h.has_edge(19, 4) && !h.has_edge(23, 29));
}

#[test]
fn apply_rejects_invalid_perturbations() {
    let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
    for p in [
        Perturbation::new([(0, 1)], NONE).unwrap(),
        Perturbation::new(NONE, [(0, 2)]).unwrap(),
        Perturbation::new([(0, 7)], NONE).unwrap(),
    ] {
        assert!(matches!(g.apply(&p), Err(Error::Validation(_))), "{p:?}");
    }
    assert!(Perturbation::new([(0, 2)], [(2, 0)]).is_err(), "overlap");
    assert!(Perturbation::new([(1, 1)], NONE).is_err(), "self-loop");
}

#[test]
fn non_edge_sampling_examples() {
    let k3 = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
    assert!(matches!(k3.sample_non_edges(1, &mut seed::rng(0)), Err(Error::Capacity { .. })));
    let path = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
    assert_eq!(path.sample_non_edges(1, &mut seed::rng(0)).unwrap(), vec![Pair(0, 2)]);

    let g = karate();
    let all: BTreeSet<Pair> = g.sample_non_edges(483, &mut seed::rng(1)).unwrap().into_iter().collect();
    assert_eq!(all.len(), 483);
    assert!(all.iter().all(|p| !g.contains(*p)));
    assert_eq!(all, g.non_edges().into_iter().collect());
    assert!(g.sample_non_edges(484, &mut seed::rng(1)).is_err());
}

#[test]
fn rejection_path_on_a_large_sparse_graph() {
    // 2000 nodes exceed the enumeration limit
    let g = Graph::new(2000, (0..1999).map(|i| (i, i + 1))).unwrap();
    let s = g.sample_non_edges(500, &mut seed::rng(7)).unwrap();
    let distinct: BTreeSet<Pair> = s.iter().copied().collect();
    assert_eq!(distinct.len(), 500);
    assert!(s.iter().all(|p| !g.contains(*p)));
}

#[test]
fn search_space_examples() {
    assert_eq!(karate().search_space_size(1).unwrap(), BigUint::from(37_674u32));
    // C(78,4) · C(483,4), evaluated independently with exact integer arithmetic
    assert_eq!(karate().search_space_size(4).unwrap(), BigUint::from(3_194_612_472_051_000u64));
    let path = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
    assert_eq!(path.search_space_size(0).unwrap(), BigUint::from(1u32));
    assert_eq!(path.search_space_size(1).unwrap(), BigUint::from(2u32));
    assert!(matches!(path.search_space_size(2), Err(Error::Domain(_))));
}

#[test]
fn perturbation_text_round_trip() {
    let p = Perturbation::new([(4, 19), (0, 9)], [(23, 29)]).unwrap();
    let text = p.to_text();
    assert_eq!(Perturbation::from_text(&text).unwrap(), p);
    assert!(Perturbation::from_text("add 1\n").is_err());
}
