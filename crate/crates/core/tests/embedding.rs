use eda_core::bench::Dataset;
use eda_core::embed::{
    deepwalk, hope, random_walks, sgns_loss_and_grad, softmax_loss_and_grad, DeepWalkConfig, Embedder, HopeConfig,
};
use eda_core::error::Error;
use eda_core::graph::Graph;
use eda_core::objective::distance_matrix;
use eda_core::seed;
use nalgebra::DMatrix;
use rand::Rng;

fn two_triangles() -> Graph {
    Graph::new(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap()
}

#[test]
fn walk_examples() {
    let cfg = DeepWalkConfig {
        walks_per_node: 2,
        ..Default::default()
    };
    assert_eq!(random_walks(&Graph::empty(1), &cfg, 0), vec![vec![0], vec![0]]);

    let edge = Graph::new(2, [(0, 1)]).unwrap();
    let cfg = DeepWalkConfig {
        walks_per_node: 1,
        walk_length: 3,
        window: 1,
        ..Default::default()
    };
    assert_eq!(random_walks(&edge, &cfg, 9)[0], vec![0, 1, 0]);

    let karate = Dataset::karate().graph;
    let walks = random_walks(&karate, &DeepWalkConfig::default(), 1);
    assert_eq!(walks.len(), 340);
    for v in 0..34 {
        assert_eq!(walks.iter().filter(|w| w[0] == v).count(), 10);
    }
    for w in &walks {
        assert!(w.len() <= 40);
        assert!(w.windows(2).all(|s| karate.has_edge(s[0], s[1])));
    }
}

#[test]
fn deepwalk_is_deterministic_and_finite_on_karate() {
    let g = Dataset::karate().graph;
    let cfg = DeepWalkConfig::default();
    let a = deepwalk(&g, &cfg, 42).unwrap();
    let b = deepwalk(&g, &cfg, 42).unwrap();
    assert_eq!((a.rows(), a.dim()), (34, 16));
    assert!(a.is_finite());
    let bits = |m: &eda_core::embed::EmbeddingMatrix| m.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert_ne!(bits(&a), bits(&deepwalk(&g, &cfg, 43).unwrap()));
}

#[test]
fn disjoint_triangles_separate() {
    let g = two_triangles();
    let cfg = DeepWalkConfig {
        dim: 4,
        ..Default::default()
    };
    let tri = |v: usize| v / 3;
    let mut wins = 0;
    for s in 0..20 {
        let d = distance_matrix(&deepwalk(&g, &cfg, s).unwrap());
        let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0, 0.0, 0);
        for i in 0..6 {
            for j in i + 1..6 {
                if tri(i) == tri(j) {
                    intra += d.get(i, j);
                    ni += 1;
                } else {
                    inter += d.get(i, j);
                    nx += 1;
                }
            }
        }
        if intra / (ni as f64) < inter / (nx as f64) {
            wins += 1;
        }
    }
    assert!(wins >= 18, "intra < inter in only {wins} of 20 seeds");
}

#[test]
fn hope_examples() {
    let z = hope(&Graph::empty(5), 4, None).unwrap();
    assert!(z.as_slice().iter().all(|&x| x == 0.0));

    let edge = Graph::new(2, [(0, 1)]).unwrap();
    let m = hope(&edge, 2, Some(0.5)).unwrap();
    for k in 0..2 {
        assert!((m.row(0)[k] - m.row(1)[k]).abs() < 1e-6);
    }

    let k5 = Graph::new(5, (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j)))).unwrap();
    // rank 1 only: the remaining Katz eigenvalue of K5 is 4-fold degenerate,
    // so any deeper truncation picks an arbitrary basis of that eigenspace
    let m = hope(&k5, 2, None).unwrap();
    for i in 1..5 {
        for k in 0..2 {
            assert!((m.row(0)[k] - m.row(i)[k]).abs() < 1e-6);
        }
    }

    assert!(matches!(hope(&edge, 3, None), Err(Error::Validation(_))));
    // σ_max of a single edge is 1
    assert!(matches!(hope(&edge, 2, Some(1.0)), Err(Error::Convergence { .. })));
}

fn dense_katz(g: &Graph, beta: f64) -> DMatrix<f64> {
    let n = g.node_count();
    let a = DMatrix::from_fn(n, n, |i, j| if g.has_edge(i, j) { 1.0 } else { 0.0 });
    let lhs = DMatrix::<f64>::identity(n, n) - &a * beta;
    lhs.try_inverse().unwrap() * (&a * beta)
}

fn truncation_error(s: &DMatrix<f64>, rank: usize) -> f64 {
    let svd = s.clone().svd(true, true);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    // Eckart–Young: the residual of the best rank-k fit is the tail of the spectrum
    sv[rank..].iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn hope_rank_eight_reconstructs_better_than_rank_four() {
    let g = Dataset::karate().graph;
    let s = dense_katz(&g, 0.01);
    let e8 = truncation_error(&s, 8);
    let e4 = truncation_error(&s, 4);
    assert!(e8 < e4, "{e8} !< {e4}");

    // HOPE's own factors reproduce the rank-8 approximation: [U√Σ][V√Σ]ᵀ
    let m = hope(&g, 16, Some(0.01)).unwrap();
    let src = DMatrix::from_fn(34, 8, |i, k| m.row(i)[k]);
    let dst = DMatrix::from_fn(34, 8, |i, k| m.row(i)[8 + k]);
    let approx = &src * dst.transpose();
    assert!(((&s - approx).norm() - e8).abs() < 1e-9);
}

fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let h = 1e-6;
    (0..x.len())
        .map(|k| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[k] += h;
            down[k] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

fn assert_close(analytic: &[f64], numeric: &[f64]) {
    for (a, n) in analytic.iter().zip(numeric) {
        let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-8);
        assert!(rel <= 1e-4 || (a - n).abs() < 1e-9, "analytic {a} vs numeric {n}");
    }
}

fn random_rows(rows: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seed::rng(seed);
    (0..rows).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

#[test]
fn negative_sampling_gradient_matches_finite_differences() {
    // five nodes, dim 4: center 0, context 1, negatives 2..5
    let v = random_rows(5, 4, 11);
    let negs: Vec<&[f64]> = v[2..].iter().map(Vec::as_slice).collect();
    let grad = sgns_loss_and_grad(&v[0], &v[1], &negs);

    assert_close(&grad.center, &central_difference(|x| sgns_loss_and_grad(x, &v[1], &negs).loss, &v[0]));
    assert_close(&grad.context, &central_difference(|x| sgns_loss_and_grad(&v[0], x, &negs).loss, &v[1]));
    for k in 0..negs.len() {
        let f = |x: &[f64]| {
            let mut n = negs.clone();
            n[k] = x;
            sgns_loss_and_grad(&v[0], &v[1], &n).loss
        };
        assert_close(&grad.others[k], &central_difference(f, negs[k]));
    }
}

#[test]
fn softmax_gradient_matches_finite_differences() {
    let v = random_rows(6, 4, 12);
    let center = &v[5];
    let outputs: Vec<&[f64]> = v[..5].iter().map(Vec::as_slice).collect();
    let grad = softmax_loss_and_grad(center, &outputs, 2);
    assert_close(&grad.center, &central_difference(|x| softmax_loss_and_grad(x, &outputs, 2).loss, center));
    for k in 0..5 {
        let f = |x: &[f64]| {
            let mut o = outputs.clone();
            o[k] = x;
            softmax_loss_and_grad(center, &o, 2).loss
        };
        assert_close(&grad.others[k], &central_difference(f, outputs[k]));
    }
    assert_eq!(grad.context, grad.others[2]);
}

#[test]
fn embedders_stay_finite_on_disconnected_graphs() {
    let g = Graph::new(7, [(0, 1), (2, 3), (3, 4)]).unwrap();
    assert!(DeepWalkConfig::default().embed(&g, 5).unwrap().is_finite());
    assert!(HopeConfig::default().embed(&g, 5).unwrap().is_finite());
}
