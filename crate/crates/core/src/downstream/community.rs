use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;

/// Newman modularity `Q = Σ_c [L_c / m - (d_c / 2m)²]`.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64> {
    if p.len() != g.node_count() {
        return Err(Error::validation(format!("{} labels for {} nodes", p.len(), g.node_count())));
    }
    let m = g.edge_count() as f64;
    if m == 0.0 {
        return Err(Error::validation("modularity is undefined without edges"));
    }
    let mut inner = vec![0.0; p.num_blocks()];
    let mut degree = vec![0.0; p.num_blocks()];
    for e in g.edges() {
        if p.same_block(e.lo(), e.hi()) {
            inner[p.block_of(e.lo())] += 1.0;
        }
    }
    for u in 0..g.node_count() {
        degree[p.block_of(u)] += g.degree(u) as f64;
    }
    Ok(inner
        .iter()
        .zip(&degree)
        .map(|(l, d)| l / m - (d / (2.0 * m)).powi(2))
        .sum())
}

/// Neighbour labels that occur most often around `u`.
fn plurality(g: &Graph, labels: &[usize], u: usize, counts: &mut HashMap<usize, usize>) -> Vec<usize> {
    counts.clear();
    for &w in g.neighbors(u) {
        *counts.entry(labels[w]).or_insert(0) += 1;
    }
    let top = counts.values().copied().max().unwrap_or(0);
    let mut best: Vec<usize> = counts.iter().filter(|(_, &c)| c == top).map(|(&l, _)| l).collect();
    best.sort_unstable();
    best
}

/// Asynchronous label propagation. Every node starts with its own label;
/// each sweep visits nodes in a fresh random order and moves a node to a
/// plurality label of its neighbours unless it already holds one. Stops once
/// every node holds a plurality label, or after `max_iters` sweeps.
pub fn lpa<R: Rng + ?Sized>(g: &Graph, max_iters: usize, rng: &mut R) -> Partition {
    let n = g.node_count();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut counts = HashMap::new();
    for _ in 0..max_iters {
        order.shuffle(rng);
        for &u in &order {
            if g.degree(u) == 0 {
                continue;
            }
            let best = plurality(g, &labels, u, &mut counts);
            if !best.contains(&labels[u]) {
                labels[u] = best[rng.gen_range(0..best.len())];
            }
        }
        let settled = (0..n).all(|u| g.degree(u) == 0 || plurality(g, &labels, u, &mut counts).contains(&labels[u]));
        if settled {
            break;
        }
    }
    Partition::from_ids(labels)
}

/// True when every node already holds one of its plurality labels.
pub fn is_lpa_fixed_point(g: &Graph, p: &Partition) -> bool {
    let mut counts = HashMap::new();
    (0..g.node_count()).all(|u| g.degree(u) == 0 || plurality(g, p.assignment(), u, &mut counts).contains(&p.block_of(u)))
}

/// Spectral communities together with the modularity accumulated from the
/// accepted splits.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCommunities {
    pub partition: Partition,
    pub modularity: f64,
}

const SPLIT_GAIN: f64 = 1e-10;
const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 10_000;

/// Newman's leading-eigenvector method: groups are bisected recursively by
/// the sign pattern of the leading eigenvector of their generalized
/// modularity matrix, and a split is kept only when it raises `Q`.
pub fn em_communities(g: &Graph) -> Result<SpectralCommunities> {
    if g.edge_count() == 0 {
        return Err(Error::validation("spectral communities need at least one edge"));
    }
    let n = g.node_count();
    let two_m = 2.0 * g.edge_count() as f64;
    let k: Vec<f64> = (0..n).map(|u| g.degree(u) as f64).collect();
    let mut assignment = vec![0usize; n];
    let mut blocks = 1;
    let mut pending = vec![(0..n).collect::<Vec<usize>>()];
    let mut q = 0.0;
    while let Some(group) = pending.pop() {
        if group.len() < 2 {
            continue;
        }
        let b = generalized_modularity(g, &k, two_m, &group);
        let Some(s) = leading_signs(&b, group.len()) else {
            continue;
        };
        let gain = quadratic(&b, &s) / (2.0 * two_m);
        let positives = s.iter().filter(|&&x| x > 0.0).count();
        if gain <= SPLIT_GAIN || positives == 0 || positives == group.len() {
            continue;
        }
        q += gain;
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for (idx, &u) in group.iter().enumerate() {
            if s[idx] > 0.0 {
                left.push(u);
            } else {
                right.push(u);
            }
        }
        for &u in &right {
            assignment[u] = blocks;
        }
        blocks += 1;
        pending.push(right);
        pending.push(left);
    }
    Ok(SpectralCommunities {
        partition: Partition::from_ids(assignment),
        modularity: q,
    })
}

/// Dense `B^(g)_ij = B_ij - δ_ij Σ_{l ∈ g} B_il` restricted to `group`.
fn generalized_modularity(g: &Graph, k: &[f64], two_m: f64, group: &[usize]) -> Vec<f64> {
    let size = group.len();
    let mut pos = HashMap::with_capacity(size);
    for (i, &u) in group.iter().enumerate() {
        pos.insert(u, i);
    }
    let mut b = vec![0.0; size * size];
    for (i, &u) in group.iter().enumerate() {
        for (j, &v) in group.iter().enumerate() {
            b[i * size + j] = -k[u] * k[v] / two_m;
        }
        for w in g.neighbors(u) {
            if let Some(&j) = pos.get(w) {
                b[i * size + j] += 1.0;
            }
        }
    }
    for i in 0..size {
        let row: f64 = b[i * size..(i + 1) * size].iter().sum();
        b[i * size + i] -= row;
    }
    b
}

fn quadratic(b: &[f64], s: &[f64]) -> f64 {
    let n = s.len();
    (0..n).map(|i| s[i] * (0..n).map(|j| b[i * n + j] * s[j]).sum::<f64>()).sum()
}

/// Signs of the leading eigenvector, or `None` when the leading eigenvalue
/// is not positive. Power iteration on `B + cI` with `c` a Gershgorin bound,
/// started from a ramp with the uniform direction removed.
fn leading_signs(b: &[f64], n: usize) -> Option<Vec<f64>> {
    let shift = (0..n)
        .map(|i| b[i * n..(i + 1) * n].iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mean = (n as f64 + 1.0) / 2.0;
    let mut x: Vec<f64> = (0..n).map(|i| i as f64 + 1.0 - mean).collect();
    normalize(&mut x);
    let mut y = vec![0.0; n];
    for _ in 0..POWER_MAX_ITERS {
        for i in 0..n {
            y[i] = shift * x[i] + (0..n).map(|j| b[i * n + j] * x[j]).sum::<f64>();
        }
        normalize(&mut y);
        let delta = x.iter().zip(&y).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut y);
        if delta < POWER_TOL {
            break;
        }
    }
    let lambda = quadratic(b, &x);
    if lambda <= SPLIT_GAIN {
        return None;
    }
    Some(x.iter().map(|&v| if v > 0.0 { 1.0 } else { -1.0 }).collect())
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}
