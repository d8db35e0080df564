use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Dense LU solves up to this many nodes; Neumann iteration above.
const DENSE_SOLVE_LIMIT: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HopeConfig {
    /// Must be even: half the columns come from each singular-vector side.
    pub dim: usize,
    /// Katz decay. `None` selects `0.5 / σ_max(A)` per graph.
    pub beta: Option<f64>,
}

impl Default for HopeConfig {
    fn default() -> Self {
        HopeConfig { dim: 16, beta: None }
    }
}

/// Largest singular value of the adjacency matrix, by power iteration on
/// `A²` (tolerance 1e-8, at most 1000 iterations). For a symmetric matrix
/// this equals the spectral radius.
pub fn spectral_norm(g: &Graph) -> f64 {
    let n = g.node_count();
    if g.edge_count() == 0 {
        return 0.0;
    }
    // positive start vector has a component along the Perron vector
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) / (n as f64)).collect();
    normalize(&mut x);
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut estimate = 0.0;
    for _ in 0..1000 {
        adj_mul(g, &x, &mut y);
        adj_mul(g, &y, &mut z);
        let norm = normalize(&mut z);
        let next = norm.sqrt();
        std::mem::swap(&mut x, &mut z);
        if (next - estimate).abs() <= 1e-8 * next.max(1.0) {
            return next;
        }
        estimate = next;
    }
    estimate
}

fn adj_mul(g: &Graph, x: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = g.neighbors(i).iter().map(|&j| x[j]).sum();
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

/// Katz proximity `S = (I - βA)^{-1} βA`.
pub(crate) fn katz_matrix(g: &Graph, beta: f64) -> DMatrix<f64> {
    let n = g.node_count();
    let mut ba = DMatrix::<f64>::zeros(n, n);
    for p in g.edges() {
        ba[(p.lo(), p.hi())] = beta;
        ba[(p.hi(), p.lo())] = beta;
    }
    if n <= DENSE_SOLVE_LIMIT {
        let m = DMatrix::<f64>::identity(n, n) - &ba;
        m.lu().solve(&ba).expect("I - βA is nonsingular when β·σ_max < 1")
    } else {
        // S = βA + βA·S, iterated to a fixed point
        let mut s = ba.clone();
        for _ in 0..10_000 {
            let next = &ba + &ba * &s;
            let delta = (&next - &s).norm();
            s = next;
            if delta <= 1e-12 * s.norm().max(1.0) {
                break;
            }
        }
        s
    }
}

/// HOPE embedding with Katz proximity: the best rank-`dim/2` approximation
/// `S ≈ U Σ Vᵀ` gives node vectors `[U √Σ, V √Σ]`.
///
/// `beta` defaults to half the convergence limit `1/σ_max(A)`.
pub fn hope(g: &Graph, dim: usize, beta: Option<f64>) -> Result<EmbeddingMatrix> {
    if dim == 0 || dim % 2 == 1 {
        return Err(Error::validation(format!("HOPE dimension must be even and positive, got {dim}")));
    }
    let n = g.node_count();
    if n == 0 {
        return Err(Error::validation("cannot embed an empty graph"));
    }
    let sigma = spectral_norm(g);
    let limit = if sigma > 0.0 { 1.0 / sigma } else { f64::INFINITY };
    let beta = match beta {
        Some(b) if !(b > 0.0) => return Err(Error::validation("beta must be positive")),
        Some(b) if b >= limit => return Err(Error::Convergence { beta: b, limit }),
        Some(b) => b,
        None if sigma > 0.0 => 0.5 * limit,
        None => 0.5,
    };
    let half = dim / 2;
    let mut out = EmbeddingMatrix::zeros(n, dim);
    if g.edge_count() == 0 {
        return Ok(out);
    }
    let s = katz_matrix(g, beta);
    let svd = s.svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested Vᵀ");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    // nalgebra does not promise sorted singular values
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));
    for (col, &k) in order.iter().take(half).enumerate() {
        let scale = svd.singular_values[k].max(0.0).sqrt();
        for i in 0..n {
            let row = out.row_mut(i);
            row[col] = u[(i, k)] * scale;
            row[half + col] = vt[(k, i)] * scale;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_edge_graph_embeds_to_zero() {
        let m = hope(&Graph::empty(3), 4, None).unwrap();
        assert!(m.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_edge_rows_match() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let m = hope(&g, 2, Some(0.5)).unwrap();
        for k in 0..2 {
            assert!((m.row(0)[k] - m.row(1)[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn parameter_errors() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        assert!(matches!(hope(&g, 3, None), Err(Error::Validation(_))));
        assert!(matches!(hope(&g, 2, Some(1.0)), Err(Error::Convergence { .. })));
    }

    #[test]
    fn spectral_norm_of_star_and_path() {
        // star with 4 leaves: sqrt(4)
        let star = Graph::new(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert!((spectral_norm(&star) - 2.0).abs() < 1e-6);
        // path on 3 nodes: sqrt(2)
        let path = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!((spectral_norm(&path) - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn neumann_series_matches_lu() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let beta = 0.2;
        let lu = katz_matrix(&g, beta);
        let mut ba = DMatrix::<f64>::zeros(4, 4);
        for p in g.edges() {
            ba[(p.lo(), p.hi())] = beta;
            ba[(p.hi(), p.lo())] = beta;
        }
        let mut s = ba.clone();
        for _ in 0..200 {
            s = &ba + &ba * &s;
        }
        assert!((lu - s).norm() < 1e-12);
    }
}
