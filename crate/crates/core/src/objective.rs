//! The attack objective: embedding distance matrices, per-node Pearson
//! correlation between original and perturbed distance rows, and fitness.

use crate::embed::{Embedder, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::graph::{Graph, Perturbation};

/// Symmetric matrix of pairwise Euclidean distances between node vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Wraps an explicit matrix after checking symmetry, zero diagonal and
    /// non-negativity.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::validation("distance matrix must be square"));
        }
        for i in 0..n {
            if rows[i][i] != 0.0 {
                return Err(Error::validation(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                if rows[i][j] != rows[j][i] || !(rows[i][j] >= 0.0) {
                    return Err(Error::validation(format!("entry ({i}, {j}) breaks symmetry or sign")));
                }
            }
        }
        Ok(DistanceMatrix {
            n,
            values: rows.concat(),
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Distances from node `i` to every node, self included.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

/// `d_ij = ||r_i - r_j||_2`. Each unordered pair is computed once, so the
/// result is exactly symmetric.
pub fn distance_matrix(r: &EmbeddingMatrix) -> DistanceMatrix {
    let n = r.rows();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        let ri = r.row(i);
        for j in i + 1..n {
            let d = ri
                .iter()
                .zip(r.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    DistanceMatrix { n, values }
}

/// Pearson correlation of paired entries, skipping `exclude` in both
/// vectors. A constant side (zero variance) yields 0.
pub fn row_correlation(a: &[f64], b: &[f64], exclude: Option<usize>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let keep = |i: &usize| Some(*i) != exclude;
    let count = (0..a.len()).filter(keep).count();
    if count == 0 {
        return Ok(0.0);
    }
    let k = count as f64;
    let (mut ma, mut mb) = (0.0, 0.0);
    for i in (0..a.len()).filter(keep) {
        ma += a[i];
        mb += b[i];
    }
    ma /= k;
    mb /= k;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for i in (0..a.len()).filter(keep) {
        let (da, db) = (a[i] - ma, b[i] - mb);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    // rows whose spread is at rounding level count as constant
    let negligible = |ss: f64, v: &[f64]| {
        let scale = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        ss == 0.0 || ss <= (1e-12 * scale).powi(2) * k
    };
    if negligible(saa, a) || negligible(sbb, b) {
        return Ok(0.0);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// `φ = Σ_i |ρ(D_i, D̂_i)|`, each row correlated without its zero diagonal
/// entry.
pub fn phi(d: &DistanceMatrix, d_hat: &DistanceMatrix) -> Result<f64> {
    if d.size() != d_hat.size() {
        return Err(Error::validation(format!(
            "distance matrices differ in size: {} vs {}",
            d.size(),
            d_hat.size()
        )));
    }
    (0..d.size()).try_fold(0.0, |acc, i| {
        Ok(acc + row_correlation(d.row(i), d_hat.row(i), Some(i))?.abs())
    })
}

/// `1 - φ/|V|` from two distance matrices.
pub fn fitness_from_distances(d_ref: &DistanceMatrix, d_hat: &DistanceMatrix) -> Result<f64> {
    let n = d_ref.size();
    if n == 0 {
        return Err(Error::validation("empty distance matrix"));
    }
    Ok((1.0 - phi(d_ref, d_hat)? / n as f64).clamp(0.0, 1.0))
}

/// Fitness of a perturbation: embed `G` with `P` applied, and score how much
/// its distance structure departs from the reference.
pub fn fitness<E: Embedder + ?Sized>(
    g: &Graph,
    p: &Perturbation,
    d_ref: &DistanceMatrix,
    embedder: &E,
    seed: u64,
) -> Result<f64> {
    let attacked = g.apply(p)?;
    let r = embedder.embed(&attacked, seed)?;
    fitness_from_distances(d_ref, &distance_matrix(&r))
}
