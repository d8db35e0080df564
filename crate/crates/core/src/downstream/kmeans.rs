use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::embed::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::partition::Partition;

const MAX_LLOYD_ITERATIONS: usize = 300;

/// One Lloyd run: final assignment and the within-cluster sum of squares
/// after every assign/update round.
#[derive(Debug, Clone, PartialEq)]
pub struct KmeansRun {
    pub assignment: Vec<usize>,
    pub wcss: f64,
    pub history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_seeds<R: Rng + ?Sized>(r: &EmbeddingMatrix, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = r.rows();
    let mut centers = vec![r.row(rng.gen_range(0..n)).to_vec()];
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(r.row(i), &centers[0])).collect();
    while centers.len() < k {
        let pick = match WeightedIndex::new(&nearest) {
            Ok(w) => w.sample(rng),
            // every point coincides with a center already
            Err(_) => rng.gen_range(0..n),
        };
        let c = r.row(pick).to_vec();
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(r.row(i), &c));
        }
        centers.push(c);
    }
    centers
}

fn assign(r: &EmbeddingMatrix, centers: &[Vec<f64>], out: &mut [usize]) -> f64 {
    let mut total = 0.0;
    for (i, slot) in out.iter_mut().enumerate() {
        let (best, d) = centers
            .iter()
            .enumerate()
            .map(|(c, center)| (c, sq_dist(r.row(i), center)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        *slot = best;
        total += d;
    }
    total
}

/// A single k-means++ seeded Lloyd run.
pub fn kmeans_run<R: Rng + ?Sized>(r: &EmbeddingMatrix, k: usize, rng: &mut R) -> Result<KmeansRun> {
    let n = r.rows();
    if k == 0 || k > n {
        return Err(Error::validation(format!("k = {k} needs 1 ≤ k ≤ {n}")));
    }
    let dim = r.dim();
    let mut centers = plus_plus_seeds(r, k, rng);
    let mut assignment = vec![usize::MAX; n];
    let mut next = vec![0; n];
    let mut history = Vec::new();
    for _ in 0..MAX_LLOYD_ITERATIONS {
        assign(r, &centers, &mut next);
        let changed = next != assignment;
        assignment.copy_from_slice(&next);

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, &c) in assignment.iter().enumerate() {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(r.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        // an empty cluster takes over the point worst served by its center
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .filter(|&i| counts[assignment[i]] > 1)
                    .max_by(|&a, &b| {
                        sq_dist(r.row(a), &centers[assignment[a]])
                            .total_cmp(&sq_dist(r.row(b), &centers[assignment[b]]))
                            .then(b.cmp(&a))
                    });
                if let Some(i) = far {
                    counts[assignment[i]] -= 1;
                    assignment[i] = c;
                    counts[c] = 1;
                    centers[c] = r.row(i).to_vec();
                }
            }
        }
        history.push(wcss(r, &centers, &assignment));
        if !changed {
            break;
        }
    }
    let wcss = *history.last().expect("at least one round");
    Ok(KmeansRun {
        assignment,
        wcss,
        history,
    })
}

fn wcss(r: &EmbeddingMatrix, centers: &[Vec<f64>], assignment: &[usize]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &c)| sq_dist(r.row(i), &centers[c]))
        .sum()
}

/// Best of `restarts` k-means++ / Lloyd runs by within-cluster sum of
/// squares, relabelled to contiguous ids.
pub fn kmeans<R: Rng + ?Sized>(r: &EmbeddingMatrix, k: usize, restarts: usize, rng: &mut R) -> Result<Partition> {
    if restarts == 0 {
        return Err(Error::validation("k-means needs at least one restart"));
    }
    let mut best: Option<KmeansRun> = None;
    for _ in 0..restarts {
        let run = kmeans_run(r, k, rng)?;
        if best.as_ref().is_none_or(|b| run.wcss < b.wcss) {
            best = Some(run);
        }
    }
    Ok(Partition::from_ids(best.expect("restarts > 0").assignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    fn clouds() -> EmbeddingMatrix {
        let mut rows = Vec::new();
        for i in 0..10 {
            let e = 0.01 * i as f64;
            rows.push(vec![e, -e]);
            rows.push(vec![10.0 - e, 10.0 + e]);
        }
        EmbeddingMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn separates_clouds() {
        let p = kmeans(&clouds(), 2, 3, &mut seed::rng(0)).unwrap();
        for i in 0..10 {
            assert_eq!(p.block_of(2 * i), p.block_of(0));
            assert_eq!(p.block_of(2 * i + 1), p.block_of(1));
        }
        assert_ne!(p.block_of(0), p.block_of(1));
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let r = clouds();
        let run = kmeans_run(&r, r.rows(), &mut seed::rng(1)).unwrap();
        assert_eq!(run.wcss, 0.0);
        assert_eq!(Partition::from_ids(run.assignment).num_blocks(), r.rows());
    }

    #[test]
    fn rejects_bad_k() {
        let r = clouds();
        assert!(kmeans(&r, 21, 1, &mut seed::rng(0)).is_err());
        assert!(kmeans(&r, 0, 1, &mut seed::rng(0)).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let r = clouds();
        let a = kmeans(&r, 3, 2, &mut seed::rng(5)).unwrap();
        let b = kmeans(&r, 3, 2, &mut seed::rng(5)).unwrap();
        assert_eq!(a, b);
    }
}
