use std::collections::{BTreeSet, HashSet};

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use super::{AttackBudget, AttackMode, Chromosome, Gene, GenePool};
use crate::derive_seed;
use crate::embed::Embedder;
use crate::error::{Error, Result};
use crate::graph::{pair_count, random_pair, Graph, Pair, Perturbation, ENUMERATION_LIMIT};
use crate::objective::{distance_matrix, fitness_from_distances};
use crate::partition::Partition;
use crate::seed;

/// Uniform random valid perturbation of exactly the budget.
pub fn ra_attack<R: Rng + ?Sized>(g: &Graph, budget: AttackBudget, rng: &mut R) -> Result<Perturbation> {
    let pool = GenePool::new(g, budget.mode);
    Ok(pool.random_chromosome(budget.count, rng)?.to_perturbation())
}

/// Deletes intra-community edges and adds inter-community non-edges, each
/// drawn uniformly. When a restricted pool runs dry the remainder comes from
/// the unrestricted pool.
pub fn dice_attack<R: Rng + ?Sized>(
    g: &Graph,
    budget: AttackBudget,
    labels: &Partition,
    rng: &mut R,
) -> Result<Perturbation> {
    budget.validate(g)?;
    if labels.len() != g.node_count() {
        return Err(Error::validation(format!(
            "{} labels for {} nodes",
            labels.len(),
            g.node_count()
        )));
    }
    let mut deletions = BTreeSet::new();
    if budget.mode.deletes() {
        let intra: Vec<Pair> = g.edges().filter(|p| labels.same_block(p.lo(), p.hi())).collect();
        let chosen = sample_up_to(&intra, budget.count, rng);
        deletions.extend(chosen);
        if deletions.len() < budget.count {
            let rest: Vec<Pair> = g.edges().filter(|p| !deletions.contains(p)).collect();
            let missing = budget.count - deletions.len();
            deletions.extend(sample_up_to(&rest, missing, rng));
        }
    }
    let mut additions = BTreeSet::new();
    if budget.mode.adds() {
        let inter = |p: &Pair| !labels.same_block(p.lo(), p.hi());
        if pair_count(g.node_count()) <= ENUMERATION_LIMIT {
            let non_edges = g.non_edges();
            let restricted: Vec<Pair> = non_edges.iter().copied().filter(inter).collect();
            additions.extend(sample_up_to(&restricted, budget.count, rng));
            if additions.len() < budget.count {
                let rest: Vec<Pair> = non_edges.into_iter().filter(|p| !additions.contains(p)).collect();
                let missing = budget.count - additions.len();
                additions.extend(sample_up_to(&rest, missing, rng));
            }
        } else {
            // large sparse graphs: almost every pair is a free inter pair
            let n = g.node_count();
            let mut attempts = 0usize;
            while additions.len() < budget.count && attempts < 1000 * budget.count {
                attempts += 1;
                let p = random_pair(n, rng);
                if !g.contains(p) && inter(&p) {
                    additions.insert(p);
                }
            }
            while additions.len() < budget.count {
                let p = random_pair(n, rng);
                if !g.contains(p) {
                    additions.insert(p);
                }
            }
        }
    }
    Ok(Perturbation::from_sets(additions, deletions))
}

fn sample_up_to<R: Rng + ?Sized>(pool: &[Pair], count: usize, rng: &mut R) -> Vec<Pair> {
    let k = count.min(pool.len());
    index::sample(rng, pool.len(), k).into_iter().map(|i| pool[i]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Add,
    Delete,
}

/// Degree-based heuristic. Each step works on the current (partially
/// attacked) graph: a delete step removes a uniform edge incident to a
/// maximum-degree node, an add step links a maximum-degree node to a
/// minimum-degree non-neighbour. Rewire alternates delete and add. A step
/// with no candidate falls back to a uniform valid flip.
pub fn dba_attack<R: Rng + ?Sized>(g: &Graph, budget: AttackBudget, rng: &mut R) -> Result<Perturbation> {
    budget.validate(g)?;
    let n = g.node_count();
    let mut adj: Vec<HashSet<usize>> = (0..n).map(|u| g.neighbors(u).iter().copied().collect()).collect();
    let mut additions = BTreeSet::new();
    let mut deletions = BTreeSet::new();
    let steps: Vec<Step> = match budget.mode {
        AttackMode::AddOnly => vec![Step::Add; budget.count],
        AttackMode::DeleteOnly => vec![Step::Delete; budget.count],
        AttackMode::Rewire => (0..budget.count).flat_map(|_| [Step::Delete, Step::Add]).collect(),
    };
    for step in steps {
        let max_degree = adj.iter().map(HashSet::len).max().unwrap_or(0);
        let hubs = (0..n).filter(|&u| adj[u].len() == max_degree);
        let pair = match step {
            Step::Delete => {
                // only original edges that are still present may go
                let deletable = |u: usize| -> Vec<Pair> {
                    let mut v: Vec<Pair> = adj[u]
                        .iter()
                        .map(|&w| Pair::new(u, w))
                        .filter(|p| g.contains(*p))
                        .collect();
                    v.sort();
                    v
                };
                let hubs: Vec<usize> = hubs.filter(|&u| !deletable(u).is_empty()).collect();
                if hubs.is_empty() {
                    let rest: Vec<Pair> = g.edges().filter(|p| !deletions.contains(p)).collect();
                    rest[rng.gen_range(0..rest.len())]
                } else {
                    let hub = hubs[rng.gen_range(0..hubs.len())];
                    let options = deletable(hub);
                    options[rng.gen_range(0..options.len())]
                }
            }
            Step::Add => {
                let addable = |u: usize| -> Vec<usize> {
                    let targets: Vec<usize> = (0..n)
                        .filter(|&w| w != u && !adj[u].contains(&w) && !g.has_edge(u, w))
                        .collect();
                    let low = targets.iter().map(|&w| adj[w].len()).min();
                    targets.into_iter().filter(|&w| Some(adj[w].len()) == low).collect()
                };
                let hubs: Vec<usize> = hubs.filter(|&u| !addable(u).is_empty()).collect();
                if hubs.is_empty() {
                    random_addition(g, &additions, rng)
                } else {
                    let hub = hubs[rng.gen_range(0..hubs.len())];
                    let options = addable(hub);
                    Pair::new(hub, options[rng.gen_range(0..options.len())])
                }
            }
        };
        match step {
            Step::Add => {
                additions.insert(pair);
                adj[pair.lo()].insert(pair.hi());
                adj[pair.hi()].insert(pair.lo());
            }
            Step::Delete => {
                deletions.insert(pair);
                adj[pair.lo()].remove(&pair.hi());
                adj[pair.hi()].remove(&pair.lo());
            }
        }
    }
    Ok(Perturbation::from_sets(additions, deletions))
}

fn random_addition<R: Rng + ?Sized>(g: &Graph, taken: &BTreeSet<Pair>, rng: &mut R) -> Pair {
    loop {
        let p = random_pair(g.node_count(), rng);
        if !g.contains(p) && !taken.contains(&p) {
            return p;
        }
    }
}

/// Single-flip candidates scored for the greedy attack, in sampling order.
#[derive(Debug, Clone, PartialEq)]
pub struct GdaCandidate {
    pub gene: Gene,
    pub fitness: f64,
}

/// Samples `m` distinct single-flip genes and scores each one on its own.
///
/// The reference embedding uses `derive_seed!(seed, "reference")`, candidate
/// `i` is embedded with `derive_seed!(seed, "gda", i)` and sampling draws
/// from `derive_seed!(seed, "candidates")`. `m` defaults to `20 * count`,
/// and any `m` is capped at the pool size.
pub fn gda_candidates<E: Embedder + ?Sized>(
    g: &Graph,
    budget: AttackBudget,
    embedder: &E,
    m: Option<usize>,
    seed: u64,
) -> Result<Vec<GdaCandidate>> {
    budget.validate(g)?;
    let pool = GenePool::new(g, budget.mode);
    let capacity = usize::try_from(pool.capacity()).unwrap_or(usize::MAX);
    let m = m.unwrap_or(budget.count.saturating_mul(20)).min(capacity);
    if m < budget.count {
        return Err(Error::validation(format!(
            "GDA needs at least {} candidates, got {m}",
            budget.count
        )));
    }
    let reference = distance_matrix(&embedder.embed(g, derive_seed!(seed, "reference"))?);
    let sampled = pool.random_chromosome(m, &mut seed::rng(derive_seed!(seed, "candidates")))?;
    sampled
        .genes
        .par_iter()
        .enumerate()
        .map(|(i, &gene)| {
            let single = Chromosome::new(budget.mode, vec![gene]).to_perturbation();
            let r = embedder.embed(&g.apply(&single)?, derive_seed!(seed, "gda", i))?;
            Ok(GdaCandidate {
                gene,
                fitness: fitness_from_distances(&reference, &distance_matrix(&r))?,
            })
        })
        .collect()
}

/// Greedy sampled attack: the `count` best single flips among `m` sampled
/// candidates, ties going to the earlier-sampled one.
pub fn gda_attack<E: Embedder + ?Sized>(
    g: &Graph,
    budget: AttackBudget,
    embedder: &E,
    m: Option<usize>,
    seed: u64,
) -> Result<Perturbation> {
    let mut candidates = gda_candidates(g, budget, embedder, m, seed)?;
    candidates.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
    let genes = candidates.into_iter().take(budget.count).map(|c| c.gene).collect();
    Ok(Chromosome::new(budget.mode, genes).to_perturbation())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star4() -> Graph {
        Graph::new(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap()
    }

    #[test]
    fn ra_exhaustive_delete() {
        let g = star4();
        let p = ra_attack(&g, AttackBudget::new(AttackMode::DeleteOnly, 4), &mut seed::rng(0)).unwrap();
        assert_eq!(p.deletions().len(), 4);
        assert!(g.apply(&p).unwrap().edge_count() == 0);
    }

    #[test]
    fn ra_rewire_on_path() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let p = ra_attack(&g, AttackBudget::new(AttackMode::Rewire, 1), &mut seed::rng(4)).unwrap();
        assert_eq!(p.additions().iter().copied().collect::<Vec<_>>(), vec![Pair(0, 2)]);
        assert_eq!(p.deletions().len(), 1);
    }

    #[test]
    fn dice_single_intra_edge() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let labels = Partition::from_ids([0, 0]);
        let p = dice_attack(&g, AttackBudget::new(AttackMode::DeleteOnly, 1), &labels, &mut seed::rng(0)).unwrap();
        assert!(p.deletions().contains(&Pair(0, 1)));
    }

    #[test]
    fn dice_falls_back_when_inter_pairs_exhausted() {
        // every inter pair is already an edge; only intra non-edges remain
        let g = Graph::new(4, [(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let labels = Partition::from_ids([0, 0, 1, 1]);
        let p = dice_attack(&g, AttackBudget::new(AttackMode::AddOnly, 2), &labels, &mut seed::rng(1)).unwrap();
        let got: Vec<Pair> = p.additions().iter().copied().collect();
        assert_eq!(got, vec![Pair(0, 1), Pair(2, 3)]);
    }

    #[test]
    fn dba_star_delete_touches_hub() {
        let g = star4();
        for s in 0..20 {
            let p = dba_attack(&g, AttackBudget::new(AttackMode::DeleteOnly, 1), &mut seed::rng(s)).unwrap();
            assert_eq!(p.deletions().iter().next().unwrap().lo(), 0);
        }
    }

    #[test]
    fn dba_star_add_reaches_isolated_node() {
        let g = Graph::new(6, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let p = dba_attack(&g, AttackBudget::new(AttackMode::AddOnly, 1), &mut seed::rng(0)).unwrap();
        assert_eq!(p.additions().iter().copied().collect::<Vec<_>>(), vec![Pair(0, 5)]);
    }

    #[test]
    fn dba_add_falls_back_on_complete_hub() {
        // hub adjacent to everyone, leaves tied at degree 1
        let g = star4();
        let p = dba_attack(&g, AttackBudget::new(AttackMode::AddOnly, 3), &mut seed::rng(2)).unwrap();
        p.validate(&g).unwrap();
        assert_eq!(p.additions().len(), 3);
    }

    #[test]
    fn dba_rewire_respects_budget() {
        let g = Graph::new(6, [(0, 1), (0, 2), (0, 3), (1, 2), (3, 4), (4, 5)]).unwrap();
        let p = dba_attack(&g, AttackBudget::new(AttackMode::Rewire, 3), &mut seed::rng(3)).unwrap();
        p.validate(&g).unwrap();
        assert_eq!((p.additions().len(), p.deletions().len()), (3, 3));
    }
}
