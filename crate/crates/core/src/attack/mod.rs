//! Edge-flip attacks: the genetic-algorithm distance attack and the
//! heuristic baselines it is compared against.
//!
//! Attacks work on *chromosomes*, ordered lists of genes. A gene is one flip
//! whose shape depends on the [`AttackMode`]:
//!
//! | mode          | gene                                   |
//! |---------------|----------------------------------------|
//! | `add_only`    | a non-edge to add                      |
//! | `delete_only` | an edge to delete                      |
//! | `rewire`      | a (non-edge to add, edge to delete) pair |
//!
//! so a chromosome always has exactly `budget.count` genes, and converts to a
//! [`Perturbation`] with set semantics.

mod baselines;
mod ga;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NonEdgePool, Pair, Perturbation};

pub use baselines::{dba_attack, dice_attack, gda_attack, gda_candidates, ra_attack, GdaCandidate};
pub use ga::{eda_attack, AttackRecord, AttackResult, GaConfig, GenerationStats, TruncateBy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackMode {
    AddOnly,
    DeleteOnly,
    Rewire,
}

impl AttackMode {
    pub const ALL: [AttackMode; 3] = [AttackMode::AddOnly, AttackMode::DeleteOnly, AttackMode::Rewire];

    pub fn as_str(self) -> &'static str {
        match self {
            AttackMode::AddOnly => "add_only",
            AttackMode::DeleteOnly => "delete_only",
            AttackMode::Rewire => "rewire",
        }
    }

    fn adds(self) -> bool {
        self != AttackMode::DeleteOnly
    }

    fn deletes(self) -> bool {
        self != AttackMode::AddOnly
    }
}

impl fmt::Display for AttackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttackMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttackMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::validation(format!("unknown attack mode `{s}`")))
    }
}

/// How many links an attack may flip, and in which direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackBudget {
    pub mode: AttackMode,
    pub count: usize,
}

impl AttackBudget {
    pub fn new(mode: AttackMode, count: usize) -> Self {
        AttackBudget { mode, count }
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        if self.count == 0 {
            return Err(Error::validation("attack budget must be positive"));
        }
        let count = self.count as u64;
        let edges = g.edge_count() as u64;
        let non_edges = g.non_edge_count();
        let ok = match self.mode {
            AttackMode::AddOnly => count <= non_edges,
            AttackMode::DeleteOnly => count <= edges,
            AttackMode::Rewire => count <= edges.min(non_edges),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "{} budget of {} infeasible with |E| = {edges}, |Ē| = {non_edges}",
                self.mode, self.count
            )))
        }
    }
}

/// One flip. Exactly the halves the mode uses are set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gene {
    pub add: Option<Pair>,
    pub delete: Option<Pair>,
}

impl Gene {
    pub fn add(p: Pair) -> Self {
        Gene { add: Some(p), delete: None }
    }

    pub fn delete(p: Pair) -> Self {
        Gene { add: None, delete: Some(p) }
    }

    pub fn rewire(add: Pair, delete: Pair) -> Self {
        Gene {
            add: Some(add),
            delete: Some(delete),
        }
    }
}

/// Ordered genes of one candidate attack.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chromosome {
    pub mode: AttackMode,
    pub genes: Vec<Gene>,
}

impl Chromosome {
    pub fn new(mode: AttackMode, genes: Vec<Gene>) -> Self {
        Chromosome { mode, genes }
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn to_perturbation(&self) -> Perturbation {
        let adds: BTreeSet<Pair> = self.genes.iter().filter_map(|g| g.add).collect();
        let dels: BTreeSet<Pair> = self.genes.iter().filter_map(|g| g.delete).collect();
        Perturbation::from_sets(adds, dels)
    }

    /// Genes match the mode, halves are distinct across genes, additions are
    /// non-edges and deletions edges of `g`.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let mut adds = HashSet::new();
        let mut dels = HashSet::new();
        for gene in &self.genes {
            if gene.add.is_some() != self.mode.adds() || gene.delete.is_some() != self.mode.deletes() {
                return Err(Error::validation(format!("gene {gene:?} does not fit mode {}", self.mode)));
            }
            if let Some(p) = gene.add {
                if p.hi() >= g.node_count() || g.contains(p) || !adds.insert(p) {
                    return Err(Error::validation(format!("invalid or repeated addition {p}")));
                }
            }
            if let Some(p) = gene.delete {
                if !g.contains(p) || !dels.insert(p) {
                    return Err(Error::validation(format!("invalid or repeated deletion {p}")));
                }
            }
        }
        Ok(())
    }
}

/// Everything needed to draw valid genes for one graph and mode.
#[derive(Debug, Clone)]
pub struct GenePool<'g> {
    graph: &'g Graph,
    mode: AttackMode,
    edges: Vec<Pair>,
    non_edges: NonEdgePool,
}

impl<'g> GenePool<'g> {
    pub fn new(graph: &'g Graph, mode: AttackMode) -> Self {
        GenePool {
            graph,
            mode,
            edges: graph.edges().collect(),
            non_edges: NonEdgePool::new(graph),
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn mode(&self) -> AttackMode {
        self.mode
    }

    /// Longest chromosome with pairwise-distinct halves.
    pub fn capacity(&self) -> u64 {
        let e = self.edges.len() as u64;
        let ne = self.non_edges.len();
        match self.mode {
            AttackMode::AddOnly => ne,
            AttackMode::DeleteOnly => e,
            AttackMode::Rewire => e.min(ne),
        }
    }

    fn draw_add<R: Rng + ?Sized>(&self, rng: &mut R) -> Pair {
        self.non_edges.draw(self.graph, rng)
    }

    fn draw_delete<R: Rng + ?Sized>(&self, rng: &mut R) -> Pair {
        self.edges[rng.gen_range(0..self.edges.len())]
    }

    /// A uniformly drawn gene whose halves do not collide with `taken`.
    ///
    /// Rejection sampling; callers guarantee a free gene exists (the pool's
    /// capacity exceeds the number of taken genes).
    pub fn fresh_gene<R: Rng + ?Sized>(&self, taken: &[Gene], rng: &mut R) -> Gene {
        let used_adds: HashSet<Pair> = taken.iter().filter_map(|g| g.add).collect();
        let used_dels: HashSet<Pair> = taken.iter().filter_map(|g| g.delete).collect();
        let add = self.mode.adds().then(|| loop {
            let p = self.draw_add(rng);
            if !used_adds.contains(&p) {
                break p;
            }
        });
        let delete = self.mode.deletes().then(|| loop {
            let p = self.draw_delete(rng);
            if !used_dels.contains(&p) {
                break p;
            }
        });
        Gene { add, delete }
    }

    /// Uniform random chromosome of `count` genes with distinct halves.
    pub fn random_chromosome<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Chromosome> {
        AttackBudget::new(self.mode, count).validate(self.graph)?;
        let adds = if self.mode.adds() {
            self.graph.sample_non_edges(count, rng)?
        } else {
            Vec::new()
        };
        let dels = if self.mode.deletes() {
            self.graph.sample_edges(count, rng)?
        } else {
            Vec::new()
        };
        let genes = (0..count)
            .map(|i| Gene {
                add: adds.get(i).copied(),
                delete: dels.get(i).copied(),
            })
            .collect();
        Ok(Chromosome::new(self.mode, genes))
    }

    /// Replace genes whose halves repeat an earlier gene's halves.
    pub fn repair<R: Rng + ?Sized>(&self, c: &mut Chromosome, rng: &mut R) {
        let mut adds = HashSet::new();
        let mut dels = HashSet::new();
        for i in 0..c.genes.len() {
            let gene = c.genes[i];
            let clash = gene.add.is_some_and(|p| adds.contains(&p)) || gene.delete.is_some_and(|p| dels.contains(&p));
            if clash {
                let mut taken: Vec<Gene> = c.genes[..i].to_vec();
                taken.extend_from_slice(&c.genes[i + 1..]);
                c.genes[i] = self.fresh_gene(&taken, rng);
            }
            let gene = c.genes[i];
            adds.extend(gene.add);
            dels.extend(gene.delete);
        }
    }
}

/// Roulette-wheel selection: index `i` with probability `f_i / Σ f`, or
/// uniformly when every fitness is zero.
pub fn select_parent<R: Rng + ?Sized>(fitness: &[f64], rng: &mut R) -> usize {
    assert!(!fitness.is_empty(), "cannot select from an empty population");
    let total: f64 = fitness.iter().sum();
    if !(total > 0.0) {
        return rng.gen_range(0..fitness.len());
    }
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, &f) in fitness.iter().enumerate() {
        acc += f;
        if target < acc && f > 0.0 {
            return i;
        }
    }
    // rounding left `target` past the last bucket
    fitness.iter().rposition(|&f| f > 0.0).expect("positive total")
}

/// Exchange the gene tails of two chromosomes after position `cut`.
pub fn crossover_at(a: &Chromosome, b: &Chromosome, cut: usize) -> (Chromosome, Chromosome) {
    let mut x = a.clone();
    let mut y = b.clone();
    x.genes[cut..].copy_from_slice(&b.genes[cut..]);
    y.genes[cut..].copy_from_slice(&a.genes[cut..]);
    (x, y)
}

/// Single-point crossover with probability `p_c`. The cut is uniform in
/// `1..len`; chromosomes of one gene have no interior cut and pass through.
/// Children are repaired so every gene stays distinct.
pub fn crossover<R: Rng + ?Sized>(
    a: &Chromosome,
    b: &Chromosome,
    p_c: f64,
    pool: &GenePool<'_>,
    rng: &mut R,
) -> Result<(Chromosome, Chromosome)> {
    if a.len() != b.len() || a.mode != b.mode {
        return Err(Error::validation(format!(
            "crossover parents differ: {} {} genes vs {} {} genes",
            a.len(),
            a.mode,
            b.len(),
            b.mode
        )));
    }
    if a.len() < 2 || !(rng.gen::<f64>() < p_c) {
        return Ok((a.clone(), b.clone()));
    }
    let cut = rng.gen_range(1..a.len());
    let (mut x, mut y) = crossover_at(a, b, cut);
    pool.repair(&mut x, rng);
    pool.repair(&mut y, rng);
    Ok((x, y))
}

/// Replace each gene independently with probability `p_m` by a fresh gene
/// that does not collide with the remaining genes.
pub fn mutate<R: Rng + ?Sized>(x: &Chromosome, p_m: f64, pool: &GenePool<'_>, rng: &mut R) -> Chromosome {
    let mut out = x.clone();
    for i in 0..out.genes.len() {
        if rng.gen::<f64>() < p_m {
            let mut others = out.genes.clone();
            others.remove(i);
            out.genes[i] = pool.fresh_gene(&others, rng);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    fn path3() -> Graph {
        Graph::new(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn roulette_excludes_zero_fitness() {
        let mut rng = seed::rng(5);
        for _ in 0..1000 {
            assert_eq!(select_parent(&[1.0, 0.0], &mut rng), 0);
        }
    }

    #[test]
    fn crossover_single_gene_returns_parents() {
        let g = Graph::empty(10);
        let pool = GenePool::new(&g, AttackMode::AddOnly);
        let a = Chromosome::new(AttackMode::AddOnly, vec![Gene::add(Pair(2, 8))]);
        let b = Chromosome::new(AttackMode::AddOnly, vec![Gene::add(Pair(3, 7))]);
        let mut rng = seed::rng(0);
        let (x, y) = crossover(&a, &b, 1.0, &pool, &mut rng).unwrap();
        assert_eq!((x, y), (a, b));
    }

    #[test]
    fn crossover_exchanges_tails() {
        let a = Chromosome::new(AttackMode::AddOnly, vec![Gene::add(Pair(2, 8)), Gene::add(Pair(1, 5))]);
        let b = Chromosome::new(AttackMode::AddOnly, vec![Gene::add(Pair(3, 7)), Gene::add(Pair(1, 5))]);
        let (x, y) = crossover_at(&a, &b, 1);
        assert_eq!(x.genes, vec![Gene::add(Pair(2, 8)), Gene::add(Pair(1, 5))]);
        assert_eq!(y.genes, vec![Gene::add(Pair(3, 7)), Gene::add(Pair(1, 5))]);
        // the complementary cut swaps the heads
        let a = Chromosome::new(AttackMode::AddOnly, vec![Gene::add(Pair(1, 5)), Gene::add(Pair(2, 8))]);
        let b = Chromosome::new(AttackMode::AddOnly, vec![Gene::add(Pair(1, 5)), Gene::add(Pair(3, 7))]);
        let (x, y) = crossover_at(&a, &b, 1);
        assert_eq!(x.genes[1], Gene::add(Pair(3, 7)));
        assert_eq!(y.genes[1], Gene::add(Pair(2, 8)));
    }

    #[test]
    fn crossover_rejects_mismatched_parents() {
        let g = Graph::empty(10);
        let pool = GenePool::new(&g, AttackMode::AddOnly);
        let a = Chromosome::new(AttackMode::AddOnly, vec![Gene::add(Pair(2, 8))]);
        let b = Chromosome::new(AttackMode::AddOnly, vec![Gene::add(Pair(3, 7)), Gene::add(Pair(1, 2))]);
        assert!(crossover(&a, &b, 1.0, &pool, &mut seed::rng(0)).is_err());
    }

    #[test]
    fn zero_rates_are_identity() {
        let g = Graph::empty(10);
        let pool = GenePool::new(&g, AttackMode::AddOnly);
        let mut rng = seed::rng(1);
        let a = pool.random_chromosome(4, &mut rng).unwrap();
        let b = pool.random_chromosome(4, &mut rng).unwrap();
        for _ in 0..100 {
            assert_eq!(crossover(&a, &b, 0.0, &pool, &mut rng).unwrap(), (a.clone(), b.clone()));
            assert_eq!(mutate(&a, 0.0, &pool, &mut rng), a);
        }
    }

    #[test]
    fn forced_mutation_on_path() {
        let g = path3();
        let pool = GenePool::new(&g, AttackMode::AddOnly);
        let x = Chromosome::new(AttackMode::AddOnly, vec![Gene::add(Pair(0, 2))]);
        let y = mutate(&x, 1.0, &pool, &mut seed::rng(2));
        assert_eq!(y.genes, vec![Gene::add(Pair(0, 2))]);
    }

    #[test]
    fn repair_removes_duplicate_halves() {
        let g = Graph::new(6, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let pool = GenePool::new(&g, AttackMode::Rewire);
        let mut c = Chromosome::new(
            AttackMode::Rewire,
            vec![Gene::rewire(Pair(0, 5), Pair(0, 1)), Gene::rewire(Pair(1, 5), Pair(0, 1))],
        );
        pool.repair(&mut c, &mut seed::rng(3));
        c.validate(&g).unwrap();
        assert_eq!(c.genes[0], Gene::rewire(Pair(0, 5), Pair(0, 1)));
    }

    #[test]
    fn budget_validation() {
        let g = path3();
        assert!(AttackBudget::new(AttackMode::DeleteOnly, 2).validate(&g).is_ok());
        assert!(AttackBudget::new(AttackMode::Rewire, 2).validate(&g).is_err());
        assert!(AttackBudget::new(AttackMode::AddOnly, 0).validate(&g).is_err());
    }

    #[test]
    fn mode_parse_round_trip() {
        for m in AttackMode::ALL {
            assert_eq!(m.as_str().parse::<AttackMode>().unwrap(), m);
        }
    }
}
