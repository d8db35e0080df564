use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{crossover, mutate, select_parent, AttackBudget, Chromosome, GenePool};
use crate::derive_seed;
use crate::embed::Embedder;
use crate::error::{Error, Result};
use crate::graph::{Graph, Pair, Perturbation};
use crate::objective::{distance_matrix, fitness_from_distances, DistanceMatrix};
use crate::seed;

/// How the merged elites + offspring set is cut back to `population`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncateBy {
    /// Keep the fittest.
    #[default]
    Fitness,
    /// Keep the elites, fill the rest with a uniform sample of offspring.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub iterations: usize,
    pub elites: usize,
    /// Offspring produced by crossover each generation.
    pub crossover_count: usize,
    /// Offspring produced by mutation each generation.
    pub mutation_count: usize,
    pub p_c: f64,
    pub p_m: f64,
    /// Re-embed elites every generation instead of carrying their fitness.
    pub reevaluate_elites: bool,
    pub truncate_by: TruncateBy,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 20,
            iterations: 1000,
            elites: 4,
            crossover_count: 16,
            mutation_count: 16,
            p_c: 0.6,
            p_m: 0.08,
            reevaluate_elites: false,
            truncate_by: TruncateBy::Fitness,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population == 0 {
            return Err(Error::validation("population must be positive"));
        }
        if self.elites > self.population {
            return Err(Error::validation("elites cannot exceed population"));
        }
        if self.elites + self.crossover_count + self.mutation_count < self.population {
            return Err(Error::validation(
                "elites + crossover_count + mutation_count must refill the population",
            ));
        }
        for (name, p) in [("p_c", self.p_c), ("p_m", self.p_m)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::validation(format!("{name} must lie in [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackResult {
    pub chromosome: Chromosome,
    pub perturbation: Perturbation,
    pub best_fitness: f64,
    /// Generation 0 is the initial population.
    pub history: Vec<GenerationStats>,
    /// Fitness evaluations performed; the reference embedding is not counted.
    pub evaluations: usize,
}

struct Individual {
    chromosome: Chromosome,
    fitness: f64,
}

/// Genetic-algorithm search for the perturbation whose embedding distance
/// structure correlates least with the unperturbed one.
///
/// The reference distance matrix comes from one embedding of `g` and is kept
/// for the whole run. Each generation keeps `elites` individuals with their
/// cached fitness, breeds `crossover_count` children from roulette-selected
/// parents and `mutation_count` mutants, embeds every new individual once,
/// and truncates the union back to `population`.
pub fn eda_attack<E: Embedder + ?Sized>(
    g: &Graph,
    budget: AttackBudget,
    ga: &GaConfig,
    embedder: &E,
    seed: u64,
) -> Result<AttackResult> {
    budget.validate(g)?;
    ga.validate()?;
    let pool = GenePool::new(g, budget.mode);
    let reference = distance_matrix(&embedder.embed(g, derive_seed!(seed, "reference"))?);

    let mut init_rng = seed::rng(derive_seed!(seed, "init"));
    let initial = (0..ga.population)
        .map(|_| pool.random_chromosome(budget.count, &mut init_rng))
        .collect::<Result<Vec<_>>>()?;
    let fitness = evaluate(g, &initial, &reference, embedder, |i| derive_seed!(seed, "fitness", 0usize, i))?;
    let mut evaluations = initial.len();
    let mut population: Vec<Individual> = initial
        .into_iter()
        .zip(fitness)
        .map(|(chromosome, fitness)| Individual { chromosome, fitness })
        .collect();

    let mut history = vec![stats(0, &population)];
    let top = fittest(&population);
    let mut best = (population[top].chromosome.clone(), population[top].fitness);
    let mut rng = seed::rng(derive_seed!(seed, "ga"));

    for generation in 1..=ga.iterations {
        let weights: Vec<f64> = population.iter().map(|x| x.fitness).collect();

        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| population[b].fitness.total_cmp(&population[a].fitness).then(a.cmp(&b)));
        let mut elites: Vec<Individual> = order[..ga.elites.min(order.len())]
            .iter()
            .map(|&i| Individual {
                chromosome: population[i].chromosome.clone(),
                fitness: population[i].fitness,
            })
            .collect();

        let mut offspring: Vec<Chromosome> = Vec::with_capacity(ga.crossover_count + ga.mutation_count);
        while offspring.len() < ga.crossover_count {
            let a = &population[select_parent(&weights, &mut rng)].chromosome;
            let b = &population[select_parent(&weights, &mut rng)].chromosome;
            let (x, y) = crossover(a, b, ga.p_c, &pool, &mut rng)?;
            offspring.push(x);
            if offspring.len() < ga.crossover_count {
                offspring.push(y);
            }
        }
        for _ in 0..ga.mutation_count {
            let parent = &population[select_parent(&weights, &mut rng)].chromosome;
            offspring.push(mutate(parent, ga.p_m, &pool, &mut rng));
        }
        debug_assert!(offspring.iter().all(|c| c.validate(g).is_ok()));

        let fitness = evaluate(g, &offspring, &reference, embedder, |i| {
            derive_seed!(seed, "fitness", generation, i)
        })?;
        evaluations += offspring.len();
        if ga.reevaluate_elites {
            let chromosomes: Vec<Chromosome> = elites.iter().map(|e| e.chromosome.clone()).collect();
            let fresh = evaluate(g, &chromosomes, &reference, embedder, |i| {
                derive_seed!(seed, "elite", generation, i)
            })?;
            evaluations += fresh.len();
            for (e, f) in elites.iter_mut().zip(fresh) {
                e.fitness = f;
            }
        }

        let mut children: Vec<Individual> = offspring
            .into_iter()
            .zip(fitness)
            .map(|(chromosome, fitness)| Individual { chromosome, fitness })
            .collect();
        population = match ga.truncate_by {
            TruncateBy::Fitness => {
                let mut merged = elites;
                merged.append(&mut children);
                // stable: elites win ties against offspring
                merged.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
                merged.truncate(ga.population);
                merged
            }
            TruncateBy::Random => {
                let mut merged = elites;
                children.shuffle(&mut rng);
                let room = ga.population.saturating_sub(merged.len());
                merged.extend(children.into_iter().take(room));
                merged
            }
        };

        let top = fittest(&population);
        if population[top].fitness > best.1 {
            best = (population[top].chromosome.clone(), population[top].fitness);
        }
        history.push(stats(generation, &population));
    }

    Ok(AttackResult {
        perturbation: best.0.to_perturbation(),
        chromosome: best.0,
        best_fitness: best.1,
        history,
        evaluations,
    })
}

fn evaluate<E, S>(
    g: &Graph,
    chromosomes: &[Chromosome],
    reference: &DistanceMatrix,
    embedder: &E,
    seed_of: S,
) -> Result<Vec<f64>>
where
    E: Embedder + ?Sized,
    S: Fn(usize) -> u64 + Sync,
{
    chromosomes
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let attacked = g.apply(&c.to_perturbation())?;
            let r = embedder.embed(&attacked, seed_of(i))?;
            fitness_from_distances(reference, &distance_matrix(&r))
        })
        .collect()
}

fn fittest(population: &[Individual]) -> usize {
    let mut best = 0;
    for (i, x) in population.iter().enumerate() {
        if x.fitness > population[best].fitness {
            best = i;
        }
    }
    best
}

fn stats(generation: usize, population: &[Individual]) -> GenerationStats {
    let best = population.iter().map(|x| x.fitness).fold(f64::NEG_INFINITY, f64::max);
    let mean = population.iter().map(|x| x.fitness).sum::<f64>() / population.len() as f64;
    GenerationStats {
        generation,
        best_fitness: best,
        mean_fitness: mean,
    }
}

/// Serializable summary of one attack run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackRecord {
    pub attack: String,
    pub mode: super::AttackMode,
    pub count: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_fitness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluations: Option<usize>,
    #[serde(default)]
    pub history: Vec<GenerationStats>,
    pub additions: Vec<Pair>,
    pub deletions: Vec<Pair>,
}

impl AttackRecord {
    pub fn new(attack: &str, budget: AttackBudget, seed: u64, perturbation: &Perturbation) -> Self {
        AttackRecord {
            attack: attack.to_owned(),
            mode: budget.mode,
            count: budget.count,
            seed,
            best_fitness: None,
            evaluations: None,
            history: Vec::new(),
            additions: perturbation.additions().iter().copied().collect(),
            deletions: perturbation.deletions().iter().copied().collect(),
        }
    }

    pub fn from_result(budget: AttackBudget, seed: u64, result: &AttackResult) -> Self {
        AttackRecord {
            best_fitness: Some(result.best_fitness),
            evaluations: Some(result.evaluations),
            history: result.history.clone(),
            ..AttackRecord::new("eda", budget, seed, &result.perturbation)
        }
    }

    pub fn perturbation(&self) -> Result<Perturbation> {
        Perturbation::new(
            self.additions.iter().map(|p| (p.0, p.1)),
            self.deletions.iter().map(|p| (p.0, p.1)),
        )
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::validation(format!("attack record: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::AttackMode;
    use crate::embed::EmbeddingMatrix;

    /// Places node `i` at `(i, degree(i))`: deterministic and sensitive to
    /// every flip.
    struct DegreeEmbedder;

    impl Embedder for DegreeEmbedder {
        fn embed(&self, g: &Graph, _seed: u64) -> Result<EmbeddingMatrix> {
            let rows: Vec<Vec<f64>> = (0..g.node_count()).map(|i| vec![i as f64, g.degree(i) as f64]).collect();
            EmbeddingMatrix::from_rows(&rows)
        }
    }

    #[test]
    fn delete_only_path_deletes_one_edge() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let ga = GaConfig {
            population: 2,
            elites: 1,
            iterations: 1,
            ..Default::default()
        };
        let r = eda_attack(&g, AttackBudget::new(AttackMode::DeleteOnly, 1), &ga, &DegreeEmbedder, 1).unwrap();
        assert!(r.perturbation.additions().is_empty());
        assert_eq!(r.perturbation.deletions().len(), 1);
        assert!(g.contains(*r.perturbation.deletions().iter().next().unwrap()));
    }

    #[test]
    fn zero_iterations_evaluates_initial_population_only() {
        let g = Graph::new(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
        let ga = GaConfig {
            population: 4,
            iterations: 0,
            ..Default::default()
        };
        let r = eda_attack(&g, AttackBudget::new(AttackMode::Rewire, 2), &ga, &DegreeEmbedder, 9).unwrap();
        assert_eq!(r.evaluations, 4);
        assert_eq!(r.history.len(), 1);
        assert_eq!(r.history[0].best_fitness, r.best_fitness);
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        assert!(GaConfig { elites: 21, ..Default::default() }.validate().is_err());
        assert!(GaConfig { p_m: 1.5, ..Default::default() }.validate().is_err());
        assert!(GaConfig {
            crossover_count: 0,
            mutation_count: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn record_json_round_trip() {
        let p = Perturbation::new([(4, 19)], [(23, 29)]).unwrap();
        let rec = AttackRecord::new("ra", AttackBudget::new(AttackMode::Rewire, 1), 7, &p);
        let back = AttackRecord::from_json(&rec.to_json()).unwrap();
        assert_eq!(back, rec);
        assert_eq!(back.perturbation().unwrap(), p);
    }
}
