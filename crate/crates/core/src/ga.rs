//! Two-level genetic algorithm.
//!
//! Level one is a bit per equipment candidate (PDO placed or not); level two
//! maps every client to its PDO. Variation only touches level one; level two
//! is rebuilt by [`repair`] before every evaluation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{allocate, local_search};
use crate::error::{Error, Result};
use crate::fitness::{evaluate, CostBreakdown};
use crate::instance::Instance;
use crate::model::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Genotype {
    /// One bit per candidate slot.
    pub pdo_mask: Vec<bool>,
    /// Per client slot, the serving PDO's node id.
    pub assignment: Vec<Option<NodeId>>,
    /// Set by variation operators; cleared by [`repair`].
    pub stale: bool,
}

impl Genotype {
    /// A genotype whose assignment still has to be built.
    pub fn from_mask(pdo_mask: Vec<bool>) -> Self {
        Self { pdo_mask, assignment: Vec::new(), stale: true }
    }

    pub fn active_slots(&self) -> impl Iterator<Item = usize> + '_ {
        self.pdo_mask.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)
    }

    pub fn active_count(&self) -> usize {
        self.pdo_mask.iter().filter(|b| **b).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    /// Per-bit flip probability; `None` means 2 / mask length.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutation_rate: Option<f64>,
    /// Probability that a parent pair is recombined at all.
    pub crossover_rate: f64,
    /// Per-bit swap probability inside uniform crossover.
    pub crossover_gene_prob: f64,
    pub tournament_size: usize,
    pub elitism_fraction: f64,
    pub rng_seed: u64,
    /// Probability of each bit being set in the initial population.
    pub init_density: f64,
    /// Run the swap search after allocation when some client misses its nearest PDO.
    pub local_search: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            generations: 100,
            mutation_rate: None,
            crossover_rate: 0.85,
            crossover_gene_prob: 0.5,
            tournament_size: 5,
            elitism_fraction: 0.10,
            rng_seed: 42,
            init_density: 0.5,
            local_search: true,
        }
    }
}

impl GaConfig {
    pub(crate) fn validate_fixed(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::Config(format!("population_size must be >= 2, got {}", self.population_size)));
        }
        if self.tournament_size < 1 || self.tournament_size > self.population_size {
            return Err(Error::Config(format!(
                "tournament_size must be in 1..={}, got {}",
                self.population_size, self.tournament_size
            )));
        }
        let probs = [
            ("crossover_rate", Some(self.crossover_rate)),
            ("crossover_gene_prob", Some(self.crossover_gene_prob)),
            ("init_density", Some(self.init_density)),
            ("mutation_rate", self.mutation_rate),
        ];
        for (name, p) in probs {
            if let Some(p) = p {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Config(format!("{name} must be in [0, 1], got {p}")));
                }
            }
        }
        if !(0.0..1.0).contains(&self.elitism_fraction) {
            return Err(Error::Config(format!("elitism_fraction must be in [0, 1), got {}", self.elitism_fraction)));
        }
        Ok(())
    }

    pub fn mutation_rate_for(&self, mask_len: usize) -> f64 {
        match self.mutation_rate {
            Some(r) => r,
            None if mask_len == 0 => 0.0,
            None => (2.0 / mask_len as f64).min(1.0),
        }
    }

    pub fn elite_count(&self) -> usize {
        if self.elitism_fraction <= 0.0 {
            return 0;
        }
        ((self.elitism_fraction * self.population_size as f64).round() as usize).clamp(1, self.population_size - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genotype: Genotype,
    pub cost: CostBreakdown,
    pub feasible: bool,
}

impl Individual {
    pub fn fitness(&self) -> f64 {
        self.cost.fitness
    }
}

/// Rebuilds the assignment from scratch against the current mask.
pub fn repair(genotype: Genotype, inst: &Instance) -> Genotype {
    repair_with(genotype, inst, true)
}

pub fn repair_with(mut genotype: Genotype, inst: &Instance, with_local_search: bool) -> Genotype {
    let mask = &genotype.pdo_mask;
    let mut alloc = allocate(mask, inst);
    if with_local_search && !alloc.misplaced.is_empty() {
        local_search(&mut alloc.assignment, &alloc.misplaced, mask, inst);
    }
    genotype.assignment = alloc.assignment.iter().map(|a| a.map(|s| inst.map.candidate(s).id)).collect();
    genotype.stale = false;
    genotype
}

pub fn bitflip_mutation(genotype: &mut Genotype, rate: f64, rng: &mut impl Rng) {
    let mut flipped = false;
    for bit in genotype.pdo_mask.iter_mut() {
        if rate > 0.0 && rng.gen_bool(rate) {
            *bit = !*bit;
            flipped = true;
        }
    }
    genotype.stale |= flipped;
}

/// Swaps each mask position between the two children with probability `gene_prob`.
pub fn uniform_crossover(
    a: &Genotype,
    b: &Genotype,
    gene_prob: f64,
    rng: &mut impl Rng,
) -> Result<(Genotype, Genotype)> {
    if a.pdo_mask.len() != b.pdo_mask.len() {
        return Err(Error::Argument(format!(
            "parent mask lengths differ: {} vs {}",
            a.pdo_mask.len(),
            b.pdo_mask.len()
        )));
    }
    let mut x = a.clone();
    let mut y = b.clone();
    let mut swapped = false;
    for i in 0..x.pdo_mask.len() {
        if gene_prob > 0.0 && rng.gen_bool(gene_prob) {
            std::mem::swap(&mut x.pdo_mask[i], &mut y.pdo_mask[i]);
            swapped |= x.pdo_mask[i] != y.pdo_mask[i];
        }
    }
    x.stale |= swapped;
    y.stale |= swapped;
    Ok((x, y))
}

/// Best of `k` uniform draws (with replacement). Ties go to the earlier draw.
pub fn tournament_select<'a>(population: &'a [Individual], k: usize, rng: &mut impl Rng) -> Result<&'a Individual> {
    if population.is_empty() {
        return Err(Error::State("tournament on an empty population".into()));
    }
    let mut best = &population[rng.gen_range(0..population.len())];
    for _ in 1..k {
        let other = &population[rng.gen_range(0..population.len())];
        if other.fitness() < best.fitness() {
            best = other;
        }
    }
    Ok(best)
}

pub fn init_population(inst: &Instance, config: &GaConfig, rng: &mut impl Rng) -> Result<Vec<Individual>> {
    config.validate_fixed()?;
    let n = inst.map.candidate_count();
    let masks: Vec<Vec<bool>> =
        (0..config.population_size).map(|_| (0..n).map(|_| rng.gen_bool(config.init_density)).collect()).collect();
    masks
        .into_par_iter()
        .map(|m| evaluate(repair_with(Genotype::from_mask(m), inst, config.local_search), inst))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Best fitness seen so far.
    pub best: f64,
    /// Mean fitness of the current population.
    pub mean: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunStats {
    /// Generation 0 is the initial population.
    pub trace: Vec<GenerationRecord>,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub best: Individual,
    pub stats: RunStats,
}

fn record(generation: usize, best: &Individual, population: &[Individual]) -> GenerationRecord {
    let mean = population.iter().map(Individual::fitness).sum::<f64>() / population.len() as f64;
    GenerationRecord { generation, best: best.fitness(), mean }
}

fn sort_by_fitness(population: &mut [Individual]) {
    population.sort_by(|a, b| a.fitness().total_cmp(&b.fitness()));
}

/// Runs the generational loop: elites carried over unchanged, the remainder
/// filled by tournament-selected, recombined, mutated and repaired offspring.
///
/// Each offspring pair draws from its own RNG stream seeded from the master
/// stream, so results do not depend on how evaluation is scheduled.
pub fn evolve(inst: &Instance, config: &GaConfig) -> Result<Evolution> {
    config.validate_fixed()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut population = init_population(inst, config, &mut rng)?;
    sort_by_fitness(&mut population);
    let mut best = population[0].clone();
    let mut stats = RunStats { trace: vec![record(0, &best, &population)], evaluations: population.len() };

    let rate = config.mutation_rate_for(inst.map.candidate_count());
    let elites = config.elite_count();
    let offspring_needed = config.population_size - elites;
    for generation in 1..=config.generations {
        let seeds: Vec<u64> = (0..offspring_needed.div_ceil(2)).map(|_| rng.gen()).collect();
        let parents = &population;
        let offspring: Vec<Individual> = seeds
            .into_par_iter()
            .map(|seed| -> Result<[Individual; 2]> {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = tournament_select(parents, config.tournament_size, &mut rng)?;
                let b = tournament_select(parents, config.tournament_size, &mut rng)?;
                let (mut x, mut y) = if rng.gen_bool(config.crossover_rate) {
                    uniform_crossover(&a.genotype, &b.genotype, config.crossover_gene_prob, &mut rng)?
                } else {
                    (a.genotype.clone(), b.genotype.clone())
                };
                bitflip_mutation(&mut x, rate, &mut rng);
                bitflip_mutation(&mut y, rate, &mut rng);
                let x = evaluate(repair_with(x, inst, config.local_search), inst)?;
                let y = evaluate(repair_with(y, inst, config.local_search), inst)?;
                Ok([x, y])
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .take(offspring_needed)
            .collect();
        stats.evaluations += offspring.len();

        let mut next: Vec<Individual> = population.drain(..elites).collect();
        next.extend(offspring);
        sort_by_fitness(&mut next);
        population = next;
        if population[0].fitness() < best.fitness() {
            best = population[0].clone();
        }
        stats.trace.push(record(generation, &best, &population));
    }
    Ok(Evolution { best, stats })
}
