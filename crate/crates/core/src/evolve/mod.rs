//! Multiobjective evolution of genomes and the random-search baseline.
//!
//! Runs are deterministic for a given seed. The initial population is drawn
//! from a ChaCha8 stream 0 of the seed and generation `g` varies its parents
//! with stream `g`, so the variation sequence never depends on how fitness
//! evaluations are scheduled across threads.

pub mod nsga2;
mod random;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{FitnessPair, GateEvaluator};
use crate::lattice::Genome;
pub use nsga2::{
    assign_rank_and_crowding, crowding_distance, dominates, environmental_selection, fast_nondominated_sort,
    select_parents, tournament, vary, Individual, VariationRates, VariationScheme,
};
pub use random::{random_search, Histogram, Objective, RandomSearchResult, SampleStats};

/// Anything that scores a genome. Failures are floored by the callers.
pub trait FitnessFn: Sync {
    fn evaluate(&self, genome: &Genome) -> Result<FitnessPair>;
}

impl FitnessFn for GateEvaluator {
    fn evaluate(&self, genome: &Genome) -> Result<FitnessPair> {
        GateEvaluator::evaluate(self, genome)
    }
}

impl<F> FitnessFn for F
where
    F: Fn(&Genome) -> Result<FitnessPair> + Sync,
{
    fn evaluate(&self, genome: &Genome) -> Result<FitnessPair> {
        self(genome)
    }
}

fn floored<F: FitnessFn + ?Sized>(f: &F, genome: &Genome) -> (FitnessPair, bool) {
    match f.evaluate(genome) {
        Ok(p) if p.and_ness.is_finite() && p.xor_ness.is_finite() => (p, false),
        _ => (FitnessPair::FAILED, true),
    }
}

/// Evaluates in parallel on the current rayon pool; output order follows
/// input order.
pub fn evaluate_all<F: FitnessFn + ?Sized>(f: &F, genomes: &[Genome]) -> Vec<(FitnessPair, bool)> {
    genomes.par_iter().map(|g| floored(f, g)).collect()
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn random_genome<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Genome {
    Genome::new((0..len).map(|_| rng.random_bool(0.5)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EAConfig {
    pub population_size: usize,
    /// Defaults to the population size.
    pub offspring_size: Option<usize>,
    pub generations: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub p_bitflip: f64,
    pub variation: VariationScheme,
    /// Set from the run seed rather than read from config files.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for EAConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            offspring_size: None,
            generations: 250,
            p_crossover: 0.2,
            p_mutation: 0.8,
            p_bitflip: 0.05,
            variation: VariationScheme::Exclusive,
            seed: 0,
        }
    }
}

impl EAConfig {
    pub fn lambda(&self) -> usize {
        self.offspring_size.unwrap_or(self.population_size)
    }

    pub fn rates(&self) -> VariationRates {
        VariationRates {
            p_crossover: self.p_crossover,
            p_mutation: self.p_mutation,
            p_bitflip: self.p_bitflip,
            scheme: self.variation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.population_size < 2 || self.lambda() < 2 {
            return bad("population and offspring sizes must be at least 2");
        }
        for p in [self.p_crossover, self.p_mutation, self.p_bitflip] {
            if !(0.0..=1.0).contains(&p) {
                return bad("probabilities must lie in [0, 1]");
            }
        }
        if self.variation == VariationScheme::Exclusive && self.p_crossover + self.p_mutation > 1.0 + 1e-12 {
            return bad("p_crossover + p_mutation must not exceed 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontMember {
    pub genome: Genome,
    pub and_ness: f64,
    pub xor_ness: f64,
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Fresh evaluations this generation, excluding cache hits.
    pub evaluations: usize,
    pub failures: usize,
    pub mean_and_ness: f64,
    pub max_and_ness: f64,
    pub mean_xor_ness: f64,
    pub max_xor_ness: f64,
    pub front: Vec<FrontMember>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub records: Vec<GenerationRecord>,
}

impl RunLog {
    pub fn write_jsonl<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            writeln!(out)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub log: RunLog,
    pub population: Vec<Individual>,
    /// Non-dominated members of the final population, one per distinct genome.
    pub front: Vec<FrontMember>,
    pub cache_size: usize,
}

pub fn write_front_csv<W: std::io::Write>(front: &[FrontMember], mut out: W) -> std::io::Result<()> {
    writeln!(out, "genome,and_ness,xor_ness")?;
    for m in front {
        writeln!(out, "{},{},{}", m.genome, m.and_ness, m.xor_ness)?;
    }
    Ok(())
}

fn first_front(population: &[Individual]) -> Vec<FrontMember> {
    let mut front: Vec<FrontMember> = Vec::new();
    for ind in population.iter().filter(|i| i.rank == 0) {
        if !front.iter().any(|m| m.genome == ind.genome) {
            front.push(FrontMember {
                genome: ind.genome.clone(),
                and_ness: ind.fitness.and_ness,
                xor_ness: ind.fitness.xor_ness,
            });
        }
    }
    front
}

fn record(generation: usize, evaluations: usize, failures: usize, population: &[Individual]) -> GenerationRecord {
    let n = population.len() as f64;
    let and = population.iter().map(|i| i.fitness.and_ness);
    let xor = population.iter().map(|i| i.fitness.xor_ness);
    GenerationRecord {
        generation,
        evaluations,
        failures,
        mean_and_ness: and.clone().sum::<f64>() / n,
        max_and_ness: and.fold(f64::MIN, f64::max),
        mean_xor_ness: xor.clone().sum::<f64>() / n,
        max_xor_ness: xor.fold(f64::MIN, f64::max),
        front: first_front(population),
    }
}

struct Cache(HashMap<Genome, FitnessPair>);

impl Cache {
    /// Fills in unseen genomes; returns (fresh evaluations, failures).
    fn fill<F: FitnessFn + ?Sized>(&mut self, f: &F, genomes: &[Genome]) -> (usize, usize) {
        let mut unseen: Vec<Genome> = Vec::new();
        for g in genomes {
            if !self.0.contains_key(g) && !unseen.contains(g) {
                unseen.push(g.clone());
            }
        }
        let results = evaluate_all(f, &unseen);
        let failures = results.iter().filter(|(_, failed)| *failed).count();
        for (g, (fit, _)) in unseen.iter().zip(results) {
            self.0.insert(g.clone(), fit);
        }
        (unseen.len(), failures)
    }

    fn individual(&self, genome: Genome) -> Individual {
        let fitness = self.0[&genome];
        Individual::new(genome, fitness)
    }
}

/// NSGA-II with (mu + lambda) survival. `observe` sees each generation
/// record as soon as it exists, generation 0 being the initial population;
/// an error from it stops the run.
pub fn nsga2_run<F, O>(ea: &EAConfig, genome_len: usize, fitness: &F, mut observe: O) -> Result<EvolutionResult>
where
    F: FitnessFn + ?Sized,
    O: FnMut(&GenerationRecord) -> Result<()>,
{
    ea.validate()?;
    if genome_len == 0 {
        return Err(Error::InvalidConfig("genome length must be positive".into()));
    }
    let mu = ea.population_size;
    let mut cache = Cache(HashMap::new());
    let mut rng = stream_rng(ea.seed, 0);
    let initial: Vec<Genome> = (0..mu).map(|_| random_genome(genome_len, &mut rng)).collect();
    let (evaluations, failures) = cache.fill(fitness, &initial);
    let mut population: Vec<Individual> = initial.into_iter().map(|g| cache.individual(g)).collect();
    assign_rank_and_crowding(&mut population);
    let mut records = vec![record(0, evaluations, failures, &population)];
    observe(&records[0])?;

    for generation in 1..=ea.generations {
        let mut rng = stream_rng(ea.seed, generation as u64);
        let parents: Vec<Genome> = select_parents(&population, mu, &mut rng).into_iter().map(|i| i.genome).collect();
        let offspring = vary(&parents, ea.lambda(), &ea.rates(), &mut rng);
        let (evaluations, failures) = cache.fill(fitness, &offspring);
        let mut pool = population;
        pool.extend(offspring.into_iter().map(|g| cache.individual(g)));
        population = environmental_selection(pool, mu);
        assign_rank_and_crowding(&mut population);
        let r = record(generation, evaluations, failures, &population);
        observe(&r)?;
        records.push(r);
    }
    Ok(EvolutionResult {
        front: first_front(&population),
        log: RunLog { records },
        population,
        cache_size: cache.0.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cheap deterministic objectives with a known trade-off.
    fn toy(genome: &Genome) -> Result<FitnessPair> {
        let bits = genome.bits();
        let half = bits.len() / 2;
        let left = bits[..half].iter().filter(|&&b| b).count() as f64;
        let right = bits[half..].iter().filter(|&&b| !b).count() as f64;
        let ones = genome.count_ones() as f64;
        Ok(FitnessPair {
            and_ness: 0.1 + left + 0.01 * ones,
            xor_ness: 0.1 + right + 0.01 * (bits.len() as f64 - ones),
        })
    }

    fn small() -> EAConfig {
        EAConfig {
            population_size: 12,
            generations: 15,
            seed: 42,
            ..EAConfig::default()
        }
    }

    #[test]
    fn config_defaults_and_validation() {
        let ea = EAConfig::default();
        assert_eq!((ea.population_size, ea.lambda(), ea.generations), (50, 50, 250));
        assert_eq!((ea.p_crossover, ea.p_mutation, ea.p_bitflip), (0.2, 0.8, 0.05));
        assert!(ea.validate().is_ok());
        assert!(EAConfig { p_crossover: 0.5, ..ea.clone() }.validate().is_err());
        assert!(EAConfig { population_size: 1, ..ea.clone() }.validate().is_err());
        assert!(EAConfig { p_bitflip: 1.5, ..ea }.validate().is_err());
    }

    #[test]
    fn search_space_size() {
        assert_eq!(Genome::space_size(30), 1_073_741_824);
    }

    #[test]
    fn zero_generations_returns_initial_front() {
        let ea = EAConfig { generations: 0, ..small() };
        let run = nsga2_run(&ea, 30, &toy, |_| Ok(())).unwrap();
        assert_eq!(run.log.records.len(), 1);
        assert_eq!(run.log.records[0].evaluations, 12);
        assert_eq!(run.population.len(), 12);
        assert!(!run.front.is_empty());
        assert_eq!(run.front, run.log.records[0].front);
    }

    #[test]
    fn run_is_elitist_and_sized() {
        let run = nsga2_run(&small(), 30, &toy, |_| Ok(())).unwrap();
        assert_eq!(run.log.records.len(), 16);
        assert_eq!(run.population.len(), 12);
        for w in run.log.records.windows(2) {
            assert!(w[1].max_and_ness >= w[0].max_and_ness);
            assert!(w[1].max_xor_ness >= w[0].max_xor_ness);
        }
        let first = &run.log.records[0];
        let last = run.log.records.last().unwrap();
        assert!(last.max_and_ness > first.max_and_ness || last.max_xor_ness > first.max_xor_ness);
        for m in &run.front {
            assert!(!run.population.iter().any(|i| dominates(&i.fitness, &FitnessPair { and_ness: m.and_ness, xor_ness: m.xor_ness })));
        }
    }

    #[test]
    fn run_is_deterministic_across_pools() {
        let log = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let run = pool.install(|| nsga2_run(&small(), 30, &toy, |_| Ok(())).unwrap());
            let mut out = Vec::new();
            run.log.write_jsonl(&mut out).unwrap();
            out
        };
        let one = log(1);
        assert_eq!(one, log(1));
        assert_eq!(one, log(4));
        let other = nsga2_run(&EAConfig { seed: 43, ..small() }, 30, &toy, |_| Ok(())).unwrap();
        let mut out = Vec::new();
        other.log.write_jsonl(&mut out).unwrap();
        assert_ne!(one, out);
    }

    #[test]
    fn failures_are_floored_and_cached() {
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let failing = |g: &Genome| {
            calls.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            if g.bits()[0] {
                Err(Error::Diverged { step: 1, particle: 0 })
            } else {
                toy(g)
            }
        };
        let run = nsga2_run(&small(), 30, &failing, |_| Ok(())).unwrap();
        let fresh: usize = run.log.records.iter().map(|r| r.evaluations).sum();
        assert_eq!(fresh, calls.load(std::sync::atomic::Ordering::Relaxed));
        assert_eq!(fresh, run.cache_size);
        assert!(run.log.records.iter().map(|r| r.failures).sum::<usize>() > 0);
        assert!(run.population.iter().all(|i| i.fitness.and_ness.is_finite()));
    }

    #[test]
    fn observer_error_stops_run() {
        let mut seen = 0;
        let result = nsga2_run(&small(), 30, &toy, |r| {
            seen += 1;
            if r.generation == 3 {
                Err(Error::InvalidConfig("stop".into()))
            } else {
                Ok(())
            }
        });
        assert!(result.is_err());
        assert_eq!(seen, 4);
    }

    #[test]
    fn front_csv() {
        let front = vec![FrontMember { genome: "0101".parse().unwrap(), and_ness: 1.5, xor_ness: 0.25 }];
        let mut out = Vec::new();
        write_front_csv(&front, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "genome,and_ness,xor_ness\n0101,1.5,0.25\n");
    }
}
