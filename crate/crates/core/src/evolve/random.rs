//! Uniform random sampling of the design space.

use serde::{Deserialize, Serialize};

use super::{evaluate_all, random_genome, stream_rng, FitnessFn};
use crate::error::{Error, Result};
use crate::gate::FitnessPair;
use crate::lattice::Genome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    AndNess,
    XorNess,
}

impl Objective {
    pub fn of(self, f: &FitnessPair) -> f64 {
        match self {
            Objective::AndNess => f.and_ness,
            Objective::XorNess => f.xor_ness,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl SampleStats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        Some(Self {
            n: values.len(),
            min: values.iter().cloned().fold(f64::INFINITY, f64::min),
            max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            mean: values.iter().sum::<f64>() / values.len() as f64,
        })
    }
}

/// Equal-width bins from the sample minimum to its maximum; the last bin
/// is closed on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn linear(values: &[f64], bins: usize) -> Result<Self> {
        let stats = SampleStats::of(values).ok_or_else(|| Error::InvalidConfig("empty sample".into()))?;
        if bins == 0 {
            return Err(Error::InvalidConfig("histogram needs at least one bin".into()));
        }
        let (lo, hi) = (stats.min, stats.max);
        if hi == lo {
            return Ok(Self {
                edges: vec![lo, hi],
                counts: vec![values.len()],
            });
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|k| if k == bins { hi } else { lo + k as f64 * width }).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Ok(Self { edges, counts })
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "bin_left,bin_right,count")?;
        for (k, c) in self.counts.iter().enumerate() {
            writeln!(out, "{},{},{}", self.edges[k], self.edges[k + 1], c)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSearchResult {
    pub seed: u64,
    pub failures: usize,
    pub and_ness: SampleStats,
    pub xor_ness: SampleStats,
    #[serde(skip)]
    pub samples: Vec<(Genome, FitnessPair)>,
}

impl RandomSearchResult {
    pub fn stats(&self, objective: Objective) -> SampleStats {
        match objective {
            Objective::AndNess => self.and_ness,
            Objective::XorNess => self.xor_ness,
        }
    }

    pub fn values(&self, objective: Objective) -> Vec<f64> {
        self.samples.iter().map(|(_, f)| objective.of(f)).collect()
    }

    pub fn histogram(&self, objective: Objective, bins: usize) -> Result<Histogram> {
        Histogram::linear(&self.values(objective), bins)
    }

    pub fn write_samples_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "genome,and_ness,xor_ness")?;
        for (g, f) in &self.samples {
            writeln!(out, "{},{},{}", g, f.and_ness, f.xor_ness)?;
        }
        Ok(())
    }
}

/// `n` fair-coin genomes, evaluated on the current rayon pool. Failed
/// evaluations count at the fitness floor.
pub fn random_search<F: FitnessFn + ?Sized>(n: usize, genome_len: usize, fitness: &F, seed: u64) -> Result<RandomSearchResult> {
    if n == 0 {
        return Err(Error::InvalidConfig("random search needs at least one sample".into()));
    }
    let mut rng = stream_rng(seed, 0);
    let genomes: Vec<Genome> = (0..n).map(|_| random_genome(genome_len, &mut rng)).collect();
    let results = evaluate_all(fitness, &genomes);
    let failures = results.iter().filter(|(_, failed)| *failed).count();
    let samples: Vec<(Genome, FitnessPair)> = genomes.into_iter().zip(results.into_iter().map(|(f, _)| f)).collect();
    let values = |o: Objective| samples.iter().map(|(_, f)| o.of(f)).collect::<Vec<_>>();
    Ok(RandomSearchResult {
        seed,
        failures,
        and_ness: SampleStats::of(&values(Objective::AndNess)).expect("nonempty"),
        xor_ness: SampleStats::of(&values(Objective::XorNess)).expect("nonempty"),
        samples,
    })
}
