//! NSGA-II building blocks for two maximized objectives.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::gate::FitnessPair;
use crate::lattice::Genome;

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genome: Genome,
    pub fitness: FitnessPair,
    pub rank: usize,
    pub crowding: f64,
}

impl Individual {
    pub fn new(genome: Genome, fitness: FitnessPair) -> Self {
        Self {
            genome,
            fitness,
            rank: 0,
            crowding: 0.0,
        }
    }
}

/// `a` dominates `b`: no worse in both objectives and better in one.
pub fn dominates(a: &FitnessPair, b: &FitnessPair) -> bool {
    a.and_ness >= b.and_ness && a.xor_ness >= b.xor_ness && (a.and_ness > b.and_ness || a.xor_ness > b.xor_ness)
}

/// Fronts of indices into `fitness`, best first. Indices within a front
/// are ascending.
pub fn fast_nondominated_sort(fitness: &[FitnessPair]) -> Vec<Vec<usize>> {
    let n = fitness.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for p in 0..n {
        for q in 0..n {
            if dominates(&fitness[p], &fitness[q]) {
                dominated_by[p].push(q);
            } else if dominates(&fitness[q], &fitness[p]) {
                counts[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&p| counts[p] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by[p] {
                counts[q] -= 1;
                if counts[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of one front, objectives normalized by
/// their range over the front.
pub fn crowding_distance(front: &[FitnessPair]) -> Vec<f64> {
    let n = front.len();
    let mut distance = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let objectives: [fn(&FitnessPair) -> f64; 2] = [|f| f.and_ness, |f| f.xor_ness];
    for objective in objectives {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| objective(&front[a]).total_cmp(&objective(&front[b])));
        let lo = objective(&front[order[0]]);
        let hi = objective(&front[order[n - 1]]);
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in order.windows(3) {
            let gap = objective(&front[w[2]]) - objective(&front[w[0]]);
            distance[w[1]] += gap / range;
        }
    }
    distance
}

/// Sets `rank` and `crowding` on every individual and returns the fronts.
pub fn assign_rank_and_crowding(population: &mut [Individual]) -> Vec<Vec<usize>> {
    let fitness: Vec<FitnessPair> = population.iter().map(|i| i.fitness).collect();
    let fronts = fast_nondominated_sort(&fitness);
    for (rank, front) in fronts.iter().enumerate() {
        let members: Vec<FitnessPair> = front.iter().map(|&i| fitness[i]).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&members)) {
            population[i].rank = rank;
            population[i].crowding = d;
        }
    }
    fronts
}

/// Crowded comparison: lower rank first, then larger crowding distance.
pub fn crowded_cmp(a: &Individual, b: &Individual) -> Ordering {
    a.rank.cmp(&b.rank).then_with(|| b.crowding.total_cmp(&a.crowding))
}

/// Winner of one binary tournament; exact ties go to a coin flip.
pub fn tournament<'p, R: Rng + ?Sized>(a: &'p Individual, b: &'p Individual, rng: &mut R) -> &'p Individual {
    match crowded_cmp(a, b) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => {
            if rng.random_bool(0.5) {
                a
            } else {
                b
            }
        }
    }
}

/// Binary tournaments with replacement on the crowded comparison.
pub fn select_parents<R: Rng + ?Sized>(population: &[Individual], n: usize, rng: &mut R) -> Vec<Individual> {
    (0..n)
        .map(|_| {
            let a = &population[rng.random_range(0..population.len())];
            let b = &population[rng.random_range(0..population.len())];
            tournament(a, b, rng).clone()
        })
        .collect()
}

/// Keeps the best `mu` of a ranked pool, truncating the split front by
/// crowding distance. Ties keep pool order.
pub fn environmental_selection(mut pool: Vec<Individual>, mu: usize) -> Vec<Individual> {
    let fronts = assign_rank_and_crowding(&mut pool);
    let mut chosen: Vec<usize> = Vec::with_capacity(mu);
    for front in fronts {
        if chosen.len() + front.len() <= mu {
            chosen.extend(front);
        } else {
            let mut split = front;
            split.sort_by(|&a, &b| pool[b].crowding.total_cmp(&pool[a].crowding));
            chosen.extend(split.into_iter().take(mu - chosen.len()));
        }
        if chosen.len() == mu {
            break;
        }
    }
    let mut slots: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
    chosen.into_iter().map(|i| slots[i].take().expect("chosen once")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariationScheme {
    /// Each child comes from crossover, mutation or cloning, never more than one.
    #[default]
    Exclusive,
    /// Each child may be crossed over and then mutated.
    Independent,
}

/// Single-point crossover at `cut`, first child only.
pub fn crossover(a: &Genome, b: &Genome, cut: usize) -> Genome {
    Genome::new(a.bits()[..cut].iter().chain(&b.bits()[cut..]).copied().collect())
}

pub fn bit_flip<R: Rng + ?Sized>(genome: &Genome, p: f64, rng: &mut R) -> Genome {
    let mut child = genome.clone();
    for bit in child.bits_mut() {
        if rng.random::<f64>() < p {
            *bit = !*bit;
        }
    }
    child
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationRates {
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub p_bitflip: f64,
    pub scheme: VariationScheme,
}

/// `n` offspring from a mating pool.
pub fn vary<R: Rng + ?Sized>(parents: &[Genome], n: usize, rates: &VariationRates, rng: &mut R) -> Vec<Genome> {
    let len = parents[0].len();
    let cross = |a: &Genome, b: &Genome, rng: &mut R| {
        if len < 2 {
            a.clone()
        } else {
            crossover(a, b, rng.random_range(1..len))
        }
    };
    let pick = |rng: &mut R| &parents[rng.random_range(0..parents.len())];
    (0..n)
        .map(|slot| match rates.scheme {
            VariationScheme::Exclusive => {
                let u: f64 = rng.random();
                if u < rates.p_crossover {
                    let a = pick(rng);
                    let b = pick(rng);
                    cross(a, b, rng)
                } else if u < rates.p_crossover + rates.p_mutation {
                    let a = pick(rng);
                    bit_flip(a, rates.p_bitflip, rng)
                } else {
                    pick(rng).clone()
                }
            }
            VariationScheme::Independent => {
                let mut child = parents[slot % parents.len()].clone();
                if rng.random::<f64>() < rates.p_crossover {
                    let partner = pick(rng);
                    child = cross(&child, partner, rng);
                }
                if rng.random::<f64>() < rates.p_mutation {
                    child = bit_flip(&child, rates.p_bitflip, rng);
                }
                child
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fp(a: f64, x: f64) -> FitnessPair {
        FitnessPair { and_ness: a, xor_ness: x }
    }

    /// Peels maximal sets by checking every pair against the remainder.
    fn brute_force_fronts(fitness: &[FitnessPair]) -> Vec<Vec<usize>> {
        let mut left: Vec<usize> = (0..fitness.len()).collect();
        let mut fronts = Vec::new();
        while !left.is_empty() {
            let front: Vec<usize> = left
                .iter()
                .copied()
                .filter(|&i| !left.iter().any(|&j| dominates(&fitness[j], &fitness[i])))
                .collect();
            left.retain(|i| !front.contains(i));
            fronts.push(front);
        }
        fronts
    }

    pub(crate) fn random_population(rng: &mut ChaCha8Rng, n: usize) -> Vec<FitnessPair> {
        // coarse values so ties and duplicates occur
        (0..n)
            .map(|_| fp(rng.random_range(0..8) as f64 / 2.0, rng.random_range(0..8) as f64 / 2.0))
            .collect()
    }

    #[test]
    fn sort_examples() {
        assert_eq!(fast_nondominated_sort(&[fp(2.0, 2.0), fp(1.0, 1.0)]), vec![vec![0], vec![1]]);
        assert_eq!(fast_nondominated_sort(&[fp(1.0, 2.0), fp(2.0, 1.0)]), vec![vec![0, 1]]);
        assert_eq!(fast_nondominated_sort(&[fp(1.0, 1.0), fp(1.0, 1.0)]), vec![vec![0, 1]]);
    }

    #[test]
    fn sort_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let pop = random_population(&mut rng, 30);
            assert_eq!(fast_nondominated_sort(&pop), brute_force_fronts(&pop));
        }
    }

    #[test]
    fn crowding_examples() {
        assert_eq!(crowding_distance(&[fp(1.0, 1.0)]), vec![f64::INFINITY]);
        assert_eq!(crowding_distance(&[fp(1.0, 2.0), fp(2.0, 1.0)]), vec![f64::INFINITY; 2]);
        let d = crowding_distance(&[fp(0.0, 2.0), fp(1.0, 1.0), fp(2.0, 0.0)]);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert!((d[1] - 2.0).abs() < 1e-15);
        let same = crowding_distance(&[fp(1.0, 1.0); 4]);
        assert_eq!(same.iter().filter(|d| d.is_infinite()).count(), 2);
        assert!(same.iter().filter(|d| d.is_finite()).all(|&d| d == 0.0));
    }

    #[test]
    fn tournament_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut a = Individual::new(Genome::zeros(4), fp(1.0, 1.0));
        let mut b = Individual::new(Genome::ones(4), fp(1.0, 1.0));
        b.rank = 1;
        for _ in 0..20 {
            assert_eq!(tournament(&a, &b, &mut rng).genome, a.genome);
            assert_eq!(tournament(&b, &a, &mut rng).genome, a.genome);
        }
        b.rank = 0;
        a.crowding = f64::INFINITY;
        b.crowding = 0.5;
        assert_eq!(tournament(&b, &a, &mut rng).genome, a.genome);
        b.crowding = f64::INFINITY;
        let wins = (0..1000).filter(|_| tournament(&a, &b, &mut rng).genome == a.genome).count();
        assert!((400..600).contains(&wins), "{wins}");
    }

    #[test]
    fn tournament_frequencies_follow_crowded_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pop: Vec<Individual> = (0..6)
            .map(|k| Individual {
                genome: Genome::new(vec![k & 1 == 1, k & 2 == 2, k & 4 == 4]),
                fitness: fp(0.0, 0.0),
                rank: k / 2,
                crowding: if k % 2 == 0 { f64::INFINITY } else { 0.5 },
            })
            .collect();
        let mut counts = [0usize; 6];
        for w in select_parents(&pop, 10_000, &mut rng) {
            counts[pop.iter().position(|p| p.genome == w.genome).unwrap()] += 1;
        }
        // position r in crowded order wins with probability (2(n - r) - 1) / n^2
        for r in 0..6 {
            let p = (2.0 * (6.0 - r as f64) - 1.0) / 36.0;
            let sigma = (10_000.0 * p * (1.0 - p)).sqrt();
            assert!((counts[r] as f64 - 10_000.0 * p).abs() < 4.0 * sigma, "{counts:?}");
        }
        assert!(counts.windows(2).all(|w| w[0] > w[1]), "{counts:?}");
    }

    #[test]
    fn crossover_cut() {
        let child = crossover(&Genome::zeros(30), &Genome::ones(30), 7);
        assert_eq!(child.to_string(), format!("{}{}", "0".repeat(7), "1".repeat(23)));
    }

    #[test]
    fn mutation_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = Genome::zeros(30);
        assert_eq!(bit_flip(&g, 0.0, &mut rng), g);
        let trials = 10_000;
        let flipped: usize = (0..trials).map(|_| bit_flip(&g, 0.05, &mut rng).count_ones()).sum();
        let mean = flipped as f64 / trials as f64;
        let sigma = (30.0 * 0.05 * 0.95 / trials as f64).sqrt();
        assert!((mean - 1.5).abs() < 3.0 * sigma, "{mean}");
    }

    #[test]
    fn variation_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let parents = vec![Genome::zeros(30), Genome::ones(30)];
        let clone_only = VariationRates {
            p_crossover: 0.0,
            p_mutation: 0.0,
            p_bitflip: 0.05,
            scheme: VariationScheme::Exclusive,
        };
        assert!(vary(&parents, 100, &clone_only, &mut rng).iter().all(|c| parents.contains(c)));
        let identity_mutation = VariationRates { p_mutation: 1.0, p_bitflip: 0.0, ..clone_only };
        assert!(vary(&parents, 100, &identity_mutation, &mut rng).iter().all(|c| parents.contains(c)));
        let crossing = VariationRates { p_crossover: 1.0, ..clone_only };
        for child in vary(&parents, 200, &crossing, &mut rng) {
            // one cut: at most one switch between runs of equal bits
            let switches = child.bits().windows(2).filter(|w| w[0] != w[1]).count();
            assert!(switches <= 1);
        }
        let independent = VariationRates { scheme: VariationScheme::Independent, ..clone_only };
        assert_eq!(vary(&parents, 4, &independent, &mut rng), vec![parents[0].clone(), parents[1].clone(), parents[0].clone(), parents[1].clone()]);
    }

    #[test]
    fn truncation_keeps_mu_and_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let fits = random_population(&mut rng, 40);
            let pool: Vec<Individual> = fits
                .iter()
                .enumerate()
                .map(|(k, f)| Individual::new(Genome::new((0..6).map(|b| k >> b & 1 == 1).collect()), *f))
                .collect();
            let best_and = fits.iter().map(|f| f.and_ness).fold(f64::MIN, f64::max);
            let best_xor = fits.iter().map(|f| f.xor_ness).fold(f64::MIN, f64::max);
            let kept = environmental_selection(pool, 20);
            assert_eq!(kept.len(), 20);
            assert_eq!(kept.iter().map(|i| i.fitness.and_ness).fold(f64::MIN, f64::max), best_and);
            assert_eq!(kept.iter().map(|i| i.fitness.xor_ness).fold(f64::MIN, f64::max), best_xor);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn fronts_partition_and_order(values in proptest::collection::vec((0u8..6, 0u8..6), 1..40)) {
                let fits: Vec<FitnessPair> = values.iter().map(|&(a, x)| fp(a as f64, x as f64)).collect();
                let fronts = fast_nondominated_sort(&fits);
                let mut seen: Vec<usize> = fronts.iter().flatten().copied().collect();
                seen.sort_unstable();
                prop_assert_eq!(seen, (0..fits.len()).collect::<Vec<_>>());
                for (k, front) in fronts.iter().enumerate() {
                    for &i in front {
                        for earlier in &fronts[..k] {
                            prop_assert!(earlier.iter().all(|&j| !dominates(&fits[i], &fits[j])));
                        }
                        prop_assert!(front.iter().all(|&j| !dominates(&fits[j], &fits[i])));
                    }
                }
            }
        }
    }
}
