//! A short NSGA-II run that prints the generation log and final front.

use granular_gates::evolve::{nsga2_run, EAConfig};
use granular_gates::gate::{GateEvaluator, GateSpec};
use granular_gates::mechanics::{RelaxConfig, SimConfig};
use granular_gates::MaterialConfig;

fn main() -> granular_gates::Result<()> {
    let ev = GateEvaluator::new(MaterialConfig::default(), GateSpec::default(), SimConfig::default(), RelaxConfig::default())?;
    let ea = EAConfig {
        population_size: 12,
        generations: 8,
        seed: 3,
        ..EAConfig::default()
    };
    let result = nsga2_run(&ea, ev.genome_len(), &ev, |r| {
        println!(
            "gen {:2}  evals {:4}  max AND {:7.3}  max XOR {:7.3}  front {}",
            r.generation,
            r.evaluations,
            r.max_and_ness,
            r.max_xor_ness,
            r.front.len()
        );
        Ok(())
    })?;
    println!("{} distinct designs evaluated", result.cache_size);
    for m in &result.front {
        println!("  {}  {:7.3}  {:7.3}", m.genome, m.and_ness, m.xor_ness);
    }
    Ok(())
}
