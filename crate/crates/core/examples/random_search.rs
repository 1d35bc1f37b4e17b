//! Fitness of uniformly random designs, the baseline for evolution.

use granular_gates::evolve::{random_search, Histogram};
use granular_gates::gate::{GateEvaluator, GateSpec};
use granular_gates::mechanics::{RelaxConfig, SimConfig};
use granular_gates::MaterialConfig;

fn main() -> granular_gates::Result<()> {
    let ev = GateEvaluator::new(MaterialConfig::default(), GateSpec::default(), SimConfig::default(), RelaxConfig::default())?;
    let result = random_search(40, ev.genome_len(), &ev, 11)?;
    for (name, s) in [("AND", result.and_ness), ("XOR", result.xor_ness)] {
        println!("{name}-ness  mean {:.3}  min {:.3}  max {:.3}", s.mean, s.min, s.max);
    }
    let xor: Vec<f64> = result.samples.iter().map(|(_, f)| f.xor_ness).collect();
    let h = Histogram::linear(&xor, 8)?;
    for (i, n) in h.counts.iter().enumerate() {
        println!("  [{:7.3}, {:7.3})  {}", h.edges[i], h.edges[i + 1], "#".repeat(*n));
    }
    Ok(())
}
