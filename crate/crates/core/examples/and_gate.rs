//! Truth tables of one design at both logic frequencies.

use granular_gates::gate::{GateEvaluator, GateSpec, InputCase};
use granular_gates::mechanics::{RelaxConfig, SimConfig};
use granular_gates::{Genome, MaterialConfig};

fn main() -> granular_gates::Result<()> {
    let ev = GateEvaluator::new(MaterialConfig::default(), GateSpec::default(), SimConfig::default(), RelaxConfig::default())?;
    let genome: Genome = "000011010011011111001110110000".parse()?;
    for omega in [ev.spec.omega_and, ev.spec.omega_xor] {
        let table = ev.truth_table(&genome, omega, false)?;
        println!("omega {omega}: and-like {} xor-like {}", table.is_and_like(), table.is_xor_like());
        for c in InputCase::ALL {
            let r = table.case(c);
            let gain = r.gain.map_or("-".to_string(), |g| format!("{g:.3}"));
            println!("  {c}  O = {:.3e}  gain {gain}", r.amplitude);
        }
    }
    let fit = ev.fitness(&genome);
    println!("AND-ness {:.3}  XOR-ness {:.3}", fit.and_ness, fit.xor_ness);
    Ok(())
}
