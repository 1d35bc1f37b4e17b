//! Both logic frequencies driven at once: carry read at one, sum at the other.

use granular_gates::gate::{GateEvaluator, GateSpec, InputCase};
use granular_gates::mechanics::{RelaxConfig, SimConfig};
use granular_gates::{Genome, MaterialConfig};

fn main() -> granular_gates::Result<()> {
    let ev = GateEvaluator::new(MaterialConfig::default(), GateSpec::default(), SimConfig::default(), RelaxConfig::default())?;
    let genome: Genome = "110001110100101111010001111010".parse()?;
    let ha = ev.half_adder(&genome, false)?;
    println!("carry at omega {}, sum at omega {}", ha.omega_carry, ha.omega_sum);
    for c in InputCase::ALL {
        let r = ha.case(c);
        println!("  {c}  C = {:.3e}  S = {:.3e}", r.carry, r.sum);
    }
    Ok(())
}
