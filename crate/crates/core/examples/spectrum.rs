//! Vibrational spectrum of the all-soft lattice and of a striped design.

use granular_gates::mechanics::{fire_relax, RelaxConfig};
use granular_gates::spectrum::eigenfrequencies;
use granular_gates::{build_lattice, Genome, MaterialConfig};

fn main() -> granular_gates::Result<()> {
    let config = MaterialConfig::default();
    let striped: Genome = "000001111100000111110000011111".parse()?;
    for (name, genome) in [("all soft", Genome::zeros(30)), ("striped", striped)] {
        let packing = build_lattice(&config)?.with_genome(&genome, &config)?;
        let (relaxed, _) = fire_relax(&packing, &RelaxConfig::default())?;
        let s = eigenfrequencies(&relaxed)?;
        let top = s.frequencies.last().copied().unwrap_or(0.0);
        print!("{name:9} zero modes {:2}  max omega {top:8.3}", s.n_zero_modes);
        match s.band_gap {
            Some(g) => println!("  widest gap {:.3}..{:.3} ({:.3})", g.lower, g.upper, g.width),
            None => println!("  no gap"),
        }
    }
    Ok(())
}
