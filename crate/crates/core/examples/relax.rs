//! Relaxes a random soft/stiff design and reports how far it moved.

use granular_gates::evolve::random_genome;
use granular_gates::mechanics::{fire_relax, RelaxConfig};
use granular_gates::{build_lattice, MaterialConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> granular_gates::Result<()> {
    let config = MaterialConfig::default();
    let genome = random_genome(config.n_sites(), &mut ChaCha8Rng::seed_from_u64(5));
    let packing = build_lattice(&config)?.with_genome(&genome, &config)?;
    let (relaxed, report) = fire_relax(&packing, &RelaxConfig::default())?;

    let moved = packing
        .positions
        .iter()
        .zip(&relaxed.positions)
        .map(|(a, b)| relaxed.sim_box.separation(a, b).norm())
        .fold(0.0, f64::max);
    println!("genome        {genome}");
    println!("phi           {:.4}", relaxed.packing_fraction());
    println!("iterations    {}", report.iterations);
    println!("energy        {:.6e} -> {:.6e}", report.initial_energy, report.final_energy);
    println!("max |F|       {:.2e}", report.max_force);
    println!("max move      {moved:.3e} (spacing {:.4})", relaxed.sim_box.lattice_spacing);
    Ok(())
}
