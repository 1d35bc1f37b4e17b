//! Contact mechanics, energy minimization and driven dynamics.

mod contact;
mod dynamics;
mod fire;

pub use contact::{
    accumulate_forces, max_force_norm, mix_stiffness, pair_curvature, pair_energy,
    pair_force_magnitude, potential_energy, total_forces, WallModel,
};
pub use dynamics::{simulate_driven, DriveSpec, Dynamics, SimConfig, Tone, TrajectoryRecord};
pub use fire::{fire_relax, FireReport, RelaxConfig};
