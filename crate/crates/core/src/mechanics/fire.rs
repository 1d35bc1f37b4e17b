//! Fast Inertial Relaxation Engine.
//!
//! Damped inertial dynamics with velocity mixing toward the force
//! direction, an adaptive step that grows while the power `F.v` stays
//! positive, and a full stop (velocities zeroed, step cut) whenever the
//! system starts moving uphill.

use serde::{Deserialize, Serialize};

use super::contact::{accumulate_forces, max_force_norm, potential_energy};
use crate::error::{Error, Result};
use crate::lattice::{Packing, Vec2};

const F_INC: f64 = 1.1;
const F_DEC: f64 = 0.5;
const ALPHA_START: f64 = 0.1;
const F_ALPHA: f64 = 0.99;
const N_MIN: usize = 5;
const DT_MAX_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelaxConfig {
    pub force_tol: f64,
    pub max_iterations: usize,
    /// Initial FIRE step; the step is capped at ten times this value.
    pub dt_initial: f64,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        Self {
            force_tol: 1e-10,
            max_iterations: 1_000_000,
            dt_initial: 5e-3,
        }
    }
}

impl RelaxConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.force_tol > 0.0) || !(self.dt_initial > 0.0) || self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "relax: force_tol, dt_initial and max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FireReport {
    pub iterations: usize,
    pub max_force: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
}

/// Relaxes `packing` until every particle feels less than `force_tol`,
/// recording the result as its equilibrium positions.
pub fn fire_relax(packing: &Packing, config: &RelaxConfig) -> Result<(Packing, FireReport)> {
    config.validate()?;
    let n = packing.len();
    let mut x = packing.positions.clone();
    let mut v = vec![Vec2::zeros(); n];
    let mut f = vec![Vec2::zeros(); n];
    let inv_mass: Vec<f64> = packing.masses.iter().map(|m| 1.0 / m).collect();
    let initial_energy = potential_energy(packing, &x);

    let dt_max = DT_MAX_FACTOR * config.dt_initial;
    let mut dt = config.dt_initial;
    let mut alpha = ALPHA_START;
    let mut downhill_steps = 0usize;
    let mut iterations = 0usize;

    loop {
        accumulate_forces(packing, &x, &mut f);
        let max_force = max_force_norm(&f);
        if max_force < config.force_tol {
            let mut relaxed = packing.clone();
            relaxed.positions = x.clone();
            relaxed.equilibrium = Some(x);
            let report = FireReport {
                iterations,
                max_force,
                initial_energy,
                final_energy: potential_energy(&relaxed, &relaxed.positions),
            };
            return Ok((relaxed, report));
        }
        if iterations >= config.max_iterations {
            return Err(Error::NotConverged {
                iterations,
                max_force,
            });
        }
        iterations += 1;

        let power: f64 = f.iter().zip(&v).map(|(f, v)| f.dot(v)).sum();
        if power > 0.0 {
            let v_norm = v.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
            let f_norm = f.iter().map(|f| f.norm_squared()).sum::<f64>().sqrt();
            let scale = alpha * v_norm / f_norm;
            for (v, f) in v.iter_mut().zip(&f) {
                *v = *v * (1.0 - alpha) + f * scale;
            }
            if downhill_steps > N_MIN {
                dt = (dt * F_INC).min(dt_max);
                alpha *= F_ALPHA;
            }
            downhill_steps += 1;
        } else {
            v.iter_mut().for_each(|v| *v = Vec2::zeros());
            dt *= F_DEC;
            alpha = ALPHA_START;
            downhill_steps = 0;
        }

        for i in 0..n {
            v[i] += f[i] * (dt * inv_mass[i]);
            x[i] += v[i] * dt;
            x[i].x = packing.sim_box.wrap_x(x[i].x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, decode_genome, Genome, MaterialConfig};
    use crate::mechanics::total_forces;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_lattice_needs_no_iterations() {
        let packing = build_lattice(&MaterialConfig::default()).unwrap();
        let (relaxed, report) = fire_relax(&packing, &RelaxConfig::default()).unwrap();
        assert_eq!(report.iterations, 0);
        for (a, b) in relaxed.positions.iter().zip(&packing.positions) {
            assert!((a - b).norm() < 1e-9);
        }
        assert!(relaxed.equilibrium.is_some());
    }

    #[test]
    fn mixed_genomes_relax_downhill() {
        let config = MaterialConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let genome = Genome::new((0..30).map(|_| rng.random_bool(0.5)).collect());
            let mut packing = build_lattice(&config).unwrap();
            packing.stiffness = decode_genome(&genome, &config).unwrap();
            let (relaxed, report) = fire_relax(&packing, &RelaxConfig::default()).unwrap();
            let f = total_forces(&relaxed, &relaxed.positions);
            assert!(max_force_norm(&f) < 1e-10);
            assert!(report.final_energy <= report.initial_energy);
        }
    }

    #[test]
    fn relaxed_packing_is_a_fixed_point() {
        let config = MaterialConfig::default();
        let mut packing = build_lattice(&config).unwrap();
        packing.stiffness =
            decode_genome(&"110010100111010001011100101011".parse().unwrap(), &config).unwrap();
        let (relaxed, _) = fire_relax(&packing, &RelaxConfig::default()).unwrap();
        let (again, report) = fire_relax(&relaxed, &RelaxConfig::default()).unwrap();
        assert_eq!(report.iterations, 0);
        assert_eq!(again.positions, relaxed.positions);
    }

    #[test]
    fn iteration_cap_reports_force() {
        let config = MaterialConfig::default();
        let mut packing = build_lattice(&config).unwrap();
        packing.stiffness[0] = 10.0;
        let relax = RelaxConfig {
            max_iterations: 3,
            ..Default::default()
        };
        match fire_relax(&packing, &relax) {
            Err(Error::NotConverged { iterations, max_force }) => {
                assert_eq!(iterations, 3);
                assert!(max_force > 1e-10);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
