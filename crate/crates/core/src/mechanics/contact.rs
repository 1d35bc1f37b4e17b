//! Purely repulsive linear-spring contacts between disks and against the
//! flat `y` walls.

use serde::{Deserialize, Serialize};

use crate::lattice::{Packing, Vec2};

/// Effective stiffness of two springs in series, normalized so that like
/// particles keep their own stiffness.
#[inline]
pub fn mix_stiffness(eps_i: f64, eps_j: f64) -> f64 {
    2.0 * eps_i * eps_j / (eps_i + eps_j)
}

#[inline]
pub fn pair_energy(r: f64, eps: f64, sigma: f64) -> f64 {
    if r < sigma {
        let overlap = 1.0 - r / sigma;
        0.5 * eps * overlap * overlap
    } else {
        0.0
    }
}

/// Repulsive force magnitude along the center line, `-dU/dr`.
#[inline]
pub fn pair_force_magnitude(r: f64, eps: f64, sigma: f64) -> f64 {
    if r < sigma {
        eps / sigma * (1.0 - r / sigma)
    } else {
        0.0
    }
}

/// `d^2U/dr^2` inside the contact range.
#[inline]
pub fn pair_curvature(r: f64, eps: f64, sigma: f64) -> f64 {
    if r < sigma {
        eps / (sigma * sigma)
    } else {
        0.0
    }
}

/// Contact law between a particle and a flat wall, as a function of the
/// distance `d` from the particle center to the wall. Either way the wall is
/// a linear spring `F = F0 (1 - d / R)` acting along the wall normal only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallModel {
    /// The wall stands in for the missing neighbor row of a hexagonal
    /// lattice: range `R = sqrt(3)/4 D` and `F0 = sqrt(3) eps / D`, which
    /// equals the normal force two lattice neighbors one half row height
    /// beyond the wall would exert. A uniform lattice is then an exact
    /// equilibrium at any packing fraction.
    #[default]
    LatticeMatched,
    /// Wall acts like a half-diameter disk contact: `R = D/2`,
    /// `F0 = eps / (D/2)`.
    HalfDiameter,
}

impl WallModel {
    /// `(range, peak force)` for a particle of stiffness `eps`.
    #[inline]
    fn params(self, eps: f64, sigma: f64) -> (f64, f64) {
        match self {
            WallModel::LatticeMatched => {
                let s3 = 3f64.sqrt();
                (0.25 * s3 * sigma, s3 * eps / sigma)
            }
            WallModel::HalfDiameter => (0.5 * sigma, eps / (0.5 * sigma)),
        }
    }

    pub fn range(self, sigma: f64) -> f64 {
        self.params(1.0, sigma).0
    }

    #[inline]
    pub fn energy(self, d: f64, eps: f64, sigma: f64) -> f64 {
        let (range, f0) = self.params(eps, sigma);
        if d < range {
            let overlap = 1.0 - d / range;
            0.5 * f0 * range * overlap * overlap
        } else {
            0.0
        }
    }

    /// Force magnitude pushing the particle away from the wall.
    #[inline]
    pub fn force(self, d: f64, eps: f64, sigma: f64) -> f64 {
        let (range, f0) = self.params(eps, sigma);
        if d < range {
            f0 * (1.0 - d / range)
        } else {
            0.0
        }
    }

    #[inline]
    pub fn curvature(self, d: f64, eps: f64, sigma: f64) -> f64 {
        let (range, f0) = self.params(eps, sigma);
        if d < range {
            f0 / range
        } else {
            0.0
        }
    }
}

/// Net contact force on every particle at `positions`.
pub fn total_forces(packing: &Packing, positions: &[Vec2]) -> Vec<Vec2> {
    let mut forces = vec![Vec2::zeros(); positions.len()];
    accumulate_forces(packing, positions, &mut forces);
    forces
}

/// Overwrites `forces` with the net contact forces. Pair loop is O(N^2).
pub fn accumulate_forces(packing: &Packing, positions: &[Vec2], forces: &mut [Vec2]) {
    let sigma = packing.diameter;
    let sigma2 = sigma * sigma;
    let sim_box = &packing.sim_box;
    let eps = &packing.stiffness;
    let n = positions.len();
    forces.iter_mut().for_each(|f| *f = Vec2::zeros());
    for i in 0..n {
        for j in (i + 1)..n {
            let sep = sim_box.separation(&positions[i], &positions[j]);
            let r2 = sep.norm_squared();
            if r2 < sigma2 {
                let r = r2.sqrt();
                let f = pair_force_magnitude(r, mix_stiffness(eps[i], eps[j]), sigma);
                let fij = sep * (f / r);
                forces[j] += fij;
                forces[i] -= fij;
            }
        }
    }
    let wall = packing.wall;
    let range = wall.range(sigma);
    for (i, p) in positions.iter().enumerate() {
        if p.y < range {
            forces[i].y += wall.force(p.y, eps[i], sigma);
        }
        let top = sim_box.ly - p.y;
        if top < range {
            forces[i].y -= wall.force(top, eps[i], sigma);
        }
    }
}

pub fn potential_energy(packing: &Packing, positions: &[Vec2]) -> f64 {
    let sigma = packing.diameter;
    let sim_box = &packing.sim_box;
    let eps = &packing.stiffness;
    let n = positions.len();
    let mut energy = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let r = sim_box.separation(&positions[i], &positions[j]).norm();
            energy += pair_energy(r, mix_stiffness(eps[i], eps[j]), sigma);
        }
    }
    for (i, p) in positions.iter().enumerate() {
        energy += packing.wall.energy(p.y, eps[i], sigma);
        energy += packing.wall.energy(sim_box.ly - p.y, eps[i], sigma);
    }
    energy
}

pub fn max_force_norm(forces: &[Vec2]) -> f64 {
    forces.iter().map(|f| f.norm()).fold(0.0, f64::max)
}
