//! Velocity-Verlet dynamics with kinematically driven input particles.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::contact::{accumulate_forces, max_force_norm, potential_energy, total_forces};
use crate::error::{Error, Result};
use crate::lattice::{Packing, Vec2};

/// One sinusoidal component `amplitude * sin(omega * t)` of a drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub amplitude: f64,
    pub omega: f64,
}

/// Prescribed particles. An entry with no tones is held fixed at its rest
/// position; an entry with tones follows `x0 + sum A sin(w t)` in `x` with
/// `y` held at `y0`. Everything else is free.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub driven: Vec<(usize, Vec<Tone>)>,
}

impl DriveSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, particle: usize, tones: Vec<Tone>) -> Self {
        self.driven.push((particle, tones));
        self
    }

    pub fn pinned(self, particle: usize) -> Self {
        self.with(particle, Vec::new())
    }

    fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for (index, tones) in &self.driven {
            let index = *index;
            if index >= n {
                return Err(Error::IndexOutOfRange { index, n });
            }
            if std::mem::replace(&mut seen[index], true) {
                return Err(Error::InvalidConfig(format!("particle {index} driven twice")));
            }
            for tone in tones {
                if !(tone.amplitude >= 0.0) || !(tone.omega > 0.0) {
                    return Err(Error::InvalidConfig(
                        "drive amplitudes must be >= 0 and frequencies > 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub n_steps: usize,
    /// Viscous coefficient `b` of the drag `-b v` on free particles.
    pub damping: f64,
    pub record_stride: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 5e-3,
            n_steps: 10_000,
            damping: 0.0,
            record_stride: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig("sim: dt must be positive".into()));
        }
        if self.n_steps < 2 {
            return Err(Error::InvalidConfig("sim: n_steps must be >= 2".into()));
        }
        if !(self.damping >= 0.0) {
            return Err(Error::InvalidConfig("sim: damping must be >= 0".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidConfig("sim: record_stride must be >= 1".into()));
        }
        Ok(())
    }

    /// Checks `dt * sqrt(2 eps_max / m_min) / D < 0.5` for this packing.
    pub fn validate_for(&self, packing: &Packing) -> Result<()> {
        self.validate()?;
        let eps_max = packing.stiffness.iter().cloned().fold(0.0, f64::max);
        let m_min = packing.masses.iter().cloned().fold(f64::INFINITY, f64::min);
        let omega_max = (2.0 * eps_max / m_min).sqrt() / packing.diameter;
        if self.dt * omega_max >= 0.5 {
            return Err(Error::InvalidConfig(format!(
                "sim: dt = {} too large for the stiffest contact (dt * omega_max = {:.3} >= 0.5)",
                self.dt,
                self.dt * omega_max
            )));
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }
}

/// Sampled `x` displacements `x_i(t) - x_i^0` of the probed particles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub probes: Vec<usize>,
    pub series: Vec<Vec<f64>>,
    pub dt_effective: f64,
    pub total_time: f64,
}

impl TrajectoryRecord {
    pub fn n_samples(&self) -> usize {
        self.series.first().map_or(0, Vec::len)
    }

    pub fn series_for(&self, particle: usize) -> Option<&[f64]> {
        self.probes
            .iter()
            .position(|&p| p == particle)
            .map(|k| self.series[k].as_slice())
    }

    /// Columns: `t, probe_0_dx, probe_1_dx, ...`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "t")?;
        for k in 0..self.probes.len() {
            write!(out, ",probe_{k}_dx")?;
        }
        writeln!(out)?;
        for s in 0..self.n_samples() {
            write!(out, "{}", s as f64 * self.dt_effective)?;
            for series in &self.series {
                write!(out, ",{}", series[s])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Role {
    Free,
    Pinned,
    Driven,
}

/// Integrator state. Positions are kept unwrapped in `x` so displacements
/// stay continuous across the periodic boundary; contacts use the minimum
/// image so wrapping never matters for forces.
///
/// The residual forces left by relaxation are subtracted, so the packing at
/// rest is an exact fixed point and undriven outputs stay exactly zero.
pub struct Dynamics<'a> {
    packing: &'a Packing,
    rest: Vec<Vec2>,
    f_rest: Vec<Vec2>,
    x: Vec<Vec2>,
    v: Vec<Vec2>,
    f: Vec<Vec2>,
    roles: Vec<Role>,
    tones: Vec<Vec<Tone>>,
    inv_mass: Vec<f64>,
    dt: f64,
    damping: f64,
    step: usize,
    /// Largest displacement from rest, minimum image in `x`, before the run
    /// counts as diverged.
    limit: f64,
}

impl<'a> Dynamics<'a> {
    /// Starts at rest at the packing's equilibrium positions.
    pub fn new(packing: &'a Packing, drive: &DriveSpec, sim: &SimConfig) -> Result<Self> {
        sim.validate_for(packing)?;
        let n = packing.len();
        drive.validate(n)?;
        let rest = match &packing.equilibrium {
            Some(rest) => rest.clone(),
            None => {
                let max_force = max_force_norm(&total_forces(packing, &packing.positions));
                return Err(Error::NotRelaxed { max_force });
            }
        };
        let mut roles = vec![Role::Free; n];
        let mut tones = vec![Vec::new(); n];
        for (index, list) in &drive.driven {
            roles[*index] = if list.is_empty() { Role::Pinned } else { Role::Driven };
            tones[*index] = list.clone();
        }
        let mut dynamics = Self {
            packing,
            x: rest.clone(),
            f_rest: total_forces(packing, &rest),
            rest,
            v: vec![Vec2::zeros(); n],
            f: vec![Vec2::zeros(); n],
            roles,
            tones,
            inv_mass: packing.masses.iter().map(|m| 1.0 / m).collect(),
            dt: sim.dt,
            damping: sim.damping,
            step: 0,
            limit: 10.0 * packing.sim_box.lx,
        };
        dynamics.apply_constraints();
        dynamics.update_forces();
        Ok(dynamics)
    }

    /// Replaces positions and velocities of free particles; constrained
    /// particles keep following their prescription.
    pub fn set_free_state(&mut self, positions: &[Vec2], velocities: &[Vec2]) {
        for i in 0..self.x.len() {
            if self.roles[i] == Role::Free {
                self.x[i] = positions[i];
                self.v[i] = velocities[i];
            }
        }
        self.update_forces();
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    /// Unwrapped positions.
    pub fn positions(&self) -> &[Vec2] {
        &self.x
    }

    pub fn velocities(&self) -> &[Vec2] {
        &self.v
    }

    pub fn displacement_x(&self, particle: usize) -> f64 {
        self.x[particle].x - self.rest[particle].x
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.v
            .iter()
            .zip(&self.packing.masses)
            .zip(&self.roles)
            .filter(|(_, &role)| role == Role::Free)
            .map(|((v, m), _)| 0.5 * m * v.norm_squared())
            .sum()
    }

    /// Contact energy plus the work of the subtracted residual forces.
    pub fn potential_energy(&self) -> f64 {
        let residual: f64 = self
            .x
            .iter()
            .zip(&self.rest)
            .zip(&self.f_rest)
            .map(|((x, r), f)| f.dot(&(x - r)))
            .sum();
        potential_energy(self.packing, &self.x) + residual
    }

    fn update_forces(&mut self) {
        accumulate_forces(self.packing, &self.x, &mut self.f);
        for (f, f0) in self.f.iter_mut().zip(&self.f_rest) {
            *f -= f0;
        }
    }

    pub fn total_energy(&self) -> f64 {
        self.kinetic_energy() + self.potential_energy()
    }

    /// `U(x_n) + sum m v_{n-1/2} . v_{n+1/2} / 2`, the energy that the
    /// leapfrog map conserves exactly for harmonic forces.
    pub fn shadow_energy(&self) -> f64 {
        let correction: f64 = self
            .f
            .iter()
            .zip(&self.inv_mass)
            .zip(&self.roles)
            .filter(|(_, &role)| role == Role::Free)
            .map(|((f, w), _)| f.norm_squared() * w)
            .sum();
        self.total_energy() - self.dt * self.dt / 8.0 * correction
    }

    fn apply_constraints(&mut self) {
        let t = self.time();
        for i in 0..self.x.len() {
            match self.roles[i] {
                Role::Free => {}
                Role::Pinned => {
                    self.x[i] = self.rest[i];
                    self.v[i] = Vec2::zeros();
                }
                Role::Driven => {
                    let (mut dx, mut vx) = (0.0, 0.0);
                    for tone in &self.tones[i] {
                        let (s, c) = (tone.omega * t).sin_cos();
                        dx += tone.amplitude * s;
                        vx += tone.amplitude * tone.omega * c;
                    }
                    self.x[i] = Vec2::new(self.rest[i].x + dx, self.rest[i].y);
                    self.v[i] = Vec2::new(vx, 0.0);
                }
            }
        }
    }

    /// Advances one step. Drag is treated implicitly in the closing
    /// half-kick, which reduces to plain velocity Verlet when `b = 0`.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.dt;
        let half = 0.5 * dt;
        let n = self.x.len();
        for i in 0..n {
            if self.roles[i] == Role::Free {
                let drag = self.v[i] * self.damping;
                self.v[i] += (self.f[i] - drag) * (half * self.inv_mass[i]);
                self.x[i] += self.v[i] * dt;
            }
        }
        self.step += 1;
        self.apply_constraints();
        self.update_forces();
        for i in 0..n {
            if self.roles[i] == Role::Free {
                let k = half * self.inv_mass[i];
                self.v[i] = (self.v[i] + self.f[i] * k) / (1.0 + self.damping * k);
                // minimum image: circulating around the periodic direction is not divergence
                let d = self.packing.sim_box.separation(&self.rest[i], &self.x[i]).norm();
                if !(d <= self.limit) || !self.v[i].x.is_finite() || !self.v[i].y.is_finite() {
                    return Err(Error::Diverged {
                        step: self.step,
                        particle: i,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Runs a driven simulation from rest at the equilibrium positions and
/// records probe `x` displacements every `record_stride` steps, including
/// the initial sample at `t = 0`.
pub fn simulate_driven(
    packing: &Packing,
    drive: &DriveSpec,
    sim: &SimConfig,
    probes: &[usize],
) -> Result<TrajectoryRecord> {
    let n = packing.len();
    if let Some(&index) = probes.iter().find(|&&p| p >= n) {
        return Err(Error::IndexOutOfRange { index, n });
    }
    let mut dynamics = Dynamics::new(packing, drive, sim)?;
    let n_samples = sim.n_steps / sim.record_stride + 1;
    let mut series: Vec<Vec<f64>> = probes.iter().map(|_| Vec::with_capacity(n_samples)).collect();
    let record = |dynamics: &Dynamics, series: &mut Vec<Vec<f64>>| {
        for (s, &p) in series.iter_mut().zip(probes) {
            s.push(dynamics.displacement_x(p));
        }
    };
    record(&dynamics, &mut series);
    for step in 1..=sim.n_steps {
        dynamics.step()?;
        if step % sim.record_stride == 0 {
            record(&dynamics, &mut series);
        }
    }
    Ok(TrajectoryRecord {
        probes: probes.to_vec(),
        series,
        dt_effective: sim.dt * sim.record_stride as f64,
        total_time: sim.total_time(),
    })
}
