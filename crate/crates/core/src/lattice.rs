//! Hexagonal lattice packings and genome decoding.
//!
//! Sites are indexed row-major from the bottom row: site `j * cols + i` is
//! column `i` of row `j`. Row `j` sits at height `(j + 1/2) * (sqrt(3)/2) * a`
//! above the lower wall and odd rows are shifted right by `a / 2`. The box is
//! periodic in `x` with `Lx = cols * a` and bounded by flat walls at `y = 0`
//! and `y = Ly = rows * (sqrt(3)/2) * a`, so the packing fraction is a closed
//! form of the spacing `a`.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector2;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::mechanics::WallModel;

pub type Vec2 = Vector2<f64>;

/// Particle and lattice parameters. Defaults reproduce the 5 x 6 reference
/// material: unit soft stiffness, stiff particles ten times stiffer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialConfig {
    pub diameter: f64,
    pub mass: f64,
    pub stiffness_soft: f64,
    pub stiffness_ratio: f64,
    pub packing_fraction: f64,
    pub lattice_cols: usize,
    pub lattice_rows: usize,
    pub wall: WallModel,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        Self {
            diameter: 0.1,
            mass: 1.0,
            stiffness_soft: 1.0,
            stiffness_ratio: 10.0,
            packing_fraction: 0.91,
            lattice_cols: 5,
            lattice_rows: 6,
            wall: WallModel::default(),
        }
    }
}

impl MaterialConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.diameter > 0.0 && self.diameter.is_finite()) {
            return fail("diameter must be positive");
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return fail("mass must be positive");
        }
        if !(self.stiffness_soft > 0.0 && self.stiffness_soft.is_finite()) {
            return fail("stiffness_soft must be positive");
        }
        if !(self.stiffness_ratio >= 1.0 && self.stiffness_ratio.is_finite()) {
            return fail("stiffness_ratio must be >= 1");
        }
        if !(self.packing_fraction > 0.0 && self.packing_fraction < 1.2) {
            return fail("packing_fraction must lie in (0, 1.2)");
        }
        if self.lattice_cols < 2 || self.lattice_rows < 2 {
            return fail("lattice needs at least 2 columns and 2 rows");
        }
        Ok(())
    }

    pub fn stiffness_stiff(&self) -> f64 {
        self.stiffness_soft * self.stiffness_ratio
    }

    pub fn n_sites(&self) -> usize {
        self.lattice_cols * self.lattice_rows
    }

    pub fn site_index(&self, col: usize, row: usize) -> usize {
        row * self.lattice_cols + col
    }
}

/// Binary design string: `true` marks a stiff particle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Genome(Vec<bool>);

impl Genome {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![true; len])
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Number of distinct genomes of this length.
    pub fn space_size(len: usize) -> u128 {
        1u128 << len
    }

    /// Relabels sites by shifting every row `shift` columns to the right,
    /// which is a translation of the periodic lattice.
    pub fn shift_columns(&self, cols: usize, shift: usize) -> Self {
        let rows = self.len() / cols;
        let mut bits = vec![false; self.len()];
        for j in 0..rows {
            for i in 0..cols {
                bits[j * cols + (i + shift) % cols] = self.0[j * cols + i];
            }
        }
        Self(bits)
    }

    /// Mirror image under `row -> rows - 1 - row`.
    pub fn mirror_rows(&self, cols: usize) -> Self {
        let rows = self.len() / cols;
        let mut bits = vec![false; self.len()];
        for j in 0..rows {
            for i in 0..cols {
                bits[(rows - 1 - j) * cols + i] = self.0[j * cols + i];
            }
        }
        Self(bits)
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Genome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::GenomeChar(other)),
            })
            .collect::<Result<Vec<_>>>()
            .map(Genome)
    }
}

impl Serialize for Genome {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Genome {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Periodic-x, walled-y simulation cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimBox {
    pub lx: f64,
    pub ly: f64,
    pub lattice_spacing: f64,
}

impl SimBox {
    /// Minimum-image separation `to - from`.
    #[inline]
    pub fn separation(&self, from: &Vec2, to: &Vec2) -> Vec2 {
        let mut dx = to.x - from.x;
        dx -= self.lx * (dx / self.lx).round();
        Vec2::new(dx, to.y - from.y)
    }

    #[inline]
    pub fn wrap_x(&self, x: f64) -> f64 {
        let w = x.rem_euclid(self.lx);
        // rem_euclid can round up to exactly lx for tiny negative inputs
        if w >= self.lx {
            0.0
        } else {
            w
        }
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packing {
    pub diameter: f64,
    pub positions: Vec<Vec2>,
    pub stiffness: Vec<f64>,
    pub masses: Vec<f64>,
    pub sim_box: SimBox,
    pub wall: WallModel,
    /// Rest positions, set once the packing has been relaxed.
    pub equilibrium: Option<Vec<Vec2>>,
}

impl Packing {
    /// Assembles a packing from explicit parts; used for hand-built test
    /// systems that are not lattices.
    pub fn from_parts(
        diameter: f64,
        positions: Vec<Vec2>,
        stiffness: Vec<f64>,
        masses: Vec<f64>,
        sim_box: SimBox,
    ) -> Result<Self> {
        let n = positions.len();
        if stiffness.len() != n || masses.len() != n {
            return Err(Error::InvalidConfig(
                "positions, stiffness and masses must have equal length".into(),
            ));
        }
        if !(diameter > 0.0) || !(sim_box.lx > 0.0) || !(sim_box.ly > 0.0) {
            return Err(Error::InvalidConfig("box and diameter must be positive".into()));
        }
        if masses.iter().any(|&m| !(m > 0.0)) || stiffness.iter().any(|&k| !(k > 0.0)) {
            return Err(Error::InvalidConfig("masses and stiffness must be positive".into()));
        }
        let positions = positions
            .into_iter()
            .map(|p| Vec2::new(sim_box.wrap_x(p.x), p.y))
            .collect();
        Ok(Self {
            diameter,
            positions,
            stiffness,
            masses,
            sim_box,
            wall: WallModel::default(),
            equilibrium: None,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn packing_fraction(&self) -> f64 {
        let disk = std::f64::consts::PI * self.diameter * self.diameter / 4.0;
        self.len() as f64 * disk / self.sim_box.area()
    }

    /// Equilibrium positions, or the current positions when unrelaxed.
    pub fn rest_positions(&self) -> &[Vec2] {
        self.equilibrium.as_deref().unwrap_or(&self.positions)
    }

    pub fn with_genome(mut self, genome: &Genome, config: &MaterialConfig) -> Result<Self> {
        self.stiffness = decode_genome(genome, config)?;
        self.equilibrium = None;
        Ok(self)
    }
}

/// Input and output particles of a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortAssignment {
    pub input_1: usize,
    pub input_2: usize,
    pub output: usize,
}

impl PortAssignment {
    /// Inputs are the 2nd and 4th particles (from the bottom) of the leftmost
    /// column; the output is the middle particle of the rightmost column.
    pub fn for_lattice(config: &MaterialConfig) -> Self {
        let rows = config.lattice_rows;
        let last_col = config.lattice_cols - 1;
        Self {
            input_1: config.site_index(0, 1.min(rows - 1)),
            input_2: config.site_index(0, 3.min(rows - 1)),
            output: config.site_index(last_col, (rows - 1) / 2),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for index in [self.input_1, self.input_2, self.output] {
            if index >= n {
                return Err(Error::IndexOutOfRange { index, n });
            }
        }
        if self.input_1 == self.input_2 || self.input_1 == self.output || self.input_2 == self.output
        {
            return Err(Error::InvalidConfig("port indices must be distinct".into()));
        }
        Ok(())
    }
}

/// Spacing `a` for which `N * pi * D^2 / 4 = phi * Lx * Ly`.
pub fn lattice_spacing(config: &MaterialConfig) -> f64 {
    let pi = std::f64::consts::PI;
    config.diameter * (pi / (2.0 * 3f64.sqrt() * config.packing_fraction)).sqrt()
}

pub fn build_lattice(config: &MaterialConfig) -> Result<Packing> {
    config.validate()?;
    let a = lattice_spacing(config);
    let row_height = 3f64.sqrt() / 2.0 * a;
    let (cols, rows) = (config.lattice_cols, config.lattice_rows);
    let sim_box = SimBox {
        lx: cols as f64 * a,
        ly: rows as f64 * row_height,
        lattice_spacing: a,
    };
    let mut positions = Vec::with_capacity(cols * rows);
    for j in 0..rows {
        let shift = if j % 2 == 1 { 0.5 * a } else { 0.0 };
        let y = (j as f64 + 0.5) * row_height;
        for i in 0..cols {
            positions.push(Vec2::new(sim_box.wrap_x(i as f64 * a + shift), y));
        }
    }
    let n = positions.len();
    Ok(Packing {
        diameter: config.diameter,
        positions,
        stiffness: vec![config.stiffness_soft; n],
        masses: vec![config.mass; n],
        sim_box,
        wall: config.wall,
        equilibrium: None,
    })
}

pub fn decode_genome(genome: &Genome, config: &MaterialConfig) -> Result<Vec<f64>> {
    let expected = config.n_sites();
    if genome.len() != expected {
        return Err(Error::GenomeLength {
            expected,
            found: genome.len(),
        });
    }
    let (soft, stiff) = (config.stiffness_soft, config.stiffness_stiff());
    Ok(genome
        .bits()
        .iter()
        .map(|&b| if b { stiff } else { soft })
        .collect())
}

/// Inverse of [`decode_genome`]: any stiffness above the soft value reads as stiff.
pub fn encode_stiffness(stiffness: &[f64], config: &MaterialConfig) -> Genome {
    Genome::new(stiffness.iter().map(|&k| k > config.stiffness_soft).collect())
}
