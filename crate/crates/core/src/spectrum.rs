//! Vibrational eigenanalysis of relaxed packings.

use std::io::{self, Write};

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Packing, Vec2};
use crate::mechanics::{max_force_norm, mix_stiffness, pair_curvature, pair_force_magnitude, total_forces};

/// Largest residual force accepted as "relaxed" for harmonic analysis.
pub const RELAXED_FORCE_TOL: f64 = 1e-8;
/// Eigenvalues in `(-NEGATIVE_EIGEN_TOL, 0)` are rounding noise and clamp to zero.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-8;
/// Modes below this fraction of the highest frequency count as zero modes.
pub const ZERO_MODE_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandGap {
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Sorted, non-negative, length `2N`.
    pub frequencies: Vec<f64>,
    /// `None` when fewer than two finite-frequency modes exist.
    pub band_gap: Option<BandGap>,
    pub n_zero_modes: usize,
}

impl SpectrumResult {
    /// Columns: `index, omega`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "index,omega")?;
        for (k, w) in self.frequencies.iter().enumerate() {
            writeln!(out, "{k},{w}")?;
        }
        Ok(())
    }
}

/// Hessian of the total potential at the packing's current positions.
/// Fails unless the packing has been relaxed.
pub fn hessian(packing: &Packing) -> Result<DMatrix<f64>> {
    let max_force = max_force_norm(&total_forces(packing, &packing.positions));
    if packing.equilibrium.is_none() || max_force >= RELAXED_FORCE_TOL {
        return Err(Error::NotRelaxed { max_force });
    }
    Ok(hessian_at(packing, &packing.positions))
}

/// Hessian at arbitrary positions, without the equilibrium check.
///
/// Each overlapping pair contributes the block
/// `U'' n n^T + (U'/r)(I - n n^T)` with `+` on the diagonal blocks and `-`
/// off the diagonal; walls add `U_w''` to the `yy` entry.
pub fn hessian_at(packing: &Packing, positions: &[Vec2]) -> DMatrix<f64> {
    let n = positions.len();
    let sigma = packing.diameter;
    let eps = &packing.stiffness;
    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in (i + 1)..n {
            let sep = packing.sim_box.separation(&positions[i], &positions[j]);
            let r = sep.norm();
            if r >= sigma {
                continue;
            }
            let e = mix_stiffness(eps[i], eps[j]);
            let u2 = pair_curvature(r, e, sigma);
            let u1_over_r = -pair_force_magnitude(r, e, sigma) / r;
            let unit = sep / r;
            let nn = unit * unit.transpose();
            let block = nn * u2 + (Matrix2::identity() - nn) * u1_over_r;
            for a in 0..2 {
                for b in 0..2 {
                    let k = block[(a, b)];
                    h[(2 * i + a, 2 * i + b)] += k;
                    h[(2 * j + a, 2 * j + b)] += k;
                    h[(2 * i + a, 2 * j + b)] -= k;
                    h[(2 * j + a, 2 * i + b)] -= k;
                }
            }
        }
    }
    for (i, p) in positions.iter().enumerate() {
        let yy = 2 * i + 1;
        h[(yy, yy)] += packing.wall.curvature(p.y, eps[i], sigma);
        h[(yy, yy)] += packing.wall.curvature(packing.sim_box.ly - p.y, eps[i], sigma);
    }
    h
}

/// Mass-weighted dynamical matrix `M^-1/2 H M^-1/2`.
pub fn dynamical_matrix(h: &DMatrix<f64>, masses: &[f64]) -> DMatrix<f64> {
    let w: Vec<f64> = masses
        .iter()
        .flat_map(|m| {
            let s = 1.0 / m.sqrt();
            [s, s]
        })
        .collect();
    DMatrix::from_fn(h.nrows(), h.ncols(), |r, c| h[(r, c)] * w[r] * w[c])
}

pub fn eigenfrequencies(packing: &Packing) -> Result<SpectrumResult> {
    let h = hessian(packing)?;
    spectrum_from_hessian(&h, &packing.masses)
}

pub fn spectrum_from_hessian(h: &DMatrix<f64>, masses: &[f64]) -> Result<SpectrumResult> {
    let d = dynamical_matrix(h, masses);
    let mut eigenvalues: Vec<f64> = d.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    if let Some(&lowest) = eigenvalues.first() {
        if lowest <= -NEGATIVE_EIGEN_TOL {
            return Err(Error::NotAMinimum { eigenvalue: lowest });
        }
    }
    let frequencies: Vec<f64> = eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let cut = zero_mode_cut(&frequencies);
    let n_zero_modes = frequencies.iter().filter(|&&w| w <= cut).count();
    let band_gap = band_gap(&frequencies).ok();
    Ok(SpectrumResult {
        frequencies,
        band_gap,
        n_zero_modes,
    })
}

fn zero_mode_cut(frequencies: &[f64]) -> f64 {
    let max = frequencies.iter().cloned().fold(0.0, f64::max);
    ZERO_MODE_FRACTION * max
}

/// Widest gap between consecutive non-zero frequencies of a sorted list;
/// the lowest such gap wins ties.
pub fn band_gap(frequencies: &[f64]) -> Result<BandGap> {
    let cut = zero_mode_cut(frequencies);
    let finite: Vec<f64> = frequencies.iter().copied().filter(|&w| w > cut).collect();
    if finite.len() < 2 {
        return Err(Error::TooFewFrequencies(finite.len()));
    }
    let mut best = BandGap {
        lower: finite[0],
        upper: finite[1],
        width: finite[1] - finite[0],
    };
    for pair in finite.windows(2).skip(1) {
        let width = pair[1] - pair[0];
        if width > best.width {
            best = BandGap {
                lower: pair[0],
                upper: pair[1],
                width,
            };
        }
    }
    Ok(best)
}
