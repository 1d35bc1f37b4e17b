//! Single-frequency response amplitudes.
//!
//! The amplitude at `w` is the projection `2/T |int x(t) e^{-iwt} dt|` over
//! a window holding a whole number of base periods, so a pure tone at `w`
//! returns its amplitude and commensurate tones at other frequencies
//! vanish. The window rarely ends on a sample, so the integral uses local
//! six-point Lagrange interpolants, including a fractional final interval.

use crate::error::{Error, Result};

const STENCIL: usize = 6;
/// Interior weights of the centered six-point rule over one interval.
const CENTERED: [f64; STENCIL] = [
    11.0 / 1440.0,
    -93.0 / 1440.0,
    802.0 / 1440.0,
    802.0 / 1440.0,
    -93.0 / 1440.0,
    11.0 / 1440.0,
];
/// Largest denominator tried when looking for a common fundamental.
const MAX_RATIO_DENOMINATOR: usize = 1000;
const RATIO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisWindow {
    /// Leading fraction of the series discarded as transient.
    pub transient_fraction: f64,
    /// The window is cut to a whole number of these.
    pub base_period: f64,
}

/// Base period for reading out `omega` from a response driven at `drive`:
/// `2 pi / gcd` when the drive frequencies share a fundamental, otherwise
/// `2 pi / omega`.
pub fn base_period(omega: f64, drive: &[f64]) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut all: Vec<f64> = drive.to_vec();
    if !all.iter().any(|&w| (w - omega).abs() <= RATIO_TOL * omega) {
        all.push(omega);
    }
    match common_fundamental(&all) {
        Some(w0) => two_pi / w0,
        None => two_pi / omega,
    }
}

/// Largest `w0` with every frequency an integer multiple of it.
pub fn common_fundamental(omegas: &[f64]) -> Option<f64> {
    let lowest = omegas.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(lowest > 0.0 && lowest.is_finite()) {
        return None;
    }
    (1..=MAX_RATIO_DENOMINATOR).find_map(|q| {
        let w0 = lowest / q as f64;
        omegas
            .iter()
            .all(|&w| {
                let ratio = w / w0;
                (ratio - ratio.round()).abs() <= RATIO_TOL * ratio
            })
            .then_some(w0)
    })
}

pub fn fourier_amplitude(series: &[f64], dt: f64, omega: f64, window: AnalysisWindow) -> Result<f64> {
    let start = (window.transient_fraction * series.len() as f64).floor() as usize;
    let kept = &series[start.min(series.len())..];
    let available = kept.len().saturating_sub(1) as f64 * dt;
    let period = window.base_period;
    let periods = (available / period * (1.0 + 1e-12)).floor();
    if periods < 1.0 || kept.len() < STENCIL {
        return Err(Error::WindowTooShort { available, period });
    }
    let span = periods * period;
    let weights = window_weights(kept.len(), (span / dt).min((kept.len() - 1) as f64));
    let (mut re, mut im) = (0.0, 0.0);
    for (k, (&w, &x)) in weights.iter().zip(kept).enumerate() {
        if w == 0.0 {
            continue;
        }
        let (s, c) = (omega * (start + k) as f64 * dt).sin_cos();
        re += w * x * c;
        im -= w * x * s;
    }
    Ok(2.0 / span * dt * re.hypot(im))
}

/// Quadrature weights, in units of the sample spacing, for integrating over
/// `[0, span]` from `n` uniform samples.
fn window_weights(n: usize, span: f64) -> Vec<f64> {
    let mut weights = vec![0.0; n];
    let mut full = span.floor();
    if span - full > 1.0 - 1e-9 {
        full += 1.0;
    }
    let full = (full as usize).min(n - 1);
    let frac = (span - full as f64).max(0.0);
    let mut add = |k: usize, length: f64| {
        let first = k.saturating_sub(2).min(n - STENCIL);
        let local = (k - first) as f64;
        if k >= 2 && first == k - 2 && length == 1.0 {
            for (j, w) in CENTERED.iter().enumerate() {
                weights[first + j] += w;
            }
        } else {
            for (j, w) in lagrange_integrals(local, local + length).iter().enumerate() {
                weights[first + j] += w;
            }
        }
    };
    for k in 0..full {
        add(k, 1.0);
    }
    if frac > 1e-12 {
        add(full, frac);
    }
    weights
}

/// Integrals over `[a, b]` of the Lagrange basis on nodes `0..STENCIL`.
fn lagrange_integrals(a: f64, b: f64) -> [f64; STENCIL] {
    let mut out = [0.0; STENCIL];
    for (j, slot) in out.iter_mut().enumerate() {
        // coefficients of prod_{k != j} (u - k) / (j - k), lowest power first
        let mut coeffs = [0.0; STENCIL];
        coeffs[0] = 1.0;
        let mut degree = 0;
        for k in (0..STENCIL).filter(|&k| k != j) {
            let scale = 1.0 / (j as f64 - k as f64);
            for p in (0..=degree + 1).rev() {
                let shifted = if p > 0 { coeffs[p - 1] } else { 0.0 };
                coeffs[p] = (shifted - k as f64 * coeffs[p]) * scale;
            }
            degree += 1;
        }
        *slot = coeffs
            .iter()
            .enumerate()
            .map(|(p, c)| c * (b.powi(p as i32 + 1) - a.powi(p as i32 + 1)) / (p as f64 + 1.0))
            .sum();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sampled(f: impl Fn(f64) -> f64, dt: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| f(k as f64 * dt)).collect()
    }

    fn full(period: f64) -> AnalysisWindow {
        AnalysisWindow {
            transient_fraction: 0.0,
            base_period: period,
        }
    }

    #[test]
    fn centered_weights_match_generic_rule() {
        let generic = lagrange_integrals(2.0, 3.0);
        for (a, b) in generic.iter().zip(CENTERED) {
            assert!((a - b).abs() < 1e-13, "{generic:?}");
        }
    }

    #[test]
    fn weights_integrate_polynomials_exactly() {
        for span in [10.0, 37.25, 200.731] {
            let n = span as usize + 3;
            let w = window_weights(n, span);
            for p in 0..6 {
                let approx: f64 = w.iter().enumerate().map(|(k, w)| w * (k as f64).powi(p)).sum();
                let exact = span.powi(p + 1) / (p as f64 + 1.0);
                assert!(((approx - exact) / exact).abs() < 1e-12, "p={p} span={span}");
            }
        }
    }

    #[test]
    fn pure_tone_recovered() {
        let dt = 5e-3;
        let x = sampled(|t| 0.01 * (7.0 * t).sin(), dt, 10_001);
        let a = fourier_amplitude(&x, dt, 7.0, full(2.0 * PI / 7.0)).unwrap();
        assert!((a - 0.01).abs() < 1e-9, "{a}");
    }

    #[test]
    fn commensurate_tones_separate() {
        let dt = 5e-3;
        let x = sampled(|t| 0.01 * (7.0 * t).sin() + 0.02 * (10.0 * t).sin(), dt, 10_001);
        let period = base_period(7.0, &[7.0, 10.0]);
        assert!((period - 2.0 * PI).abs() < 1e-12);
        let a7 = fourier_amplitude(&x, dt, 7.0, full(period)).unwrap();
        let a10 = fourier_amplitude(&x, dt, 10.0, full(period)).unwrap();
        assert!((a7 - 0.01).abs() < 1e-9, "{a7}");
        assert!((a10 - 0.02).abs() < 1e-9, "{a10}");
    }

    #[test]
    fn phase_does_not_matter() {
        let dt = 5e-3;
        let x = sampled(|t| 0.003 * (7.0 * t + 1.1).cos() + 0.5, dt, 10_001);
        let window = AnalysisWindow {
            transient_fraction: 0.5,
            base_period: 2.0 * PI / 7.0,
        };
        let a = fourier_amplitude(&x, dt, 7.0, window).unwrap();
        assert!((a - 0.003).abs() < 1e-9, "{a}");
    }

    #[test]
    fn constant_has_no_tone() {
        let x = vec![0.3; 5000];
        let a = fourier_amplitude(&x, 5e-3, 7.0, full(2.0 * PI / 7.0)).unwrap();
        assert!(a < 1e-12);
    }

    #[test]
    fn short_window_rejected() {
        let x = vec![0.0; 100];
        assert!(matches!(
            fourier_amplitude(&x, 5e-3, 7.0, full(2.0 * PI / 7.0)),
            Err(Error::WindowTooShort { .. })
        ));
    }

    #[test]
    fn fundamentals() {
        assert!((common_fundamental(&[7.0, 10.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((common_fundamental(&[6.0, 9.0]).unwrap() - 3.0).abs() < 1e-12);
        assert!(common_fundamental(&[1.0, 2f64.sqrt()]).is_none());
        assert!((base_period(2f64.sqrt(), &[1.0, 2f64.sqrt()]) - 2.0 * PI / 2f64.sqrt()).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn amplitude_is_linear(scale in -50.0f64..50.0, phase in 0.0f64..6.3) {
                let dt = 5e-3;
                let x = sampled(|t| 0.01 * (7.0 * t + phase).sin() + 0.004 * (3.3 * t).cos(), dt, 4001);
                let window = AnalysisWindow { transient_fraction: 0.25, base_period: 2.0 * PI / 7.0 };
                let base = fourier_amplitude(&x, dt, 7.0, window).unwrap();
                let scaled: Vec<f64> = x.iter().map(|v| v * scale).collect();
                let a = fourier_amplitude(&scaled, dt, 7.0, window).unwrap();
                prop_assert!((a - scale.abs() * base).abs() <= 1e-13 * base.max(1e-300) * scale.abs().max(1.0));
            }
        }
    }
}
