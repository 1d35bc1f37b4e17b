//! Separating two drive tones in a sampled signal.

use granular_gates::gate::{base_period, fourier_amplitude, AnalysisWindow};

fn main() -> granular_gates::Result<()> {
    let dt = 5e-3;
    let series: Vec<f64> = (0..20_001)
        .map(|k| {
            let t = k as f64 * dt;
            0.3 + 0.01 * (7.0 * t).sin() + 0.004 * (10.0 * t + 1.0).cos()
        })
        .collect();
    let window = AnalysisWindow {
        transient_fraction: 0.5,
        base_period: base_period(7.0, &[7.0, 10.0]),
    };
    for omega in [7.0, 10.0, 8.5] {
        println!("omega {omega:4}: {:.6e}", fourier_amplitude(&series, dt, omega, window)?);
    }
    Ok(())
}
