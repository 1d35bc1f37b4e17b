//! Logic-gate measurements on a driven packing.
//!
//! Case labels follow the half-adder convention: `01` drives input 1 only,
//! `10` drives input 2 only.

pub mod signal;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{build_lattice, Genome, MaterialConfig, Packing, PortAssignment};
use crate::mechanics::{fire_relax, simulate_driven, DriveSpec, FireReport, RelaxConfig, SimConfig, Tone};
pub use signal::{base_period, common_fundamental, fourier_amplitude, AnalysisWindow};

/// Denominator floor in the fitness ratios.
pub const FITNESS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateSpec {
    pub omega_and: f64,
    pub omega_xor: f64,
    pub amplitude: f64,
    /// Derived from the lattice when absent.
    pub ports: Option<PortAssignment>,
    pub transient_fraction: f64,
}

impl Default for GateSpec {
    fn default() -> Self {
        Self {
            omega_and: 7.0,
            omega_xor: 10.0,
            amplitude: 1e-2,
            ports: None,
            transient_fraction: 0.5,
        }
    }
}

impl GateSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.omega_and > 0.0 && self.omega_xor > 0.0) || !self.omega_and.is_finite() || !self.omega_xor.is_finite() {
            return bad("gate frequencies must be positive and finite");
        }
        if self.omega_and == self.omega_xor {
            return bad("AND and XOR frequencies must differ");
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return bad("drive amplitude must be positive");
        }
        if !(0.0..1.0).contains(&self.transient_fraction) {
            return bad("transient_fraction must lie in [0, 1)");
        }
        Ok(())
    }

    pub fn resolve_ports(&self, material: &MaterialConfig) -> PortAssignment {
        self.ports.unwrap_or_else(|| PortAssignment::for_lattice(material))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InputCase {
    #[serde(rename = "00")]
    None,
    #[serde(rename = "01")]
    First,
    #[serde(rename = "10")]
    Second,
    #[serde(rename = "11")]
    Both,
}

impl InputCase {
    pub const ALL: [InputCase; 4] = [InputCase::None, InputCase::First, InputCase::Second, InputCase::Both];

    pub fn drives_first(self) -> bool {
        matches!(self, InputCase::First | InputCase::Both)
    }

    pub fn drives_second(self) -> bool {
        matches!(self, InputCase::Second | InputCase::Both)
    }

    pub fn active_inputs(self) -> usize {
        self.drives_first() as usize + self.drives_second() as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            InputCase::None => "00",
            InputCase::First => "01",
            InputCase::Second => "10",
            InputCase::Both => "11",
        }
    }
}

impl fmt::Display for InputCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for InputCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InputCase::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown input case {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessPair {
    pub and_ness: f64,
    pub xor_ness: f64,
}

impl FitnessPair {
    /// Assigned to genomes whose evaluation failed.
    pub const FAILED: FitnessPair = FitnessPair {
        and_ness: FITNESS_FLOOR,
        xor_ness: FITNESS_FLOOR,
    };

    pub fn as_array(&self) -> [f64; 2] {
        [self.and_ness, self.xor_ness]
    }
}

/// Single-input and both-input gains at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseGains {
    pub g01: f64,
    pub g10: f64,
    pub g11: f64,
}

pub fn and_ness(g: CaseGains) -> f64 {
    g.g11 / ((g.g10 + g.g01) / 2.0).max(FITNESS_FLOOR)
}

pub fn xor_ness(g: CaseGains) -> f64 {
    ((g.g10 + g.g01) / 2.0) / g.g11.max(FITNESS_FLOOR)
}

pub fn fitness_from_gains(at_and: CaseGains, at_xor: CaseGains) -> FitnessPair {
    FitnessPair {
        and_ness: and_ness(at_and),
        xor_ness: xor_ness(at_xor),
    }
}

/// Gain from a measured output amplitude; the denominator is the prescribed
/// drive amplitude summed over active inputs.
pub fn gain_from_amplitude(output: f64, case: InputCase, amplitude: f64) -> Result<f64> {
    match case.active_inputs() {
        0 => Err(Error::ZeroInputGain),
        n => Ok(output / (n as f64 * amplitude)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResponse {
    pub case: InputCase,
    pub amplitude: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    #[serde(skip)]
    pub series: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthTableResult {
    pub omega: f64,
    pub cases: Vec<CaseResponse>,
    pub dt: f64,
}

impl TruthTableResult {
    pub fn case(&self, case: InputCase) -> &CaseResponse {
        self.cases.iter().find(|c| c.case == case).expect("all four cases present")
    }

    pub fn amplitude(&self, case: InputCase) -> f64 {
        self.case(case).amplitude
    }

    /// `O11` above both single-input outputs.
    pub fn is_and_like(&self) -> bool {
        let o11 = self.amplitude(InputCase::Both);
        o11 > self.amplitude(InputCase::First) && o11 > self.amplitude(InputCase::Second)
    }

    /// Both single-input outputs above `O11`.
    pub fn is_xor_like(&self) -> bool {
        self.amplitude(InputCase::First).min(self.amplitude(InputCase::Second)) > self.amplitude(InputCase::Both)
    }

    /// Output series as CSV with one column per case.
    pub fn write_series_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let columns: Vec<&CaseResponse> = self.cases.iter().filter(|c| c.series.is_some()).collect();
        write!(out, "t")?;
        for c in &columns {
            write!(out, ",case_{}", c.case)?;
        }
        writeln!(out)?;
        let n = columns.iter().map(|c| c.series.as_ref().map_or(0, Vec::len)).min().unwrap_or(0);
        for k in 0..n {
            write!(out, "{}", k as f64 * self.dt)?;
            for c in &columns {
                write!(out, ",{}", c.series.as_ref().unwrap()[k])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfAdderCase {
    pub case: InputCase,
    /// Output amplitude at the AND frequency.
    pub carry: f64,
    /// Output amplitude at the XOR frequency.
    pub sum: f64,
    #[serde(skip)]
    pub series: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfAdderResult {
    pub omega_carry: f64,
    pub omega_sum: f64,
    pub cases: Vec<HalfAdderCase>,
    pub dt: f64,
}

impl HalfAdderResult {
    pub fn case(&self, case: InputCase) -> &HalfAdderCase {
        self.cases.iter().find(|c| c.case == case).expect("all four cases present")
    }
}

/// Everything needed to turn a genome into gate measurements.
#[derive(Debug, Clone)]
pub struct GateEvaluator {
    pub material: MaterialConfig,
    pub spec: GateSpec,
    pub sim: SimConfig,
    pub relax: RelaxConfig,
    ports: PortAssignment,
    lattice: Packing,
}

impl GateEvaluator {
    pub fn new(material: MaterialConfig, spec: GateSpec, sim: SimConfig, relax: RelaxConfig) -> Result<Self> {
        material.validate()?;
        spec.validate()?;
        sim.validate()?;
        relax.validate()?;
        let ports = spec.resolve_ports(&material);
        ports.validate(material.n_sites())?;
        let lattice = build_lattice(&material)?;
        sim.validate_for(&lattice.clone().with_genome(&Genome::ones(material.n_sites()), &material)?)?;
        Ok(Self {
            material,
            spec,
            sim,
            relax,
            ports,
            lattice,
        })
    }

    pub fn ports(&self) -> PortAssignment {
        self.ports
    }

    pub fn genome_len(&self) -> usize {
        self.material.n_sites()
    }

    pub fn relaxed(&self, genome: &Genome) -> Result<(Packing, FireReport)> {
        let packing = self.lattice.clone().with_genome(genome, &self.material)?;
        fire_relax(&packing, &self.relax)
    }

    fn drive(&self, case: InputCase, tones: &[Tone]) -> DriveSpec {
        let input = |on: bool| if on { tones.to_vec() } else { Vec::new() };
        DriveSpec::new()
            .with(self.ports.input_1, input(case.drives_first()))
            .with(self.ports.input_2, input(case.drives_second()))
    }

    /// Output `x` displacement series for one case and a set of input tones.
    pub fn output_series(&self, packing: &Packing, case: InputCase, tones: &[Tone]) -> Result<Vec<f64>> {
        let record = simulate_driven(packing, &self.drive(case, tones), &self.sim, &[self.ports.output])?;
        Ok(record.series.into_iter().next().expect("one probe"))
    }

    fn window(&self, omega: f64, drive: &[f64]) -> AnalysisWindow {
        AnalysisWindow {
            transient_fraction: self.spec.transient_fraction,
            base_period: base_period(omega, drive),
        }
    }

    fn tone(&self, omega: f64) -> Tone {
        Tone {
            amplitude: self.spec.amplitude,
            omega,
        }
    }

    fn single_tone_amplitude(&self, packing: &Packing, case: InputCase, omega: f64) -> Result<(f64, Vec<f64>)> {
        let series = self.output_series(packing, case, &[self.tone(omega)])?;
        let amp = fourier_amplitude(&series, self.sim.dt, omega, self.window(omega, &[omega]))?;
        Ok((amp, series))
    }

    pub fn gain(&self, genome: &Genome, case: InputCase, omega: f64) -> Result<f64> {
        if case == InputCase::None {
            return Err(Error::ZeroInputGain);
        }
        let (packing, _) = self.relaxed(genome)?;
        self.gain_on(&packing, case, omega)
    }

    fn gain_on(&self, packing: &Packing, case: InputCase, omega: f64) -> Result<f64> {
        let (amp, _) = self.single_tone_amplitude(packing, case, omega)?;
        gain_from_amplitude(amp, case, self.spec.amplitude)
    }

    fn gains_on(&self, packing: &Packing, omega: f64) -> Result<CaseGains> {
        Ok(CaseGains {
            g01: self.gain_on(packing, InputCase::First, omega)?,
            g10: self.gain_on(packing, InputCase::Second, omega)?,
            g11: self.gain_on(packing, InputCase::Both, omega)?,
        })
    }

    /// One relaxation and six driven simulations.
    pub fn evaluate(&self, genome: &Genome) -> Result<FitnessPair> {
        let (packing, _) = self.relaxed(genome)?;
        let at_and = self.gains_on(&packing, self.spec.omega_and)?;
        let at_xor = self.gains_on(&packing, self.spec.omega_xor)?;
        Ok(fitness_from_gains(at_and, at_xor))
    }

    /// Like [`evaluate`](Self::evaluate) but failures map to [`FitnessPair::FAILED`].
    pub fn fitness(&self, genome: &Genome) -> FitnessPair {
        match self.evaluate(genome) {
            Ok(f) if f.and_ness.is_finite() && f.xor_ness.is_finite() => f,
            _ => FitnessPair::FAILED,
        }
    }

    pub fn truth_table(&self, genome: &Genome, omega: f64, keep_series: bool) -> Result<TruthTableResult> {
        let (packing, _) = self.relaxed(genome)?;
        let mut cases = Vec::with_capacity(4);
        for case in InputCase::ALL {
            let (amplitude, series) = self.single_tone_amplitude(&packing, case, omega)?;
            let gain = match case {
                InputCase::None => None,
                _ => Some(gain_from_amplitude(amplitude, case, self.spec.amplitude)?),
            };
            cases.push(CaseResponse {
                case,
                amplitude,
                gain,
                series: keep_series.then_some(series),
            });
        }
        Ok(TruthTableResult {
            omega,
            cases,
            dt: self.sim.dt,
        })
    }

    /// Drives the active inputs with the sum of both gate tones.
    pub fn half_adder(&self, genome: &Genome, keep_series: bool) -> Result<HalfAdderResult> {
        let (packing, _) = self.relaxed(genome)?;
        let (w_c, w_s) = (self.spec.omega_and, self.spec.omega_xor);
        let tones = [self.tone(w_c), self.tone(w_s)];
        let mut cases = Vec::with_capacity(4);
        for case in InputCase::ALL {
            let series = self.output_series(&packing, case, &tones)?;
            let carry = fourier_amplitude(&series, self.sim.dt, w_c, self.window(w_c, &[w_c, w_s]))?;
            let sum = fourier_amplitude(&series, self.sim.dt, w_s, self.window(w_s, &[w_c, w_s]))?;
            cases.push(HalfAdderCase {
                case,
                carry,
                sum,
                series: keep_series.then_some(series),
            });
        }
        Ok(HalfAdderResult {
            omega_carry: w_c,
            omega_sum: w_s,
            cases,
            dt: self.sim.dt,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn evaluator() -> GateEvaluator {
        GateEvaluator::new(
            MaterialConfig::default(),
            GateSpec::default(),
            SimConfig::default(),
            RelaxConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn gain_examples() {
        assert!((gain_from_amplitude(0.02, InputCase::Both, 0.01).unwrap() - 1.0).abs() < 1e-15);
        assert!((gain_from_amplitude(0.005, InputCase::First, 0.01).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(gain_from_amplitude(0.1, InputCase::None, 0.01), Err(Error::ZeroInputGain));
        assert_eq!(evaluator().gain(&Genome::zeros(30), InputCase::None, 7.0), Err(Error::ZeroInputGain));
    }

    #[test]
    fn fitness_examples() {
        let g = CaseGains { g01: 0.5, g10: 0.5, g11: 2.0 };
        assert!((and_ness(g) - 4.0).abs() < 1e-15);
        let flat = CaseGains { g01: 0.7, g10: 0.7, g11: 0.7 };
        let f = fitness_from_gains(flat, flat);
        assert_eq!((f.and_ness, f.xor_ness), (1.0, 1.0));
        let dead = CaseGains { g01: 0.0, g10: 0.0, g11: 0.0 };
        let f = fitness_from_gains(dead, dead);
        assert!(f.and_ness.is_finite() && f.xor_ness.is_finite());
    }

    #[test]
    fn case_labels() {
        for case in InputCase::ALL {
            assert_eq!(case.label().parse::<InputCase>().unwrap(), case);
            assert_eq!(serde_json::to_string(&case).unwrap(), format!("\"{}\"", case.label()));
        }
        assert!(InputCase::First.drives_first() && !InputCase::First.drives_second());
        assert!("2".parse::<InputCase>().is_err());
    }

    #[test]
    fn spec_validation() {
        let mut spec = GateSpec::default();
        spec.omega_xor = spec.omega_and;
        assert!(spec.validate().is_err());
        let spec = GateSpec { amplitude: 0.0, ..GateSpec::default() };
        assert!(spec.validate().is_err());
        let spec = GateSpec { transient_fraction: 1.0, ..GateSpec::default() };
        assert!(spec.validate().is_err());
        assert!(GateSpec::default().validate().is_ok());
    }

    #[test]
    fn zero_input_is_silent() {
        let table = evaluator().truth_table(&Genome::zeros(30), 7.0, true).unwrap();
        let o00 = table.case(InputCase::None);
        assert!(o00.amplitude < 1e-12);
        assert!(o00.gain.is_none());
        assert!(o00.series.as_ref().unwrap().iter().all(|&x| x == 0.0));
        for case in [InputCase::First, InputCase::Second, InputCase::Both] {
            let r = table.case(case);
            assert!(r.amplitude.is_finite() && r.amplitude > 0.0);
            assert!(r.gain.unwrap() >= 0.0);
        }
        let mut csv = Vec::new();
        table.write_series_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("t,case_00,case_01,case_10,case_11\n"));
        assert_eq!(text.lines().count(), SimConfig::default().n_steps + 2);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let ev = evaluator();
        let genome: Genome = "010011010100011101010010110100".parse().unwrap();
        let a = ev.evaluate(&genome).unwrap();
        let b = ev.evaluate(&genome).unwrap();
        assert_eq!(a.and_ness.to_bits(), b.and_ness.to_bits());
        assert_eq!(a.xor_ness.to_bits(), b.xor_ness.to_bits());
        assert!(a.and_ness > 0.0 && a.xor_ness > 0.0);
    }

    #[test]
    fn evaluation_is_consistent_with_truth_tables() {
        let ev = evaluator();
        let genome: Genome = "110010011100100110011010110001".parse().unwrap();
        let f = ev.evaluate(&genome).unwrap();
        let gains = |w: f64| {
            let t = ev.truth_table(&genome, w, false).unwrap();
            let g = |c| t.case(c).gain.unwrap();
            CaseGains { g01: g(InputCase::First), g10: g(InputCase::Second), g11: g(InputCase::Both) }
        };
        let expected = fitness_from_gains(gains(7.0), gains(10.0));
        assert_eq!(f, expected);
        assert_eq!(ev.gain(&genome, InputCase::Both, 7.0).unwrap(), gains(7.0).g11);
    }

    #[test]
    fn mirror_symmetric_genome_has_symmetric_inputs() {
        // Five rows put input 1 (row 1) and input 2 (row 3) mirror images
        // of each other about the middle row, which holds the output. The
        // drive is kept small enough that no contact opens: at A = 1e-2 the
        // response is chaotic and the rounding-level asymmetry of the
        // mirrored coordinates grows to tens of percent in the gains.
        let material = MaterialConfig { lattice_rows: 5, ..MaterialConfig::default() };
        let spec = GateSpec { amplitude: 1e-5, ..GateSpec::default() };
        let ev = GateEvaluator::new(material.clone(), spec, SimConfig::default(), RelaxConfig::default()).unwrap();
        let ports = ev.ports();
        assert_eq!((ports.input_1, ports.input_2, ports.output), (5, 15, 14));
        let seed: Genome = "0110100101110010100111010".parse().unwrap();
        let genome = Genome::new(
            seed.bits()
                .iter()
                .zip(seed.mirror_rows(5).bits())
                .map(|(a, b)| *a || *b)
                .collect(),
        );
        assert_eq!(genome.mirror_rows(5), genome);
        for w in [7.0, 10.0] {
            let g01 = ev.gain(&genome, InputCase::First, w).unwrap();
            let g10 = ev.gain(&genome, InputCase::Second, w).unwrap();
            assert!((g01 - g10).abs() < 1e-6, "w={w}: {g01} vs {g10}");
        }
    }

    #[test]
    fn half_adder_all_soft() {
        let result = evaluator().half_adder(&Genome::zeros(30), false).unwrap();
        let c00 = result.case(InputCase::None);
        assert_eq!((c00.carry, c00.sum), (0.0, 0.0));
        for case in [InputCase::First, InputCase::Second, InputCase::Both] {
            let c = result.case(case);
            assert!(c.carry.is_finite() && c.sum.is_finite());
        }
    }
}
