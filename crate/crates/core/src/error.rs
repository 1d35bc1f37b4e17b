use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("genome length {found} does not match lattice size {expected}")]
    GenomeLength { expected: usize, found: usize },

    #[error("invalid genome character {0:?} (expected '0' or '1')")]
    GenomeChar(char),

    #[error("FIRE did not converge after {iterations} iterations (max force {max_force:e})")]
    NotConverged { iterations: usize, max_force: f64 },

    #[error("packing is not relaxed (max force {max_force:e})")]
    NotRelaxed { max_force: f64 },

    #[error("integration diverged at step {step} (particle {particle})")]
    Diverged { step: usize, particle: usize },

    #[error("configuration is not an energy minimum (eigenvalue {eigenvalue:e})")]
    NotAMinimum { eigenvalue: f64 },

    #[error("band gap needs at least two non-zero frequencies, found {0}")]
    TooFewFrequencies(usize),

    #[error("analysis window of {available} time units is shorter than one period ({period})")]
    WindowTooShort { available: f64, period: f64 },

    #[error("gain undefined for zero input")]
    ZeroInputGain,

    #[error("index {index} out of range for {n} particles")]
    IndexOutOfRange { index: usize, n: usize },
}
