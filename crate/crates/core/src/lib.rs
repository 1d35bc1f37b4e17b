//! Granular metamaterial logic gates.
//!
//! A two-dimensional packing of soft and stiff disks on a hexagonal lattice
//! is driven sinusoidally at two input particles and read out at a third.
//! Depending on the drive frequency the same material can behave like an
//! AND gate or an XOR gate. This crate contains:
//!
//! - [`lattice`]: lattice construction and genome decoding,
//! - [`mechanics`]: linear-spring contacts, FIRE relaxation and driven
//!   velocity-Verlet dynamics,
//! - [`spectrum`]: Hessian, eigenfrequencies and band gaps,
//! - [`gate`]: single-frequency response amplitudes, gains, AND-ness and
//!   XOR-ness, truth tables and the two-tone half adder,
//! - [`evolve`]: NSGA-II over genomes and the random-search baseline,
//! - [`cli`]: configuration files, run manifests and the commands behind the
//!   `granular-gates` binary.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod cli;
pub mod error;
pub mod evolve;
pub mod gate;
pub mod lattice;
pub mod mechanics;
pub mod spectrum;

pub use error::{Error, Result};
pub use lattice::{build_lattice, decode_genome, Genome, MaterialConfig, Packing, PortAssignment};
