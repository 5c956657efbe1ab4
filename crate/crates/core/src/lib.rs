//! Compiler for CZ circuits on reconfigurable neutral-atom grids.
//!
//! The pipeline layers a circuit, splits it into subcircuits whose interaction
//! graphs embed in the grid, runs each subcircuit in place and shuttles atoms
//! between consecutive embeddings.

pub mod arch;
pub mod circuit;
pub mod divide;
pub mod embed;
pub mod fidelity;
pub mod generate;
pub mod graph;
pub mod route;
pub mod schedule;

pub use arch::{Factor, GridArch, GridPoint};
pub use circuit::{parse_qasm, CzCircuit, CzGate};
pub use embed::Mapping;
pub use fidelity::{FidelityReport, HardwareParams, TransferTimeModel};
pub use graph::Graph;
pub use schedule::{compile, verify_schedule, CompileOptions, Counters, ExecMode, Schedule};
