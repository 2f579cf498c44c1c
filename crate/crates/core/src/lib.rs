//! Reduction of integer factoring to SAT through residue-number circuits.
//!
//! The pipeline runs from [`numgen::make_instance`] through a plan
//! ([`crt::preset_or_plan`]) and a test circuit
//! ([`reducer::build_crt_test_circuit`]) to a formula
//! ([`cnf::tseitin_extended`], [`cnf::to_4cnf`]).

pub mod blocks;
pub mod circuit;
pub mod cnf;
pub mod crt;
pub mod numgen;
pub mod pipeline;
pub mod reducer;

pub use circuit::{Circuit, CircuitBuilder, Signal, SizeReport, Wire};
pub use cnf::{CnfFormula, ExtendedFormula, Formula, Lit};
pub use crt::CrtPlan;
pub use numgen::{FactorInstance, Witness};
pub use reducer::{Reduction, ReductionKind};

pub const GENERATOR_VERSION: &str = env!("CARGO_PKG_VERSION");
