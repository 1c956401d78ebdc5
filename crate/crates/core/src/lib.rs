//! Super dense coding capacity of bipartite states sent through correlated
//! Pauli channels, for unitary and pre-processed (non-unitary) encodings.
//!
//! Module map:
//! - [`qmat`]: complex matrices, Hermitian eigensolver, entropies, partial trace
//! - [`states`]: density operators and resource states
//! - [`channels`]: displacement operators, Pauli and correlated Pauli channels, Kraus maps
//! - [`holevo`]: Holevo quantities, capacity formulas and their closed forms
//! - [`optimize`]: output-entropy minimization and the crossover curve
//! - [`verify`]: numerical identity suites used by the CLI

pub mod channels;
pub mod error;
pub mod holevo;
pub mod optimize;
pub mod qmat;
pub mod random;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
