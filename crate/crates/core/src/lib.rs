//! Clifford + kRz similarity transformations for approximately diagonalizing
//! qubit Hamiltonians, with a generalized stabilizer simulator, thermal
//! free-energy objectives and a dense reference backend.

pub mod bits;
pub mod circuit;
pub mod cli;
pub mod dense;
pub mod error;
pub mod genstab;
pub mod heisenberg;
pub mod io;
pub mod metrics;
pub mod opt;
pub mod pauli;
pub mod pulse;
pub mod tableau;
pub mod thermal;

pub use bits::Bits;
pub use error::{Error, Result};
pub use pauli::{Pauli, PauliString, PauliSum};
