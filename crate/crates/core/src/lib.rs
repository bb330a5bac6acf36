//! Atom-surface dispersion forces: Casimir-Polder attraction and quantum
//! friction above a Drude half-space, in Markovian and non-Markovian form.

pub mod casimir_polder;
pub mod error;
pub mod friction;
pub mod green;
pub mod material;
pub mod polarizability;
pub mod quad;
pub mod scenario;
pub mod selftest;
pub mod spectra;
pub mod tensor;
pub mod units;

pub use error::{DispersiaError, Result};
pub use tensor::ComplexTensor3;
