//! Open-system analysis of the measurement-free teleportation circuit.
//!
//! The three-qubit register (system `S`, environment `E1`, `E2`) is driven
//! through the teleportation gates under two time interpolations. From the
//! resulting one-qubit dynamical maps the crate derives the effective channel,
//! the BLP, RHP and LFS non-Markovianity measures and the system–environment
//! correlations (log-negativity, classical correlations, discord).

pub mod channel;
pub mod correlations;
pub mod error;
pub mod nonmarkov;
pub mod qmath;
pub mod register;

pub use error::{Error, Result};
