//! Experiment runner: configuration, figure sweeps, claim checks and plots.

pub mod config;
pub mod figures;
pub mod plot;
pub mod table;
pub mod verify;
