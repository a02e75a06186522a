pub mod curve;
pub mod error;
pub mod matrix;
pub mod scalar;
pub mod subspace;
pub mod transfer;
pub mod kernel;
pub mod par;
pub mod report;
pub mod extension;
pub mod rng;
pub mod uniqueness;
pub mod instance;
pub mod cli;
