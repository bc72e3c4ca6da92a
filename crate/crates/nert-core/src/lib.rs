//! Implicit neural representations with a factored periodic/scale decoder,
//! plus SIREN and FFN baselines, benchmark generators, time-series ingestion
//! and masking, full-batch training, latent modulation, and evaluation.

pub mod adam;
pub mod coords;
pub mod dataset;
pub mod error;
pub mod rng;
pub mod runner;
pub mod eval;
pub mod ingest;
pub mod models;
pub mod modulation;
pub mod presets;
pub mod synthetic;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
