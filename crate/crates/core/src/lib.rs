//! Quality-degradation attacks on tabular synthetic-data pipelines, with
//! native generators, fidelity metrics, downstream classifiers and an
//! experiment runner.

pub mod attacks;
pub mod downstream;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod metrics;
pub mod rng;
pub mod tabular;

pub use error::{Error, Result};
pub use rng::Seed;
