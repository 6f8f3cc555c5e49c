//! Multimodal soil-moisture estimation.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! - [`domain`]: stations, measurements, dates, great-circle distance and seeded RNG streams
//! - [`ingestion`]: CSV loaders, the `EOPC` patch codec and the acquisition index
//! - [`matching`]: current-day / closest temporal matching of acquisitions to measurements
//! - [`features`]: band means, spectral indices, SAR features, dynamics, reanalysis lag stacks
//! - [`forest`]: CART regression trees and the bagged random forest
//! - [`evaluation`]: station-grouped K-fold cross-validation and R², RMSE, MAE
//! - [`experiments`]: the modality / lag / embedding grids, synthetic data and reports

pub mod domain;
pub mod error;
pub mod evaluation;
pub mod experiments;
pub mod features;
pub mod forest;
pub mod ingestion;
pub mod matching;

pub use error::{Error, Result};
