//! Event sequence analytics: ingestion of timestamped event logs, sequence
//! transforms (substitution, alignment, sorting), clustering, EventBox
//! summaries, a statistical report, a selection query language and a
//! session engine that ties them together behind a replayable action log.
//!
//! The numeric kernels (quantiles, Tukey fences, special functions,
//! least squares) are generic over [`num::Real`]; the aliases below fix
//! them to the `f64` scalar used by the data model.

pub mod engine;
pub mod error;
pub mod eventbox;
pub mod grouping;
pub mod ingest;
pub mod model;
pub mod num;
pub mod query;
pub mod stats;
pub mod transforms;

pub use error::{Error, ParseError, Result};

/// Scalar used by the data model and every public result type.
pub type Scalar = f64;
pub type FiveNumberSummary = eventbox::FiveNumber<Scalar>;
pub type TukeyFences = eventbox::Fences<Scalar>;
pub type LeastSquaresFit = stats::QrFit<Scalar>;
