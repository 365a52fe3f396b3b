//! Mining and forecasting toolkit for incubating open-source projects.
//!
//! The pipeline turns raw activity traces (mailing-list archives and commit
//! records) into monthly socio-technical feature sequences, forecasts each
//! project's graduation probability with a recurrent classifier, explains
//! the forecasts with a local linear surrogate, and raises downturn alerts
//! with feature-targeted corrective actions.
//!
//! Stages communicate through files only; see the `gradcast` binary for the
//! command-line orchestration.

pub mod error;
pub mod features;
pub mod identity;
pub mod ingest;
pub mod networks;
pub mod types;

pub use error::{Error, Result};
