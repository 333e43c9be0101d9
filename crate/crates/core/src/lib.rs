//! Prevalence estimation for Extended Crosswise Model surveys with
//! corrections for one-saying and random answering.
//!
//! The crate covers the response models, moment and maximum-likelihood
//! estimation, calibration of the random-answer rate from a control item,
//! completion-time weights, percentile bootstrap intervals and a simulator
//! for synthetic respondent populations.

pub mod bootstrap;
pub mod calibration;
pub mod error;
pub mod estimation;
pub mod exec;
pub mod io;
pub mod model;
mod optimize;
pub mod pipeline;
pub mod records;
pub mod simulator;
pub mod timeweights;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{DesignParams, ModelKind, ModelParams, ModelSpec, ResponseProbs};
pub use records::{Answer, ControlDesign, ControlResponse, Respondent, Subsample};
