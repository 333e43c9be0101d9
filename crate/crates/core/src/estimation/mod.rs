//! Moment estimators, (weighted) maximum likelihood, the G² goodness-of-fit
//! test and the expected bias of the uncorrected ECWM estimator.

mod bias;
mod counts;
mod gof;
mod mle;
mod moment;

use serde::{Deserialize, Serialize};

pub use bias::{expected_bias, BiasExpectation};
pub use counts::ResponseCounts;
pub use gof::{chi_square_sf, gof_g2, Gof};
pub use mle::{fit_mle, fit_mle_with, fit_weighted_mle, log_likelihood, Optimizer};
pub use moment::{moment_ecwm_ra, moment_onesayers_ra, moment_theta};

use crate::error::{Error, Result};
use crate::model::ModelKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Moment,
    Mle,
    WeightedMle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: ModelKind,
    pub pi_hat: f64,
    /// Present for the one-sayers models.
    pub theta_hat: Option<f64>,
    pub gamma_fixed: f64,
    pub loglik: f64,
    pub g2: f64,
    pub df: usize,
    pub p_value: f64,
    pub method: FitMethod,
    /// The raw moment estimate left the admissible region and was clipped.
    pub clipped: bool,
    /// The estimate sits on the edge of the admissible region.
    pub boundary: bool,
}

/// Per-respondent probabilities of being a non-random responder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(0.0..=1.0).contains(*w)) {
            return Err(Error::Validation {
                index: i,
                message: format!("weight {w} is outside [0, 1]"),
            });
        }
        Ok(Self(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Clips `x` into `[lo, hi]`, reporting whether it moved.
pub(crate) fn clip(x: f64, lo: f64, hi: f64) -> (f64, bool) {
    if x < lo {
        (lo, true)
    } else if x > hi {
        (hi, true)
    } else {
        (x, false)
    }
}

const BOUNDARY_TOL: f64 = 1e-9;

pub(crate) fn on_boundary(pi: f64, theta: Option<f64>, theta_max: f64) -> bool {
    let edge = |x: f64, lo: f64, hi: f64| (x - lo).abs() < BOUNDARY_TOL || (hi - x).abs() < BOUNDARY_TOL;
    edge(pi, 0.0, 1.0) || theta.is_some_and(|t| edge(t, 0.0, theta_max))
}
