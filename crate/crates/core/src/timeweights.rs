//! Completion-time weights.
//!
//! Each respondent gets a logistic-in-time probability of being a non-random
//! responder, anchored so that the fastest included respondent receives `w0`
//! and the median respondent `w50`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{fit_weighted_mle, WeightVector};
use crate::exec::{map_indexed, Execution};
use crate::model::{DesignParams, ModelSpec};
use crate::records::Respondent;

/// Default cutoff above which completion times are treated as timer failures.
pub const DEFAULT_CUTOFF_MINUTES: f64 = 15.0;
pub const DEFAULT_W0: f64 = 0.1;
pub const DEFAULT_W50: f64 = 0.9;
/// Anchor sets of the sensitivity grid.
pub const GRID_W0: [f64; 3] = [0.01, 0.1, 0.2];
pub const GRID_W50: [f64; 3] = [0.8, 0.9, 0.99];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeFilter {
    pub included: Vec<f64>,
    pub excluded: usize,
}

/// Drops times strictly above `cutoff`; included values are returned untouched.
pub fn filter_times(times: &[f64], cutoff: f64) -> Result<TimeFilter> {
    check_times(times.iter().copied())?;
    let included: Vec<f64> = times.iter().copied().filter(|&t| t <= cutoff).collect();
    Ok(TimeFilter { excluded: times.len() - included.len(), included })
}

fn check_times(times: impl Iterator<Item = f64>) -> Result<()> {
    for (index, t) in times.enumerate() {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Validation { index, message: format!("completion time must be positive, got {t}") });
        }
    }
    Ok(())
}

/// Respondent-level counterpart of [`filter_times`]: keeps respondents whose
/// time is at most `cutoff`. Respondents without a recorded time are kept.
pub fn filter_records(records: &[Respondent], cutoff: f64) -> Result<(Vec<Respondent>, usize)> {
    crate::records::validate(records)?;
    let kept: Vec<Respondent> = records
        .iter()
        .filter(|r| r.time_minutes.is_none_or(|t| t <= cutoff))
        .copied()
        .collect();
    let dropped = records.len() - kept.len();
    Ok((kept, dropped))
}

#[inline]
pub fn logit(w: f64) -> f64 {
    (w / (1.0 - w)).ln()
}

/// Logistic weight parameters together with the anchors that produced them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub beta0: f64,
    pub beta: f64,
    pub t0: f64,
    pub t50: f64,
    pub w0: f64,
    pub w50: f64,
}

/// Solves `logit(w0) = beta0 + beta * t0`, `logit(w50) = beta0 + beta * t50`.
pub fn solve_beta(t0: f64, t50: f64, w0: f64, w50: f64) -> Result<WeightParams> {
    for w in [w0, w50] {
        if w <= 0.0 || w >= 1.0 {
            return Err(Error::InfiniteLogit(w));
        }
    }
    if t0 == t50 {
        return Err(Error::SingularSystem(t0));
    }
    let beta = (logit(w50) - logit(w0)) / (t50 - t0);
    let beta0 = logit(w0) - beta * t0;
    Ok(WeightParams { beta0, beta, t0, t50, w0, w50 })
}

/// `1 / (1 + exp(-(beta0 + beta t)))`, evaluated without overflow.
pub fn weight(t: f64, params: &WeightParams) -> f64 {
    let z = params.beta0 + params.beta * t;
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Median with the midpoint convention for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Fastest and median completion time of respondents (after any filtering).
pub fn anchor_times(records: &[Respondent]) -> Result<(f64, f64)> {
    let times: Vec<f64> = records.iter().filter_map(|r| r.time_minutes).collect();
    check_times(times.iter().copied())?;
    let t50 = median(&times).ok_or_else(|| Error::InsufficientData("no completion times recorded".into()))?;
    let t0 = times.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((t0, t50))
}

/// Anchors the logistic at the sample's fastest and median times and weights
/// every respondent. All respondents must carry a time.
pub fn weights_for(records: &[Respondent], w0: f64, w50: f64) -> Result<(WeightParams, WeightVector)> {
    if let Some(index) = records.iter().position(|r| r.time_minutes.is_none()) {
        return Err(Error::Validation { index, message: "weighting requires a completion time".into() });
    }
    let (t0, t50) = anchor_times(records)?;
    let params = solve_beta(t0, t50, w0, w50)?;
    let w = records.iter().map(|r| weight(r.time_minutes.unwrap_or(t50), &params)).collect();
    Ok((params, WeightVector::new(w)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub w0: f64,
    pub w50: f64,
    /// Weighted prevalence estimate, or the error message for this cell.
    pub pi_hat: std::result::Result<f64, String>,
    pub theta_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityGrid {
    pub w0: Vec<f64>,
    pub w50: Vec<f64>,
    /// Row-major: `cells[i * w50.len() + j]` uses `w0[i]` and `w50[j]`.
    pub cells: Vec<GridCell>,
}

impl SensitivityGrid {
    pub fn cell(&self, w0: f64, w50: f64) -> Option<&GridCell> {
        self.cells.iter().find(|c| c.w0 == w0 && c.w50 == w50)
    }

    /// Largest difference between any two successful cells.
    pub fn spread(&self) -> f64 {
        let ok: Vec<f64> = self.cells.iter().filter_map(|c| c.pi_hat.as_ref().ok().copied()).collect();
        let hi = ok.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = ok.iter().copied().fold(f64::INFINITY, f64::min);
        if ok.is_empty() {
            f64::NAN
        } else {
            hi - lo
        }
    }
}

/// Weighted estimate for one anchor pair.
pub fn weighted_fit(
    records: &[Respondent],
    design: &DesignParams,
    spec: &ModelSpec,
    w0: f64,
    w50: f64,
) -> Result<crate::estimation::FitResult> {
    let (_, weights) = weights_for(records, w0, w50)?;
    fit_weighted_mle(spec, records, &weights, design)
}

/// Weighted estimates over the default anchor sets. `records` should already
/// be time-filtered; `spec` carries the fixed gamma. A failing cell records
/// its error without aborting the grid.
pub fn sensitivity_grid(
    records: &[Respondent],
    design: &DesignParams,
    spec: &ModelSpec,
    exec: Execution,
) -> SensitivityGrid {
    sensitivity_grid_with(records, design, spec, &GRID_W0, &GRID_W50, exec)
}

pub fn sensitivity_grid_with(
    records: &[Respondent],
    design: &DesignParams,
    spec: &ModelSpec,
    w0s: &[f64],
    w50s: &[f64],
    exec: Execution,
) -> SensitivityGrid {
    let cols = w50s.len();
    let cells = map_indexed(exec, w0s.len() * cols, |k| {
        let (w0, w50) = (w0s[k / cols], w50s[k % cols]);
        let fit = weighted_fit(records, design, spec, w0, w50);
        GridCell {
            w0,
            w50,
            theta_hat: fit.as_ref().ok().and_then(|f| f.theta_hat),
            pi_hat: fit.map(|f| f.pi_hat).map_err(|e| e.to_string()),
        }
    });
    SensitivityGrid { w0: w0s.to_vec(), w50: w50s.to_vec(), cells }
}
