//! Estimating the share of random responders from the control item.
//!
//! The control statement has a known truth and is paired with a
//! quasi-randomized innocuous statement, so every respondent's correct answer
//! is known. Random responders miss it half the time; respondents who do not
//! know the true answer (share `phi`) miss it too, so `e_c = gamma / 2 + phi`.
//! The naive rule `gamma = 2 e_c` is valid only when `phi = 0`; the delta
//! procedure compares fits with and without the control-incorrect respondents
//! to isolate the random-answer part.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{fit_mle, FitResult, ResponseCounts};
use crate::model::{DesignParams, ModelKind, ModelSpec};
use crate::records::Respondent;

/// Bisection stops once the bracket is narrower than this.
pub const GAMMA_TOL: f64 = 1e-12;
pub const MAX_BISECTIONS: usize = 80;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlOutcome {
    /// Per-record correctness, `None` where the record has no control item.
    pub correct: Vec<Option<bool>>,
    pub e_c: f64,
    pub n_c: usize,
    pub n_errors: usize,
}

pub fn control_error_rate(records: &[Respondent]) -> Result<ControlOutcome> {
    let correct: Vec<Option<bool>> = records.iter().map(Respondent::control_correct).collect();
    let n_c = correct.iter().flatten().count();
    let n_errors = correct.iter().flatten().filter(|c| !**c).count();
    if n_c == 0 {
        return Err(Error::InsufficientData("no respondents answered the control item".into()));
    }
    Ok(ControlOutcome { correct, e_c: n_errors as f64 / n_c as f64, n_c, n_errors })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMethod {
    Naive2ec,
    DeltaPi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GammaFlags {
    /// `2 e_c` exceeded one.
    pub truncated: bool,
    /// Excluding control-incorrect respondents raised the estimate.
    pub negative_delta: bool,
    /// No gamma in the admissible range reproduces the target.
    pub boundary: bool,
    /// Every gamma reproduces the target (estimate at 0.5).
    pub degenerate: bool,
    /// `gamma_hat > 2 e_c`, which the mixture identity does not allow.
    pub exceeds_naive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaPi {
    pub pi_in: f64,
    pub pi_out: f64,
    pub delta_pi: f64,
    /// `pi_out - delta_pi`.
    pub pi_ra_target: f64,
    /// One-sayer share from the all-respondents fit (one-sayers base only).
    pub theta_hat: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    pub gamma_hat: f64,
    pub method: GammaMethod,
    pub e_c: f64,
    /// Ignorance share implied by the mixture identity, `e_c - gamma_hat / 2`.
    pub phi_implied: f64,
    pub delta: Option<DeltaPi>,
    pub flags: GammaFlags,
}

/// `gamma = min(2 e_c, 1)`; assumes every respondent knows the control truth.
pub fn gamma_naive(outcome: &ControlOutcome) -> GammaEstimate {
    let raw = 2.0 * outcome.e_c;
    let gamma_hat = raw.min(1.0);
    GammaEstimate {
        gamma_hat,
        method: GammaMethod::Naive2ec,
        e_c: outcome.e_c,
        phi_implied: outcome.e_c - 0.5 * gamma_hat,
        delta: None,
        flags: GammaFlags { truncated: raw > 1.0, ..Default::default() },
    }
}

/// Delta procedure: fit `base` with all respondents (`pi_in`) and without the
/// control-incorrect ones (`pi_out`). Exclusion removes about half of the
/// random responders, so the corrected target is `pi_out - (pi_in - pi_out)`;
/// gamma is the value that makes the fixed-gamma RA model reproduce that
/// target on the full data.
pub fn gamma_delta_pi(records: &[Respondent], design: &DesignParams, base: ModelKind) -> Result<GammaEstimate> {
    let base_spec = match base {
        ModelKind::Ecwm => ModelSpec::ecwm(),
        ModelKind::OneSayers => ModelSpec::one_sayers(),
        other => {
            return Err(Error::Domain(format!("delta calibration needs ECWM or one-sayers, got {}", other.name())))
        }
    };
    let outcome = control_error_rate(records)?;
    let counts_in = ResponseCounts::from_respondents(records);
    let counts_out = ResponseCounts::from_respondents(
        records.iter().zip(&outcome.correct).filter(|(_, c)| **c != Some(false)).map(|(r, _)| r),
    );
    let fit_in = fit_mle(&base_spec, &counts_in, design)?;
    let fit_out = fit_mle(&base_spec, &counts_out, design)?;
    let delta_pi = fit_in.pi_hat - fit_out.pi_hat;
    let pi_ra_target = fit_out.pi_hat - delta_pi;

    let mut flags = GammaFlags::default();
    let gamma_hat = if delta_pi < 0.0 {
        flags.negative_delta = true;
        0.0
    } else if delta_pi == 0.0 {
        0.0
    } else {
        let solved = solve_gamma_for_target(&counts_in, design, base, pi_ra_target)?;
        flags.boundary = solved.boundary;
        flags.degenerate = solved.degenerate;
        solved.gamma
    };
    flags.exceeds_naive = gamma_hat > 2.0 * outcome.e_c;

    Ok(GammaEstimate {
        gamma_hat,
        method: GammaMethod::DeltaPi,
        e_c: outcome.e_c,
        phi_implied: outcome.e_c - 0.5 * gamma_hat,
        delta: Some(DeltaPi { pi_in: fit_in.pi_hat, pi_out: fit_out.pi_hat, delta_pi, pi_ra_target, theta_hat: fit_in.theta_hat }),
        flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSolve {
    pub gamma: f64,
    /// Estimate of the fixed-gamma fit at `gamma`.
    pub pi_hat: f64,
    pub boundary: bool,
    pub degenerate: bool,
}

/// Finds the fixed gamma for which the RA variant of `base` fitted to
/// `counts` returns `pi_target`. The fitted estimate moves monotonically away
/// from 0.5 as gamma grows, so bisection on `[0, 1 - theta_hat]` applies.
/// `base` may name either the plain model or its RA variant.
pub fn solve_gamma_for_target(
    counts: &ResponseCounts,
    design: &DesignParams,
    base: ModelKind,
    pi_target: f64,
) -> Result<GammaSolve> {
    if !(0.0..=1.0).contains(&pi_target) {
        return Err(Error::Domain(format!("target prevalence {pi_target} is outside [0, 1]")));
    }
    let family = match base {
        ModelKind::Ecwm | ModelKind::EcwmRa => ModelSpec::ecwm(),
        ModelKind::OneSayers | ModelKind::OneSayersRa => ModelSpec::one_sayers(),
        ModelKind::Cwm => return Err(Error::Domain("CWM has no random-answer variant".into())),
    };
    let fit_at = |gamma: f64| -> Result<FitResult> { fit_mle(&family.with_random_answering(gamma)?, counts, design) };

    let fit0 = fit_at(0.0)?;
    let f0 = fit0.pi_hat - pi_target;
    if f0.abs() <= 1e-12 {
        let degenerate = (fit0.pi_hat - 0.5).abs() <= 1e-12;
        return Ok(GammaSolve { gamma: 0.0, pi_hat: fit0.pi_hat, boundary: false, degenerate });
    }

    let theta0 = fit0.theta_hat.unwrap_or(0.0);
    let mut hi = (1.0 - theta0 - 1e-9).max(0.0);
    let mut f_hi = fit_at(hi)?.pi_hat - pi_target;
    if f0.signum() == f_hi.signum() {
        let (gamma, f) = if f0.abs() <= f_hi.abs() { (0.0, f0) } else { (hi, f_hi) };
        return Ok(GammaSolve { gamma, pi_hat: f + pi_target, boundary: true, degenerate: false });
    }

    let (mut lo, mut f_lo) = (0.0, f0);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= GAMMA_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = fit_at(mid)?.pi_hat - pi_target;
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            f_lo = 0.0;
            f_hi = 0.0;
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    let (gamma, f) = if f_lo.abs() <= f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    Ok(GammaSolve { gamma, pi_hat: f + pi_target, boundary: false, degenerate: false })
}
