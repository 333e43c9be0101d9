use super::moment::onesayers_raw;
use super::{clip, gof_g2, on_boundary, FitMethod, FitResult, ResponseCounts, WeightVector};
use crate::error::{Error, Result};
use crate::model::{response_probs, DesignParams, ModelKind, ModelParams, ModelSpec};
use crate::optimize::{golden_max, maximize_1d, maximize_2d};
use crate::records::{Answer, Respondent, Subsample};

const GRID_STEP: f64 = 0.01;
const PARAM_TOL: f64 = 1e-10;
const LINE_TOL: f64 = 1e-13;

/// How `fit_mle_with` locates the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Optimizer {
    /// Exact solutions: the sufficient-statistic closed form for the ECWM
    /// family, the saturated solution for the one-sayers family when it is
    /// admissible, and concave line searches along the region's edges when it
    /// is not.
    #[default]
    Auto,
    /// Grid scan (step 0.01) refined by derivative-free local search.
    Numeric,
}

/// `Σ n_ys ln π*_ys`, or `-inf` when the parameters leave the admissible
/// region or a positive cell has zero probability.
pub fn log_likelihood(spec: &ModelSpec, params: &ModelParams, counts: &ResponseCounts, design: &DesignParams) -> f64 {
    let Ok(probs) = response_probs(spec, params, design) else {
        return f64::NEG_INFINITY;
    };
    let cells = if spec.kind() == ModelKind::Cwm { 0..2 } else { 0..4 };
    let mut ll = 0.0;
    for i in cells {
        let n = counts.cells[i];
        if n > 0.0 {
            let p = probs.probs[i];
            if p <= 0.0 {
                return f64::NEG_INFINITY;
            }
            ll += n * p.ln();
        }
    }
    ll
}

/// Unweighted maximum-likelihood fit with the default optimizer.
pub fn fit_mle(spec: &ModelSpec, counts: &ResponseCounts, design: &DesignParams) -> Result<FitResult> {
    fit_mle_with(spec, counts, design, Optimizer::Auto)
}

pub fn fit_mle_with(
    spec: &ModelSpec,
    counts: &ResponseCounts,
    design: &DesignParams,
    optimizer: Optimizer,
) -> Result<FitResult> {
    if spec.kind() == ModelKind::Cwm {
        if counts.subsample_total(Subsample::One) <= 0.0 {
            return Err(Error::InsufficientData("sub-sample 1 is empty".into()));
        }
    } else {
        counts.require_both_subsamples()?;
    }
    let gamma = spec.gamma();
    if gamma >= 1.0 {
        return Err(Error::Domain("gamma = 1 leaves no informative respondents".into()));
    }
    let theta_max = 1.0 - gamma;
    let ll = |pi: f64, theta: f64| log_likelihood(spec, &spec.params(pi, theta), counts, design);

    let (pi_hat, theta_hat) = match (spec.kind().has_theta(), optimizer) {
        (false, Optimizer::Auto) => (ecwm_closed_form(spec, counts, design), None),
        (false, Optimizer::Numeric) => {
            let (pi, _) = maximize_1d(|pi| ll(pi, 0.0), 0.0, 1.0, GRID_STEP, PARAM_TOL);
            (pi, None)
        }
        (true, Optimizer::Auto) => {
            let (pi, theta) = onesayers_exact(spec, counts, design, theta_max, &ll);
            (pi, Some(theta))
        }
        (true, Optimizer::Numeric) => {
            let (x, _) = maximize_2d(|x| ll(x[0], x[1]), [1.0, theta_max], GRID_STEP, PARAM_TOL);
            (x[0], Some(x[1]))
        }
    };

    let mut fit = FitResult {
        kind: spec.kind(),
        pi_hat,
        theta_hat,
        gamma_fixed: gamma,
        loglik: ll(pi_hat, theta_hat.unwrap_or(0.0)),
        g2: 0.0,
        df: 0,
        p_value: 1.0,
        method: FitMethod::Mle,
        clipped: false,
        boundary: on_boundary(pi_hat, theta_hat, theta_max),
    };
    let gof = gof_g2(spec, counts, design, &fit)?;
    fit.g2 = gof.g2;
    fit.df = gof.df;
    fit.p_value = gof.p_value;
    Ok(fit)
}

/// Weighted maximum likelihood: respondent `i` contributes `w_i ln π*_i`.
pub fn fit_weighted_mle(
    spec: &ModelSpec,
    records: &[Respondent],
    weights: &WeightVector,
    design: &DesignParams,
) -> Result<FitResult> {
    if records.len() != weights.len() {
        return Err(Error::Domain(format!(
            "{} weights supplied for {} respondents",
            weights.len(),
            records.len()
        )));
    }
    let counts = ResponseCounts::weighted(records, weights.as_slice())?;
    let mut fit = fit_mle(spec, &counts, design)?;
    fit.method = FitMethod::WeightedMle;
    Ok(fit)
}

/// Under the ECWM family the likelihood depends on the data only through the
/// pooled share of DIFFERENT in sub-sample 1 plus SAME in sub-sample 2, and is
/// concave in `pi`; clipping the unconstrained root is the constrained argmax.
fn ecwm_closed_form(spec: &ModelSpec, counts: &ResponseCounts, design: &DesignParams) -> f64 {
    let (p, q) = (design.p(), design.q());
    let gamma = spec.gamma();
    let share = if spec.kind() == ModelKind::Cwm {
        counts.get(Answer::Different, Subsample::One) / counts.subsample_total(Subsample::One)
    } else {
        (counts.get(Answer::Different, Subsample::One) + counts.get(Answer::Same, Subsample::Two)) / counts.total()
    };
    let raw = (share - 0.5 * gamma - (1.0 - gamma) * q) / ((1.0 - gamma) * (p - q));
    clip(raw, 0.0, 1.0).0
}

/// The one-sayers family is saturated: if the moment solution is admissible it
/// reproduces the observed proportions and attains the multinomial bound.
/// Otherwise the maximum lies on an edge of the region, where the likelihood
/// is concave in the remaining coordinate.
fn onesayers_exact<F: Fn(f64, f64) -> f64>(
    spec: &ModelSpec,
    counts: &ResponseCounts,
    design: &DesignParams,
    theta_max: f64,
    ll: &F,
) -> (f64, f64) {
    if let Ok((pi, theta)) = onesayers_raw(counts, design, spec.gamma()) {
        let eps = 1e-12;
        if (-eps..=1.0 + eps).contains(&pi) && (-eps..=theta_max + eps).contains(&theta) {
            let pi = pi.clamp(0.0, 1.0);
            let theta = theta.clamp(0.0, theta_max);
            let bound = saturated_loglik(counts);
            let at = ll(pi, theta);
            if (at - bound).abs() <= 1e-9 * bound.abs().max(1.0) {
                return (pi, theta);
            }
        }
    }
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    let mut consider = |pi: f64, theta: f64| {
        let v = ll(pi, theta);
        if v > best.2 {
            best = (pi, theta, v);
        }
    };
    for pi_edge in [0.0, 1.0] {
        let (theta, _) = golden_max(|t| ll(pi_edge, t), 0.0, theta_max, LINE_TOL);
        consider(pi_edge, theta);
    }
    for theta_edge in [0.0, theta_max] {
        let (pi, _) = golden_max(|x| ll(x, theta_edge), 0.0, 1.0, LINE_TOL);
        consider(pi, theta_edge);
    }
    (best.0, best.1)
}

/// Log-likelihood of the saturated multinomial-by-sub-sample model.
fn saturated_loglik(counts: &ResponseCounts) -> f64 {
    let mut ll = 0.0;
    for i in 0..4 {
        let n = counts.cells[i];
        if n > 0.0 {
            let ns = counts.cells[i & !1] + counts.cells[i | 1];
            ll += n * (n / ns).ln();
        }
    }
    ll
}
