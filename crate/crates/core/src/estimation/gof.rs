use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use super::{FitResult, ResponseCounts};
use crate::error::Result;
use crate::model::{response_probs, DesignParams, ModelKind, ModelSpec};

/// Likelihood-ratio statistic against the saturated multinomial-by-sub-sample
/// model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gof {
    pub g2: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Upper tail of the chi-square distribution. With zero degrees of freedom the
/// reference is a point mass at zero.
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if df == 0 {
        return if x > 0.0 { 0.0 } else { 1.0 };
    }
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(df as f64 / 2.0, x / 2.0)
}

/// G² = 2 Σ n_ys ln(p̂_ys / π*_ys) using conditional proportions within each
/// sub-sample. Observed-zero cells contribute nothing; a fitted-zero cell with
/// positive count gives an infinite statistic.
pub fn gof_g2(
    spec: &ModelSpec,
    counts: &ResponseCounts,
    design: &DesignParams,
    fit: &FitResult,
) -> Result<Gof> {
    let params = spec.params(fit.pi_hat, fit.theta_hat.unwrap_or(0.0));
    let fitted = response_probs(spec, &params, design)?;
    let cells = if spec.kind() == ModelKind::Cwm { 0..2 } else { 0..4 };
    let mut g2 = 0.0;
    for i in cells {
        let n = counts.cells[i];
        if n <= 0.0 {
            continue;
        }
        let ns = counts.cells[i & !1] + counts.cells[i | 1];
        let expected = fitted.probs[i];
        if expected <= 0.0 {
            g2 = f64::INFINITY;
            break;
        }
        g2 += n * (n / ns / expected).ln();
    }
    g2 *= 2.0;
    // Rounding noise around an exact fit.
    if g2 < 1e-9 {
        g2 = 0.0;
    }
    let df = spec.kind().observed_dof() - spec.kind().free_params();
    Ok(Gof { g2, df, p_value: chi_square_sf(g2, df) })
}
