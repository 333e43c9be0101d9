use super::{clip, gof_g2, log_likelihood, on_boundary, FitMethod, FitResult, ResponseCounts};
use crate::error::{Error, Result};
use crate::model::{DesignParams, ModelSpec};
use crate::records::{Answer, Subsample};

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma = {gamma} is outside [0, 1]")));
    }
    Ok(())
}

fn finish(
    spec: ModelSpec,
    counts: &ResponseCounts,
    design: &DesignParams,
    pi_hat: f64,
    theta_hat: Option<f64>,
    clipped: bool,
) -> Result<FitResult> {
    let gamma = spec.gamma();
    let loglik = log_likelihood(&spec, &spec.params(pi_hat, theta_hat.unwrap_or(0.0)), counts, design);
    let mut fit = FitResult {
        kind: spec.kind(),
        pi_hat,
        theta_hat,
        gamma_fixed: gamma,
        loglik,
        g2: 0.0,
        df: 0,
        p_value: 1.0,
        method: FitMethod::Moment,
        clipped,
        boundary: on_boundary(pi_hat, theta_hat, 1.0 - gamma),
    };
    let gof = gof_g2(&spec, counts, design, &fit)?;
    fit.g2 = gof.g2;
    fit.df = gof.df;
    fit.p_value = gof.p_value;
    Ok(fit)
}

/// ECWM estimator corrected for a known share `gamma` of random responders,
/// computed from the unconditional proportions `n_ys / n`. With `gamma = 0`
/// this is the standard ECWM moment estimator.
pub fn moment_ecwm_ra(counts: &ResponseCounts, design: &DesignParams, gamma: f64) -> Result<FitResult> {
    check_gamma(gamma)?;
    if gamma >= 1.0 {
        return Err(Error::Domain("gamma = 1 leaves no informative respondents".into()));
    }
    counts.require_both_subsamples()?;
    let (p, q) = (design.p(), design.q());
    let agree = counts.unconditional(Answer::Different, Subsample::One)?
        + counts.unconditional(Answer::Same, Subsample::Two)?;
    let raw = (agree - (1.0 - gamma) * q - 0.5 * gamma) / ((p - q) * (1.0 - gamma));
    let (pi_hat, clipped) = clip(raw, 0.0, 1.0);
    let spec = if gamma == 0.0 { ModelSpec::ecwm() } else { ModelSpec::ecwm_ra(gamma)? };
    finish(spec, counts, design, pi_hat, None, clipped)
}

/// One-sayer prevalence from the DIFFERENT proportions of both sub-samples.
/// Unaffected by random answering. Returns the raw (unclipped) plug-in.
pub fn moment_theta(counts: &ResponseCounts) -> Result<f64> {
    Ok(counts.conditional(Answer::Different, Subsample::One)?
        + counts.conditional(Answer::Different, Subsample::Two)?
        - 1.0)
}

/// Raw `(pi, theta)` plug-ins of the one-sayers + RA model.
pub(crate) fn onesayers_raw(counts: &ResponseCounts, design: &DesignParams, gamma: f64) -> Result<(f64, f64)> {
    let theta = moment_theta(counts)?;
    let same1 = counts.conditional(Answer::Same, Subsample::One)?;
    let same2 = counts.conditional(Answer::Same, Subsample::Two)?;
    let (p, q) = (design.p(), design.q());
    let denom = (p - q) * (same1 + same2 - gamma);
    if denom.abs() < 1e-15 {
        return Err(Error::DegenerateDenominator("one-sayers moment estimator"));
    }
    let pi = (p * same2 - q * same1 - gamma * (p - 0.5)) / denom;
    Ok((pi, theta))
}

/// One-sayers estimator corrected for a known share `gamma` of random
/// responders. With `gamma = 0` it is the plain one-sayers moment estimator.
/// `theta` is clipped to `[0, 1 - gamma]`, `pi` to `[0, 1]`.
pub fn moment_onesayers_ra(counts: &ResponseCounts, design: &DesignParams, gamma: f64) -> Result<FitResult> {
    check_gamma(gamma)?;
    let (pi_raw, theta_raw) = onesayers_raw(counts, design, gamma)?;
    let (pi_hat, pi_clipped) = clip(pi_raw, 0.0, 1.0);
    let (theta_hat, theta_clipped) = clip(theta_raw, 0.0, 1.0 - gamma);
    let spec = if gamma == 0.0 { ModelSpec::one_sayers() } else { ModelSpec::one_sayers_ra(gamma)? };
    finish(spec, counts, design, pi_hat, Some(theta_hat), pi_clipped || theta_clipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{response_probs, ModelParams};

    fn expected_counts(spec: &ModelSpec, params: ModelParams, design: &DesignParams, per_subsample: f64) -> ResponseCounts {
        let probs = response_probs(spec, &params, design).unwrap();
        ResponseCounts::new(probs.probs.map(|p| p * per_subsample)).unwrap()
    }

    #[test]
    fn ecwm_inversion() {
        let d = DesignParams::new(0.8).unwrap();
        // P(1|1) = P(2|2) = .35 at pi = .25.
        let counts = ResponseCounts::from_integers([175, 325, 325, 175]);
        let fit = moment_ecwm_ra(&counts, &d, 0.0).unwrap();
        assert!((fit.pi_hat - 0.25).abs() < 1e-12);
        assert!(!fit.clipped);
    }

    #[test]
    fn ecwm_ra_inversion() {
        let d = DesignParams::new(0.8).unwrap();
        // P(1|1) = P(2|2) = .38 at pi = .25, gamma = .2.
        let counts = ResponseCounts::from_integers([190, 310, 310, 190]);
        let fit = moment_ecwm_ra(&counts, &d, 0.2).unwrap();
        assert!((fit.pi_hat - 0.25).abs() < 1e-12, "{}", fit.pi_hat);
    }

    #[test]
    fn half_prevalence_is_fixed_point() {
        let d = DesignParams::new(0.2).unwrap();
        let counts = ResponseCounts::from_integers([300, 300, 200, 200]);
        for gamma in [0.0, 0.1, 0.5, 0.9] {
            let fit = moment_ecwm_ra(&counts, &d, gamma).unwrap();
            assert!((fit.pi_hat - 0.5).abs() < 1e-12);
            let fit = moment_onesayers_ra(&counts, &d, gamma).unwrap();
            assert!((fit.pi_hat - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_one_is_rejected() {
        let d = DesignParams::new(0.8).unwrap();
        let counts = ResponseCounts::from_integers([1, 1, 1, 1]);
        assert!(matches!(moment_ecwm_ra(&counts, &d, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn out_of_range_estimates_are_clipped() {
        let d = DesignParams::new(0.8).unwrap();
        let counts = ResponseCounts::from_integers([50, 450, 450, 50]);
        let fit = moment_ecwm_ra(&counts, &d, 0.0).unwrap();
        assert_eq!(fit.pi_hat, 0.0);
        assert!(fit.clipped && fit.boundary);
    }

    #[test]
    fn theta_from_one_sayers_probabilities() {
        let d = DesignParams::new(0.8).unwrap();
        let c = expected_counts(&ModelSpec::one_sayers(), ModelParams::new(0.25, 0.1, 0.0), &d, 1000.0);
        assert!((moment_theta(&c).unwrap() - 0.1).abs() < 1e-12);

        let c = expected_counts(&ModelSpec::ecwm(), ModelParams::new(0.3, 0.0, 0.0), &d, 1000.0);
        assert!(moment_theta(&c).unwrap().abs() < 1e-12);

        let c = ResponseCounts::from_integers([40, 0, 60, 0]);
        assert_eq!(moment_theta(&c).unwrap(), 1.0);
    }

    #[test]
    fn theta_needs_both_subsamples() {
        let c = ResponseCounts::from_integers([40, 3, 0, 0]);
        assert!(matches!(moment_theta(&c), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn onesayers_ra_hand_example() {
        let d = DesignParams::new(0.8).unwrap();
        let spec = ModelSpec::one_sayers_ra(0.2).unwrap();
        let c = expected_counts(&spec, ModelParams::new(0.25, 0.1, 0.2), &d, 1000.0);
        let fit = moment_onesayers_ra(&c, &d, 0.2).unwrap();
        assert!((fit.pi_hat - 0.25).abs() < 1e-12);
        assert!((fit.theta_hat.unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(fit.g2, 0.0);
        assert_eq!(fit.df, 0);
    }

    #[test]
    fn onesayers_reduces_to_ecwm_on_ecwm_data() {
        let d = DesignParams::new(0.2).unwrap();
        for pi in [0.0, 0.13, 0.5, 0.77, 1.0] {
            let c = expected_counts(&ModelSpec::ecwm(), ModelParams::new(pi, 0.0, 0.0), &d, 700.0);
            let fit = moment_onesayers_ra(&c, &d, 0.0).unwrap();
            assert!((fit.pi_hat - pi).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_denominator() {
        let d = DesignParams::new(0.8).unwrap();
        // SAME proportions .1 + .1 equal gamma = .2.
        let c = ResponseCounts::from_integers([90, 10, 90, 10]);
        assert_eq!(
            moment_onesayers_ra(&c, &d, 0.2).unwrap_err(),
            Error::DegenerateDenominator("one-sayers moment estimator")
        );
    }
}
