use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasExpectation {
    pub expected_pi_hat: f64,
    pub bias: f64,
}

/// Expected value of the uncorrected ECWM estimator when one-sayers (`theta`)
/// and random responders (`gamma`) are present: both pull it toward 0.5.
pub fn expected_bias(pi: f64, theta: f64, gamma: f64) -> BiasExpectation {
    let bias = (theta + gamma) * (0.5 - pi);
    BiasExpectation { expected_pi_hat: pi + bias, bias }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_points() {
        assert!((expected_bias(0.25, 0.0, 0.25).expected_pi_hat - 0.3125).abs() < 1e-15);
        assert!((expected_bias(0.25, 0.1, 0.25).expected_pi_hat - 0.3375).abs() < 1e-15);
        for pi in [0.0, 0.1, 0.37, 1.0] {
            assert_eq!(expected_bias(pi, 0.0, 1.0).expected_pi_hat, 0.5);
        }
    }
}
