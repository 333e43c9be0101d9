//! Sampled-data checks of the estimators against simulated populations.

use ecwm::calibration::control_error_rate;
use ecwm::estimation::{fit_mle, moment_ecwm_ra, moment_onesayers_ra, ResponseCounts};
use ecwm::pipeline::{prepare, run_ladder, GammaSource, LadderSettings, Rung, WeightAnchors};
use ecwm::simulator::{simulate, simulate_with, to_respondents, PopulationSpec};
use ecwm::timeweights::{sensitivity_grid, GRID_W0, GRID_W50};
use ecwm::{DesignParams, Execution, ModelKind, ModelSpec, Subsample};

fn design(p: f64) -> DesignParams {
    DesignParams::new(p).unwrap()
}

#[test]
fn estimators_recover_parameters_at_large_n() {
    let grid = [(0.1, 0.05, 0.1, 0.2), (0.25, 0.1, 0.15, 0.2), (0.4, 0.2, 0.05, 0.75), (0.6, 0.0, 0.2, 0.85)];
    for (k, &(pi, theta, gamma, p)) in grid.iter().enumerate() {
        let d = design(p);
        let spec = PopulationSpec::new(100_000, pi, theta, gamma, d);
        let counts = ResponseCounts::from_respondents(&to_respondents(&simulate(&spec, 500 + k as u64).unwrap()));

        let m = moment_onesayers_ra(&counts, &d, gamma).unwrap();
        let ml = fit_mle(&ModelSpec::one_sayers_ra(gamma).unwrap(), &counts, &d).unwrap();
        for fit in [m, ml] {
            assert!((fit.pi_hat - pi).abs() < 0.01, "{k}: pi {} vs {pi}", fit.pi_hat);
            assert!((fit.theta_hat.unwrap() - theta).abs() < 0.01, "{k}: theta");
        }
        if theta == 0.0 {
            let m = moment_ecwm_ra(&counts, &d, gamma).unwrap();
            let ml = fit_mle(&ModelSpec::ecwm_ra(gamma).unwrap(), &counts, &d).unwrap();
            assert!((m.pi_hat - pi).abs() < 0.01 && (ml.pi_hat - pi).abs() < 0.01);
        }
    }
}

#[test]
fn control_errors_follow_the_mixture_identity() {
    let n = 200_000;
    for (gamma, phi) in [(0.1, 0.0), (0.15, 0.05), (0.3, 0.1)] {
        let mut spec = PopulationSpec::new(n, 0.25, 0.1, gamma, design(0.2));
        spec.phi = phi;
        let outcome = control_error_rate(&to_respondents(&simulate(&spec, 31).unwrap())).unwrap();
        let expected = 0.5 * gamma + phi;
        let se = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((outcome.e_c - expected).abs() < 3.0 * se, "e_c {} vs {expected}", outcome.e_c);
    }
}

#[test]
fn parallel_and_sequential_simulation_agree() {
    let spec = PopulationSpec::new(5000, 0.3, 0.1, 0.1, design(0.2));
    let a = simulate_with(&spec, 4, Execution::Sequential).unwrap();
    let b = simulate_with(&spec, 4, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, simulate(&spec, 5).unwrap());
}

#[test]
fn both_arms_of_the_design_are_populated() {
    let spec = PopulationSpec::new(1000, 0.25, 0.1, 0.1, design(0.2));
    let recs = to_respondents(&simulate(&spec, 7).unwrap());
    for s in [Subsample::One, Subsample::Two] {
        assert!(recs.iter().any(|r| r.subsample == s));
    }
}

fn ladder_settings(gamma_source: GammaSource, weighting: Option<WeightAnchors>) -> LadderSettings {
    LadderSettings { design: design(0.2), gamma_source, base_model: ModelKind::OneSayers, weighting }
}

#[test]
fn null_correction_leaves_the_ladder_near_truth() {
    let spec = PopulationSpec::new(100_000, 0.25, 0.1, 0.0, design(0.2));
    let recs = to_respondents(&simulate(&spec, 61).unwrap());
    let (kept, _) = prepare(&recs, 15.0).unwrap();
    let ladder =
        run_ladder(&kept, &ladder_settings(GammaSource::DeltaPi, Some(WeightAnchors { w0: 0.1, w50: 0.9 }))).unwrap();
    assert!(ladder.calibration.gamma_hat < 0.02, "gamma {}", ladder.calibration.gamma_hat);
    // The ECWM row absorbs one-saying, so only the corrected rows sit at .25.
    for rung in [Rung::OneSaying, Rung::RandomAnswer, Rung::Weights] {
        let pi = ladder.row(rung).unwrap().pi_hat;
        assert!((pi - 0.25).abs() < 0.015, "{rung:?}: {pi}");
    }
}

#[test]
fn corrections_pull_toward_truth_with_fast_random_responders() {
    let mut spec = PopulationSpec::new(100_000, 0.25, 0.1, 0.15, design(0.2));
    spec.link_random_to_speed = true;
    let recs = to_respondents(&simulate(&spec, 62).unwrap());
    let (kept, _) = prepare(&recs, 15.0).unwrap();
    let ladder =
        run_ladder(&kept, &ladder_settings(GammaSource::DeltaPi, Some(WeightAnchors { w0: 0.1, w50: 0.9 }))).unwrap();
    let err = |r: Rung| (ladder.row(r).unwrap().pi_hat - 0.25).abs();
    assert!(err(Rung::Ecwm) > 0.04);
    assert!(err(Rung::RandomAnswer) < err(Rung::OneSaying));
    assert!(err(Rung::Weights) < err(Rung::Ecwm));
    assert!(ladder.rows.windows(2).all(|w| w[1].fit.pi_hat < w[0].fit.pi_hat));
}

#[test]
fn sensitivity_grid_is_flat_without_random_answering() {
    let spec = PopulationSpec::new(100_000, 0.25, 0.1, 0.0, design(0.2));
    let recs = to_respondents(&simulate(&spec, 63).unwrap());
    let grid = sensitivity_grid(&recs, &spec.design, &ModelSpec::one_sayers(), Execution::default());
    assert_eq!(grid.cells.len(), GRID_W0.len() * GRID_W50.len());
    assert_eq!(grid.cells.len(), 9);
    assert!(grid.spread() < 0.02, "spread {}", grid.spread());
}

#[test]
fn default_grid_cell_equals_weighted_ladder_row() {
    let spec = PopulationSpec::new(20_000, 0.25, 0.1, 0.1, design(0.2));
    let recs = to_respondents(&simulate(&spec, 64).unwrap());
    let settings = ladder_settings(GammaSource::Fixed(0.1), Some(WeightAnchors { w0: 0.1, w50: 0.9 }));
    let ladder = run_ladder(&recs, &settings).unwrap();
    let grid = sensitivity_grid(&recs, &spec.design, &ModelSpec::one_sayers_ra(0.1).unwrap(), Execution::default());
    let cell = grid.cell(0.1, 0.9).unwrap();
    assert_eq!(cell.pi_hat.as_ref().unwrap(), &ladder.row(Rung::Weights).unwrap().pi_hat);
}
