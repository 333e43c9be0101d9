//! Synthetic respondent populations under the full generative model:
//! honest, one-saying and random responders, control-item ignorance and
//! class-dependent completion times.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::ResponseCounts;
use crate::exec::{map_indexed, Execution};
use crate::model::{response_probs, DesignParams, ModelParams, ModelSpec};
use crate::records::{Answer, ControlDesign, ControlResponse, Respondent, Subsample};

/// Respondents generated per RNG substream.
const CHUNK: usize = 1024;

/// Log-normal completion times per class, in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeModel {
    pub honest_median: f64,
    pub one_sayer_median: f64,
    pub random_median: f64,
    /// Median for random responders when they are linked to speed.
    pub fast_random_median: f64,
    /// Standard deviation of log-time.
    pub sigma: f64,
    /// Share of respondents whose timer was never stopped; their times land
    /// between 15.5 and 60 minutes.
    pub timer_failure_rate: f64,
}

impl Default for TimeModel {
    fn default() -> Self {
        Self {
            honest_median: 3.5,
            one_sayer_median: 3.5,
            random_median: 3.5,
            fast_random_median: 1.2,
            sigma: 0.4,
            timer_failure_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub n: usize,
    pub pi: f64,
    pub theta: f64,
    pub gamma: f64,
    /// Population share of non-random respondents who get the control item
    /// wrong because they do not know its truth; `e_c = gamma / 2 + phi`.
    pub phi: f64,
    pub design: DesignParams,
    /// Probability of assignment to sub-sample 1.
    pub subsample_split: f64,
    /// Assign exactly `round(n * split)` respondents to sub-sample 1.
    pub force_balance: bool,
    pub time_model: TimeModel,
    pub link_random_to_speed: bool,
}

impl PopulationSpec {
    pub fn new(n: usize, pi: f64, theta: f64, gamma: f64, design: DesignParams) -> Self {
        Self {
            n,
            pi,
            theta,
            gamma,
            phi: 0.0,
            design,
            subsample_split: 0.5,
            force_balance: false,
            time_model: TimeModel::default(),
            link_random_to_speed: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ModelParams::new(self.pi, self.theta, self.gamma).validate()?;
        if !(0.0..=1.0).contains(&self.phi) || self.phi > 1.0 - self.gamma + 1e-12 {
            return Err(Error::Domain(format!(
                "phi = {} must lie in [0, 1 - gamma] = [0, {}]",
                self.phi,
                1.0 - self.gamma
            )));
        }
        if !(0.0..=1.0).contains(&self.subsample_split) {
            return Err(Error::Domain(format!("subsample_split = {} is outside [0, 1]", self.subsample_split)));
        }
        let t = &self.time_model;
        for (name, v) in [
            ("honest_median", t.honest_median),
            ("one_sayer_median", t.one_sayer_median),
            ("random_median", t.random_median),
            ("fast_random_median", t.fast_random_median),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("time model {name} must be positive, got {v}")));
            }
        }
        if !(t.sigma.is_finite() && t.sigma >= 0.0) {
            return Err(Error::Domain(format!("time model sigma must be nonnegative, got {}", t.sigma)));
        }
        if !(0.0..=1.0).contains(&t.timer_failure_rate) {
            return Err(Error::Domain(format!("timer_failure_rate {} is outside [0, 1]", t.timer_failure_rate)));
        }
        Ok(())
    }

    fn subsample_one_target(&self) -> usize {
        (self.n as f64 * self.subsample_split).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatentClass {
    Honest,
    OneSayer,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub crosswise_answer: Answer,
    pub subsample: Subsample,
    pub control_answer: Answer,
    pub control_design: ControlDesign,
    pub control_correct: bool,
    pub time_minutes: f64,
    /// Kept for oracle checks; never visible to the estimators.
    pub latent_class: LatentClass,
    pub sensitive: bool,
}

impl SimRecord {
    pub fn to_respondent(&self) -> Respondent {
        Respondent::new(self.crosswise_answer, self.subsample)
            .with_control(ControlResponse { answer: self.control_answer, design: self.control_design })
            .with_time(self.time_minutes)
    }
}

pub fn to_respondents(records: &[SimRecord]) -> Vec<Respondent> {
    records.iter().map(SimRecord::to_respondent).collect()
}

/// Deterministic in `(spec, seed)` for either execution mode.
pub fn simulate(spec: &PopulationSpec, seed: u64) -> Result<Vec<SimRecord>> {
    simulate_with(spec, seed, Execution::default())
}

pub fn simulate_with(spec: &PopulationSpec, seed: u64, exec: Execution) -> Result<Vec<SimRecord>> {
    spec.validate()?;
    let chunks = spec.n.div_ceil(CHUNK);
    let parts = map_indexed(exec, chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let start = c * CHUNK;
        let end = (start + CHUNK).min(spec.n);
        (start..end).map(|i| draw(spec, i, &mut rng)).collect::<Vec<_>>()
    });
    Ok(parts.into_iter().flatten().collect())
}

fn log_normal(median: f64, sigma: f64) -> LogNormal<f64> {
    LogNormal::new(median.ln(), sigma).expect("validated time model")
}

fn draw(spec: &PopulationSpec, index: usize, rng: &mut ChaCha8Rng) -> SimRecord {
    let subsample = if spec.force_balance {
        if index < spec.subsample_one_target() {
            Subsample::One
        } else {
            Subsample::Two
        }
    } else if rng.random_bool(spec.subsample_split) {
        Subsample::One
    } else {
        Subsample::Two
    };

    // Fixed draw order keeps streams reproducible.
    let u_class: f64 = rng.random();
    let sensitive = rng.random_bool(spec.pi);
    // The transition matrices put `p * pi` in the DIFFERENT cell of sub-sample
    // 1, so under the crosswise rule the innocuous truth there is `yes` with
    // probability `1 - p`.
    let innocuous = rng.random_bool(1.0 - spec.design.subsample_prob(subsample));
    let coin_answer: bool = rng.random();
    let coin_control: bool = rng.random();
    let u_ignorant: f64 = rng.random();
    let u_failure: f64 = rng.random();
    let u_failure_time: f64 = rng.random();

    let latent_class = if u_class < spec.theta {
        LatentClass::OneSayer
    } else if u_class < spec.theta + spec.gamma {
        LatentClass::Random
    } else {
        LatentClass::Honest
    };

    let crosswise_answer = match latent_class {
        LatentClass::Honest => Answer::crosswise(sensitive, innocuous),
        LatentClass::OneSayer => Answer::Different,
        LatentClass::Random => coin(coin_answer),
    };

    // Statement A (licensed) is always true; B is quasi-randomized by sub-sample.
    let b_prob = match subsample {
        Subsample::One => 1,
        Subsample::Two => 0,
    };
    let control_design = ControlDesign::new(true, b_prob).expect("b_prob is 0 or 1");
    let ignorance_rate = if spec.gamma < 1.0 { spec.phi / (1.0 - spec.gamma) } else { 0.0 };
    let control_answer = match latent_class {
        LatentClass::Random => coin(coin_control),
        _ if u_ignorant < ignorance_rate => Answer::crosswise(false, b_prob == 1),
        _ => control_design.correct_answer(),
    };

    let t = &spec.time_model;
    let median = match latent_class {
        LatentClass::Honest => t.honest_median,
        LatentClass::OneSayer => t.one_sayer_median,
        LatentClass::Random if spec.link_random_to_speed => t.fast_random_median,
        LatentClass::Random => t.random_median,
    };
    let time_minutes = if u_failure < t.timer_failure_rate {
        15.5 + 44.5 * u_failure_time
    } else {
        log_normal(median, t.sigma).sample(rng)
    };

    SimRecord {
        crosswise_answer,
        subsample,
        control_answer,
        control_design,
        control_correct: control_answer == control_design.correct_answer(),
        time_minutes,
        latent_class,
        sensitive,
    }
}

#[inline]
fn coin(heads: bool) -> Answer {
    if heads {
        Answer::Different
    } else {
        Answer::Same
    }
}

/// Expected answer table: sub-sample sizes `n * split` and `n * (1 - split)`
/// times the one-sayers + RA probabilities.
pub fn oracle_counts(spec: &PopulationSpec) -> Result<ResponseCounts> {
    spec.validate()?;
    let model = ModelSpec::one_sayers_ra(spec.gamma)?;
    let probs = response_probs(&model, &ModelParams::new(spec.pi, spec.theta, spec.gamma), &spec.design)?;
    let n1 = spec.n as f64 * spec.subsample_split;
    let n2 = spec.n as f64 - n1;
    let p = probs.probs;
    ResponseCounts::new([n1 * p[0], n1 * p[1], n2 * p[2], n2 * p[3]])
}
