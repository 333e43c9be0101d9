//! Randomized-response probability models.
//!
//! Every model in this crate maps the prevalence parameters `(pi, theta, gamma)`
//! and the design probability `p` onto the four conditional probabilities
//! `P(y | s)`, with `y` the observed answer and `s` the sub-sample. The index
//! layout is fixed everywhere: answer 1 is DIFFERENT, answer 2 is SAME,
//! sub-sample 1 uses `p` and sub-sample 2 uses `q = 1 - p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{Answer, Subsample};

/// Tolerance used by the row-sum assertions.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Randomization probability of a `yes` answer to the innocuous statement in
/// sub-sample 1. Sub-sample 2 uses the complement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    p: f64,
}

impl DesignParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Design(format!("p must lie in (0, 1), got {p}")));
        }
        if p == 0.5 {
            return Err(Error::Design(
                "p = 0.5 leaves the prevalence unidentified".into(),
            ));
        }
        Ok(Self { p })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    /// Weight of the sensitive `yes` in the DIFFERENT cell of sub-sample `s`.
    #[inline]
    pub fn subsample_prob(&self, s: Subsample) -> f64 {
        match s {
            Subsample::One => self.p(),
            Subsample::Two => self.q(),
        }
    }
}

/// Prevalences of the sensitive attribute, one-sayers and random responders.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelParams {
    pub pi: f64,
    pub theta: f64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(pi: f64, theta: f64, gamma: f64) -> Self {
        Self { pi, theta, gamma }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("pi", self.pi), ("theta", self.theta), ("gamma", self.gamma)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if self.theta + self.gamma > 1.0 + 1e-12 {
            return Err(Error::Domain(format!(
                "theta + gamma = {} exceeds 1",
                self.theta + self.gamma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Single-sample crosswise model.
    Cwm,
    Ecwm,
    /// ECWM with random answering at a fixed rate.
    EcwmRa,
    OneSayers,
    /// One-sayers model with random answering at a fixed rate.
    OneSayersRa,
}

impl ModelKind {
    pub fn is_random_answer(self) -> bool {
        matches!(self, ModelKind::EcwmRa | ModelKind::OneSayersRa)
    }

    pub fn has_theta(self) -> bool {
        matches!(self, ModelKind::OneSayers | ModelKind::OneSayersRa)
    }

    /// Number of parameters estimated from the data.
    pub fn free_params(self) -> usize {
        if self.has_theta() {
            2
        } else {
            1
        }
    }

    /// Non-redundant observed proportions available to the model.
    pub fn observed_dof(self) -> usize {
        match self {
            ModelKind::Cwm => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Cwm => "CWM",
            ModelKind::Ecwm => "ECWM",
            ModelKind::EcwmRa => "ECWM+RA",
            ModelKind::OneSayers => "one-sayers",
            ModelKind::OneSayersRa => "one-sayers+RA",
        }
    }
}

/// Model choice plus the externally supplied random-answer rate for the RA
/// variants (which are not identified otherwise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    kind: ModelKind,
    fixed_gamma: Option<f64>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, fixed_gamma: Option<f64>) -> Result<Self> {
        match (kind.is_random_answer(), fixed_gamma) {
            (true, None) => Err(Error::Domain(format!(
                "{} requires a fixed gamma",
                kind.name()
            ))),
            (false, Some(_)) => Err(Error::Domain(format!(
                "{} does not take a fixed gamma",
                kind.name()
            ))),
            (true, Some(g)) if !(0.0..=1.0).contains(&g) => {
                Err(Error::Domain(format!("fixed gamma {g} is outside [0, 1]")))
            }
            _ => Ok(Self { kind, fixed_gamma }),
        }
    }

    pub fn cwm() -> Self {
        Self { kind: ModelKind::Cwm, fixed_gamma: None }
    }

    pub fn ecwm() -> Self {
        Self { kind: ModelKind::Ecwm, fixed_gamma: None }
    }

    pub fn one_sayers() -> Self {
        Self { kind: ModelKind::OneSayers, fixed_gamma: None }
    }

    pub fn ecwm_ra(gamma: f64) -> Result<Self> {
        Self::new(ModelKind::EcwmRa, Some(gamma))
    }

    pub fn one_sayers_ra(gamma: f64) -> Result<Self> {
        Self::new(ModelKind::OneSayersRa, Some(gamma))
    }

    #[inline]
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn fixed_gamma(&self) -> Option<f64> {
        self.fixed_gamma
    }

    /// The fixed gamma, or zero for models without random answering.
    #[inline]
    pub fn gamma(&self) -> f64 {
        self.fixed_gamma.unwrap_or(0.0)
    }

    /// Full parameter vector for this model at the given free parameters.
    pub fn params(&self, pi: f64, theta: f64) -> ModelParams {
        let theta = if self.kind.has_theta() { theta } else { 0.0 };
        ModelParams::new(pi, theta, self.gamma())
    }

    /// Parameters actually entering this model; components the model does not
    /// contain are zeroed.
    pub fn mask(&self, params: &ModelParams) -> ModelParams {
        let theta = if self.kind.has_theta() { params.theta } else { 0.0 };
        let gamma = if self.kind.is_random_answer() { params.gamma } else { 0.0 };
        ModelParams::new(params.pi, theta, gamma)
    }

    /// The RA variant sharing this model's structure.
    pub fn with_random_answering(&self, gamma: f64) -> Result<Self> {
        match self.kind {
            ModelKind::Ecwm | ModelKind::EcwmRa => Self::ecwm_ra(gamma),
            ModelKind::OneSayers | ModelKind::OneSayersRa => Self::one_sayers_ra(gamma),
            ModelKind::Cwm => Err(Error::Domain("CWM has no random-answer variant".into())),
        }
    }
}

/// Conditional answer probabilities, stored in the order
/// `(P(1|1), P(2|1), P(1|2), P(2|2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseProbs {
    pub probs: [f64; 4],
}

impl ResponseProbs {
    #[inline]
    pub fn index(y: Answer, s: Subsample) -> usize {
        2 * s.index() + y.index()
    }

    #[inline]
    pub fn get(&self, y: Answer, s: Subsample) -> f64 {
        self.probs[Self::index(y, s)]
    }

    pub fn check(&self) -> Result<()> {
        for (i, &v) in self.probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Consistency(format!("probability {i} = {v} outside [0, 1]")));
            }
        }
        for s in 0..2 {
            let sum = self.probs[2 * s] + self.probs[2 * s + 1];
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Consistency(format!(
                    "sub-sample {} probabilities sum to {sum}",
                    s + 1
                )));
            }
        }
        Ok(())
    }
}

/// The two-entry crosswise model `(P(DIFFERENT), P(SAME))`.
pub fn cwm_probs(pi: f64, design: &DesignParams) -> [f64; 2] {
    let (p, q) = (design.p(), design.q());
    [p * pi + q * (1.0 - pi), q * pi + p * (1.0 - pi)]
}

/// Evaluates the transition matrix of the selected model.
///
/// Parameters that the model does not contain are ignored (e.g. `theta` under
/// ECWM). For CWM the sub-sample 2 entries repeat sub-sample 1, since the
/// design has a single group.
pub fn response_probs(
    spec: &ModelSpec,
    params: &ModelParams,
    design: &DesignParams,
) -> Result<ResponseProbs> {
    params.validate()?;
    let m = spec.mask(params);
    let probs = match spec.kind() {
        ModelKind::Cwm => {
            let [d, s] = cwm_probs(m.pi, design);
            [d, s, d, s]
        }
        _ => full_matrix(&m, design),
    };
    let out = ResponseProbs { probs };
    out.check()?;
    Ok(out)
}

/// One-sayers + RA matrix; every ECWM-family model is a restriction of it.
fn full_matrix(m: &ModelParams, design: &DesignParams) -> [f64; 4] {
    let (p, q) = (design.p(), design.q());
    let (pi, theta, gamma) = (m.pi, m.theta, m.gamma);
    let honest = 1.0 - gamma - theta;
    let coin = 0.5 * gamma;
    // P(innocuous and sensitive answers agree/disagree) per sub-sample.
    let diff1 = p * pi + q * (1.0 - pi);
    let same1 = q * pi + p * (1.0 - pi);
    let diff2 = q * pi + p * (1.0 - pi);
    let same2 = p * pi + q * (1.0 - pi);
    [
        honest * diff1 + theta + coin,
        honest * same1 + coin,
        honest * diff2 + theta + coin,
        honest * same2 + coin,
    ]
}

/// `response_probs` plus the nesting identities between the model family:
/// ONE_SAYERS_RA at gamma = 0 equals ONE_SAYERS, ECWM_RA at gamma = 0 equals
/// ECWM, and ONE_SAYERS_RA at theta = gamma = 0 equals ECWM.
pub fn reduce_check(
    spec: &ModelSpec,
    params: &ModelParams,
    design: &DesignParams,
) -> Result<ResponseProbs> {
    let out = response_probs(spec, params, design)?;
    let m = spec.mask(params);
    let ecwm = response_probs(&ModelSpec::ecwm(), &m, design)?;
    let nested = match spec.kind() {
        ModelKind::EcwmRa if m.gamma == 0.0 => Some(ecwm),
        ModelKind::OneSayers if m.theta == 0.0 => Some(ecwm),
        ModelKind::OneSayersRa if m.gamma == 0.0 => {
            Some(response_probs(&ModelSpec::one_sayers(), &m, design)?)
        }
        _ => None,
    };
    if let Some(reference) = nested {
        if reference.probs != out.probs {
            return Err(Error::Consistency(format!(
                "{} does not reduce to its nested model: {:?} vs {:?}",
                spec.kind().name(),
                out.probs,
                reference.probs
            )));
        }
    }
    Ok(out)
}
