//! The full analysis chain: time filtering, gamma calibration, weight
//! anchoring and the model ladder (ECWM, + one-saying, + random answering,
//! + completion-time weights).

use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_many, BootstrapConfig, IntervalEstimate};
use crate::calibration::{control_error_rate, gamma_delta_pi, gamma_naive, GammaEstimate};
use crate::error::{Error, Result};
use crate::estimation::{fit_mle, fit_weighted_mle, FitResult, ResponseCounts};
use crate::exec::Execution;
use crate::model::{DesignParams, ModelKind, ModelSpec};
use crate::records::Respondent;
use crate::timeweights::{filter_records, weights_for, WeightParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method", content = "value")]
pub enum GammaSource {
    /// No random-answer correction; the +ra row is omitted.
    None,
    Naive2ec,
    DeltaPi,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightAnchors {
    pub w0: f64,
    pub w50: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderSettings {
    pub design: DesignParams,
    pub gamma_source: GammaSource,
    /// Model used for the delta calibration and the corrected rows:
    /// ECWM or one-sayers.
    pub base_model: ModelKind,
    /// `None` omits the +weights row.
    pub weighting: Option<WeightAnchors>,
}

impl LadderSettings {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.base_model, ModelKind::Ecwm | ModelKind::OneSayers) {
            return Err(Error::Domain(format!("base model must be ECWM or one-sayers, got {}", self.base_model.name())));
        }
        if let GammaSource::Fixed(g) = self.gamma_source {
            if !(0.0..1.0).contains(&g) {
                return Err(Error::Domain(format!("fixed gamma {g} is outside [0, 1)")));
            }
        }
        if let Some(a) = self.weighting {
            for w in [a.w0, a.w50] {
                if !(w > 0.0 && w < 1.0) {
                    return Err(Error::InfiniteLogit(w));
                }
            }
        }
        Ok(())
    }

    fn base_spec(&self) -> ModelSpec {
        match self.base_model {
            ModelKind::Ecwm => ModelSpec::ecwm(),
            _ => ModelSpec::one_sayers(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rung {
    Ecwm,
    OneSaying,
    RandomAnswer,
    Weights,
}

impl Rung {
    pub fn label(self) -> &'static str {
        match self {
            Rung::Ecwm => "ECWM",
            Rung::OneSaying => "+ one-saying",
            Rung::RandomAnswer => "+ ra",
            Rung::Weights => "+ weights",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub rung: Rung,
    pub fit: FitResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub gamma_hat: f64,
    /// Present when gamma was estimated from the control item.
    pub gamma: Option<GammaEstimate>,
    pub weights: Option<WeightParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub calibration: Calibration,
    pub rows: Vec<LadderRow>,
}

impl Ladder {
    pub fn row(&self, rung: Rung) -> Option<&FitResult> {
        self.rows.iter().find(|r| r.rung == rung).map(|r| &r.fit)
    }

    /// Estimates tracked by the bootstrap: each row's `pi`, then its `theta`
    /// when present, then `gamma_hat`.
    pub fn statistics(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for row in &self.rows {
            out.push(row.fit.pi_hat);
            if let Some(t) = row.fit.theta_hat {
                out.push(t);
            }
        }
        out.push(self.calibration.gamma_hat);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attrition {
    pub n_input: usize,
    pub time_excluded: usize,
    /// Respondents dropped from the `pi_out` fit of the delta calibration.
    pub control_excluded: usize,
    pub n_analyzed: usize,
}

/// Applies the completion-time cutoff.
pub fn prepare(records: &[Respondent], cutoff: f64) -> Result<(Vec<Respondent>, Attrition)> {
    let (kept, dropped) = filter_records(records, cutoff)?;
    let control_excluded = kept.iter().filter(|r| r.control_correct() == Some(false)).count();
    let attrition = Attrition {
        n_input: records.len(),
        time_excluded: dropped,
        control_excluded,
        n_analyzed: kept.len(),
    };
    Ok((kept, attrition))
}

/// Runs calibration and every ladder row on already-filtered records.
pub fn run_ladder(records: &[Respondent], settings: &LadderSettings) -> Result<Ladder> {
    settings.validate()?;
    let design = &settings.design;
    let counts = ResponseCounts::from_respondents(records);

    let gamma = match settings.gamma_source {
        GammaSource::None | GammaSource::Fixed(_) => None,
        GammaSource::Naive2ec => Some(gamma_naive(&control_error_rate(records)?)),
        GammaSource::DeltaPi => Some(gamma_delta_pi(records, design, settings.base_model)?),
    };
    let gamma_hat = match settings.gamma_source {
        GammaSource::Fixed(g) => g,
        _ => gamma.map_or(0.0, |g| g.gamma_hat),
    };
    if gamma_hat >= 1.0 {
        return Err(Error::Domain("estimated gamma is 1; no respondents left to correct".into()));
    }

    let mut rows = vec![
        LadderRow { rung: Rung::Ecwm, fit: fit_mle(&ModelSpec::ecwm(), &counts, design)? },
        LadderRow { rung: Rung::OneSaying, fit: fit_mle(&ModelSpec::one_sayers(), &counts, design)? },
    ];
    let corrected = if settings.gamma_source == GammaSource::None {
        settings.base_spec()
    } else {
        let spec = settings.base_spec().with_random_answering(gamma_hat)?;
        rows.push(LadderRow { rung: Rung::RandomAnswer, fit: fit_mle(&spec, &counts, design)? });
        spec
    };

    let mut weights = None;
    if let Some(anchors) = settings.weighting {
        let (params, w) = weights_for(records, anchors.w0, anchors.w50)?;
        weights = Some(params);
        rows.push(LadderRow { rung: Rung::Weights, fit: fit_weighted_mle(&corrected, records, &w, design)? });
    }

    Ok(Ladder { calibration: Calibration { gamma_hat, gamma, weights }, rows })
}

/// Bootstrap intervals for every entry of [`Ladder::statistics`], re-running
/// calibration, weight anchoring and all fits inside each resample.
pub fn bootstrap_ladder(
    records: &[Respondent],
    settings: &LadderSettings,
    config: &BootstrapConfig,
    exec: Execution,
) -> Result<Vec<IntervalEstimate>> {
    let k = run_ladder(records, settings)?.statistics().len();
    bootstrap_many(records, k, |rs| Ok(run_ladder(rs, settings)?.statistics()), config, exec)
}
