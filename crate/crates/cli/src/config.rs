//! Flat TOML run configuration. Every key is optional; see [`RunConfig::default`]
//! for the defaults and `--help` for the command-line overrides.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ecwm::pipeline::{GammaSource, LadderSettings, WeightAnchors};
use ecwm::simulator::{PopulationSpec, TimeModel};
use ecwm::timeweights::{DEFAULT_CUTOFF_MINUTES, DEFAULT_W0, DEFAULT_W50};
use ecwm::{DesignParams, ModelKind};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// How gamma is obtained, written `naive_2ec`, `delta_pi`, `none` or
/// `fixed:<value>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GammaMethod(pub GammaSource);

impl FromStr for GammaMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let source = match s.trim() {
            "naive_2ec" => GammaSource::Naive2ec,
            "delta_pi" => GammaSource::DeltaPi,
            "none" => GammaSource::None,
            other => {
                let value = other
                    .strip_prefix("fixed:")
                    .ok_or_else(|| format!("unknown gamma method {other:?}; use naive_2ec, delta_pi, none or fixed:<value>"))?;
                let g: f64 = value.trim().parse().map_err(|_| format!("fixed gamma {value:?} is not a number"))?;
                GammaSource::Fixed(g)
            }
        };
        Ok(Self(source))
    }
}

impl TryFrom<String> for GammaMethod {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<GammaMethod> for String {
    fn from(m: GammaMethod) -> Self {
        m.to_string()
    }
}

impl fmt::Display for GammaMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            GammaSource::Naive2ec => f.write_str("naive_2ec"),
            GammaSource::DeltaPi => f.write_str("delta_pi"),
            GammaSource::None => f.write_str("none"),
            GammaSource::Fixed(g) => write!(f, "fixed:{g}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseModel {
    #[serde(alias = "ECWM")]
    Ecwm,
    #[serde(alias = "ONE_SAYERS")]
    OneSayers,
}

impl From<BaseModel> for ModelKind {
    fn from(b: BaseModel) -> Self {
        match b {
            BaseModel::Ecwm => ModelKind::Ecwm,
            BaseModel::OneSayers => ModelKind::OneSayers,
        }
    }
}

/// Anchor weights, written `w0,w50` on the command line, or `off`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightsFlag {
    Off,
    On(f64, f64),
}

impl FromStr for WeightsFlag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "off" {
            return Ok(Self::Off);
        }
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `w0,w50` or `off`, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("anchor weight {v:?} is not a number"));
        Ok(Self::On(parse(a)?, parse(b)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Innocuous `yes` probability in sub-sample 1; sub-sample 2 uses `1 - p`.
    pub p: f64,
    pub gamma_method: GammaMethod,
    pub base_model: BaseModel,
    pub weighting: bool,
    pub w0: f64,
    pub w50: f64,
    pub time_cutoff: f64,
    /// Bootstrap resamples; 0 turns the bootstrap off.
    pub bootstrap: usize,
    pub level: f64,
    pub stratified: bool,
    pub seed: u64,
    /// JSON report path for `fit` and `sensitivity`, CSV path for `simulate`
    /// and `bias-surface`.
    pub out: Option<String>,

    // Population used by `simulate`.
    pub n: usize,
    pub pi: f64,
    pub theta: f64,
    pub gamma: f64,
    pub phi: f64,
    pub subsample_split: f64,
    pub force_balance: bool,
    pub link_random_to_speed: bool,
    pub honest_median: f64,
    pub one_sayer_median: f64,
    pub random_median: f64,
    pub fast_random_median: f64,
    pub time_sigma: f64,
    pub timer_failure_rate: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TimeModel::default();
        Self {
            p: 0.2,
            gamma_method: GammaMethod(GammaSource::DeltaPi),
            base_model: BaseModel::OneSayers,
            weighting: true,
            w0: DEFAULT_W0,
            w50: DEFAULT_W50,
            time_cutoff: DEFAULT_CUTOFF_MINUTES,
            bootstrap: 0,
            level: 0.95,
            stratified: false,
            seed: 0,
            out: None,
            n: 1000,
            pi: 0.25,
            theta: 0.1,
            gamma: 0.15,
            phi: 0.05,
            subsample_split: 0.5,
            force_balance: false,
            link_random_to_speed: true,
            honest_median: t.honest_median,
            one_sayer_median: t.one_sayer_median,
            random_median: t.random_median,
            fast_random_median: t.fast_random_median,
            time_sigma: t.sigma,
            timer_failure_rate: t.timer_failure_rate,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }

    pub fn design(&self) -> CliResult<DesignParams> {
        DesignParams::new(self.p).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn needs_control(&self) -> bool {
        matches!(self.gamma_method.0, GammaSource::Naive2ec | GammaSource::DeltaPi)
    }

    pub fn ladder_settings(&self) -> CliResult<LadderSettings> {
        if self.time_cutoff.is_nan() || self.time_cutoff <= 0.0 {
            return Err(CliError::Config(format!("time_cutoff must be positive, got {}", self.time_cutoff)));
        }
        let settings = LadderSettings {
            design: self.design()?,
            gamma_source: self.gamma_method.0,
            base_model: self.base_model.into(),
            weighting: self.weighting.then_some(WeightAnchors { w0: self.w0, w50: self.w50 }),
        };
        settings.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(settings)
    }

    pub fn population(&self) -> CliResult<PopulationSpec> {
        let mut spec = PopulationSpec::new(self.n, self.pi, self.theta, self.gamma, self.design()?);
        spec.phi = self.phi;
        spec.subsample_split = self.subsample_split;
        spec.force_balance = self.force_balance;
        spec.link_random_to_speed = self.link_random_to_speed;
        spec.time_model = TimeModel {
            honest_median: self.honest_median,
            one_sayer_median: self.one_sayer_median,
            random_median: self.random_median,
            fast_random_median: self.fast_random_median,
            sigma: self.time_sigma,
            timer_failure_rate: self.timer_failure_rate,
        };
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }
}
