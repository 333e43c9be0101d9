//! Respondent-level survey records.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Crosswise answer. DIFFERENT is answer 1, SAME is answer 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Answer {
    Different,
    Same,
}

impl Answer {
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Answer::Different => 0,
            Answer::Same => 1,
        }
    }

    /// Answer given by someone reporting the two statement truths faithfully.
    #[inline]
    pub fn crosswise(a: bool, b: bool) -> Self {
        if a == b {
            Answer::Same
        } else {
            Answer::Different
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Answer::Different => "DIFFERENT",
            Answer::Same => "SAME",
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Answer {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "DIFFERENT" => Ok(Answer::Different),
            "SAME" => Ok(Answer::Same),
            other => Err(format!("unknown answer {other:?}, expected DIFFERENT or SAME")),
        }
    }
}

/// Sub-sample 1 answers the innocuous statement with probability `p`,
/// sub-sample 2 with `1 - p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsample {
    One,
    Two,
}

impl Subsample {
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Subsample::One => 0,
            Subsample::Two => 1,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Subsample::One),
            2 => Some(Subsample::Two),
            _ => None,
        }
    }
}

/// Known truths behind the control item: statement A has prevalence 0 or 1
/// and statement B is quasi-randomized with `yes` probability 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlDesign {
    pub a_true: bool,
    b_prob: u8,
}

impl ControlDesign {
    pub fn new(a_true: bool, b_prob: u8) -> Result<Self> {
        if b_prob > 1 {
            return Err(Error::Design(format!(
                "control statement B probability must be 0 or 1, got {b_prob}"
            )));
        }
        Ok(Self { a_true, b_prob })
    }

    pub fn b_prob(&self) -> u8 {
        self.b_prob
    }

    /// The crosswise answer a respondent who knows both truths gives.
    pub fn correct_answer(&self) -> Answer {
        Answer::crosswise(self.a_true, self.b_prob == 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlResponse {
    pub answer: Answer,
    pub design: ControlDesign,
}

impl ControlResponse {
    pub fn is_correct(&self) -> bool {
        self.answer == self.design.correct_answer()
    }
}

/// One respondent: crosswise answer, sub-sample, optional control item and
/// optional completion time in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Respondent {
    pub answer: Answer,
    pub subsample: Subsample,
    pub control: Option<ControlResponse>,
    pub time_minutes: Option<f64>,
}

impl Respondent {
    pub fn new(answer: Answer, subsample: Subsample) -> Self {
        Self { answer, subsample, control: None, time_minutes: None }
    }

    pub fn with_control(mut self, control: ControlResponse) -> Self {
        self.control = Some(control);
        self
    }

    pub fn with_time(mut self, minutes: f64) -> Self {
        self.time_minutes = Some(minutes);
        self
    }

    /// `Some(false)` only when the control answer is known to be wrong.
    pub fn control_correct(&self) -> Option<bool> {
        self.control.map(|c| c.is_correct())
    }
}

/// Checks record-level invariants: completion times must be positive and finite.
pub fn validate(records: &[Respondent]) -> Result<()> {
    for (index, r) in records.iter().enumerate() {
        if let Some(t) = r.time_minutes {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Validation {
                    index,
                    message: format!("completion time must be positive, got {t}"),
                });
            }
        }
    }
    Ok(())
}
