use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ResponseProbs;
use crate::records::{Answer, Respondent, Subsample};

/// Observed answer table, stored in the same `(y, s)` order as
/// [`ResponseProbs`]. Cells are reals so that expected counts and summed
/// weights share the type with integer tallies.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ResponseCounts {
    pub cells: [f64; 4],
}

impl ResponseCounts {
    pub fn new(cells: [f64; 4]) -> Result<Self> {
        if cells.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::Domain(format!("counts must be finite and nonnegative: {cells:?}")));
        }
        Ok(Self { cells })
    }

    /// Counts in the order `(n_11, n_21, n_12, n_22)`.
    pub fn from_integers(cells: [u64; 4]) -> Self {
        Self { cells: cells.map(|c| c as f64) }
    }

    pub fn from_respondents<'a, I>(records: I) -> Self
    where
        I: IntoIterator<Item = &'a Respondent>,
    {
        let mut cells = [0.0; 4];
        for r in records {
            cells[ResponseProbs::index(r.answer, r.subsample)] += 1.0;
        }
        Self { cells }
    }

    /// Per-cell sums of respondent weights; the weighted log-likelihood is a
    /// per-respondent sum, which collapses onto these totals.
    pub fn weighted<'a, I>(records: I, weights: &[f64]) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Respondent>,
    {
        let mut cells = [0.0; 4];
        let mut n = 0;
        for (r, &w) in records.into_iter().zip(weights) {
            cells[ResponseProbs::index(r.answer, r.subsample)] += w;
            n += 1;
        }
        if n != weights.len() {
            return Err(Error::Domain(format!(
                "{} weights supplied for {n} respondents",
                weights.len()
            )));
        }
        Self::new(cells)
    }

    #[inline]
    pub fn get(&self, y: Answer, s: Subsample) -> f64 {
        self.cells[ResponseProbs::index(y, s)]
    }

    pub fn subsample_total(&self, s: Subsample) -> f64 {
        self.cells[2 * s.index()] + self.cells[2 * s.index() + 1]
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().sum()
    }

    /// `n_ys / n_s`.
    pub fn conditional(&self, y: Answer, s: Subsample) -> Result<f64> {
        let ns = self.subsample_total(s);
        if ns <= 0.0 {
            return Err(Error::InsufficientData(format!("sub-sample {} is empty", s.number())));
        }
        Ok(self.get(y, s) / ns)
    }

    /// `n_ys / n`.
    pub fn unconditional(&self, y: Answer, s: Subsample) -> Result<f64> {
        let n = self.total();
        if n <= 0.0 {
            return Err(Error::InsufficientData("no respondents".into()));
        }
        Ok(self.get(y, s) / n)
    }

    pub fn require_both_subsamples(&self) -> Result<()> {
        for s in [Subsample::One, Subsample::Two] {
            if self.subsample_total(s) <= 0.0 {
                return Err(Error::InsufficientData(format!("sub-sample {} is empty", s.number())));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { cells: self.cells.map(|c| c * factor) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_and_proportions() {
        let c = ResponseCounts::from_integers([170, 330, 330, 170]);
        assert_eq!(c.subsample_total(Subsample::One), 500.0);
        assert_eq!(c.total(), 1000.0);
        assert_eq!(c.conditional(Answer::Different, Subsample::Two).unwrap(), 0.66);
        assert_eq!(c.unconditional(Answer::Same, Subsample::Two).unwrap(), 0.17);
    }

    #[test]
    fn empty_subsample_is_insufficient() {
        let c = ResponseCounts::from_integers([3, 4, 0, 0]);
        assert!(matches!(
            c.conditional(Answer::Same, Subsample::Two),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn weight_length_mismatch() {
        let recs = [Respondent::new(Answer::Same, Subsample::One)];
        assert!(ResponseCounts::weighted(&recs, &[0.5, 0.5]).is_err());
        let c = ResponseCounts::weighted(&recs, &[0.25]).unwrap();
        assert_eq!(c.cells, [0.0, 0.25, 0.0, 0.0]);
    }
}
