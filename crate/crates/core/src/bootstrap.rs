//! Nonparametric percentile bootstrap.
//!
//! Whole respondent rows are resampled with replacement, so the crosswise
//! answer, sub-sample, control outcome and completion time of a respondent
//! always travel together. Resample `i` draws from its own ChaCha stream
//! derived from `(seed, i)`, which makes results independent of scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::records::Respondent;

/// More than this share of failed resamples makes the interval unreliable.
pub const MAX_FAILED_SHARE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub level: f64,
    pub seed: u64,
    /// Resample within sub-samples, keeping their sizes fixed.
    pub stratified: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { n_resamples: 10_000, level: 0.95, seed: 0, stratified: false }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_resamples == 0 {
            return Err(Error::Domain("bootstrap needs at least one resample".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Domain(format!("confidence level {} is outside (0, 1)", self.level)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub n_failed: usize,
}

/// Grouping used by the stratified bootstrap.
pub trait Stratum {
    fn stratum(&self) -> usize;
}

impl Stratum for Respondent {
    fn stratum(&self) -> usize {
        self.subsample.index()
    }
}

impl Stratum for f64 {
    fn stratum(&self) -> usize {
        0
    }
}

/// Rows of resample `index`.
pub fn resample<T: Clone + Stratum>(records: &[T], config: &BootstrapConfig, index: usize) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let n = records.len();
    if n == 0 {
        return Vec::new();
    }
    if !config.stratified {
        return (0..n).map(|_| records[rng.random_range(0..n)].clone()).collect();
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, r) in records.iter().enumerate() {
        let s = r.stratum();
        if groups.len() <= s {
            groups.resize_with(s + 1, Vec::new);
        }
        groups[s].push(i);
    }
    let mut out = Vec::with_capacity(n);
    for g in groups.iter().filter(|g| !g.is_empty()) {
        for _ in 0..g.len() {
            out.push(records[g[rng.random_range(0..g.len())]].clone());
        }
    }
    out
}

/// Order statistics `ceil(a/2 * B)` and `ceil((1 - a/2) * B)` (1-based) of
/// the sorted estimates, with `a = 1 - level`.
pub fn percentile_interval(values: &[f64], level: f64) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let b = v.len() as f64;
    let alpha = 1.0 - level;
    // The slack absorbs representation error in products like 0.025 * 10000.
    let rank = |x: f64| ((x - 1e-9).ceil() as usize).clamp(1, v.len());
    let lo = rank(alpha / 2.0 * b);
    let hi = rank((1.0 - alpha / 2.0) * b);
    Some((v[lo - 1], v[hi - 1]))
}

/// Scalar bootstrap: `pipeline` is re-run in full on every resample.
pub fn bootstrap_ci<T, F>(records: &[T], pipeline: F, config: &BootstrapConfig) -> Result<IntervalEstimate>
where
    T: Clone + Stratum + Send + Sync,
    F: Fn(&[T]) -> Result<f64> + Sync + Send,
{
    let out = bootstrap_many(records, 1, |rs| pipeline(rs).map(|v| vec![v]), config, Execution::default())?;
    Ok(out[0])
}

/// Bootstrap for a pipeline producing `k` estimates at once; a resample that
/// errors, or yields a non-finite or wrongly sized output, counts as failed for
/// every statistic.
pub fn bootstrap_many<T, F>(
    records: &[T],
    k: usize,
    pipeline: F,
    config: &BootstrapConfig,
    exec: Execution,
) -> Result<Vec<IntervalEstimate>>
where
    T: Clone + Stratum + Send + Sync,
    F: Fn(&[T]) -> Result<Vec<f64>> + Sync + Send,
{
    config.validate()?;
    let point = pipeline(records)?;
    if point.len() != k {
        return Err(Error::Consistency(format!("pipeline returned {} values, expected {k}", point.len())));
    }
    let draws: Vec<Option<Vec<f64>>> = map_indexed(exec, config.n_resamples, |i| {
        let sample = resample(records, config, i);
        pipeline(&sample).ok().filter(|v| v.len() == k && v.iter().all(|x| x.is_finite()))
    });
    let ok: Vec<&Vec<f64>> = draws.iter().flatten().collect();
    let n_failed = config.n_resamples - ok.len();
    if n_failed as f64 > MAX_FAILED_SHARE * config.n_resamples as f64 {
        return Err(Error::Unreliable { failed: n_failed, total: config.n_resamples });
    }
    (0..k)
        .map(|j| {
            let column: Vec<f64> = ok.iter().map(|v| v[j]).collect();
            let (lower, upper) = percentile_interval(&column, config.level)
                .ok_or(Error::Unreliable { failed: n_failed, total: config.n_resamples })?;
            Ok(IntervalEstimate { point: point[j], lower, upper, n_failed })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_pipeline_gives_degenerate_interval() {
        let data: Vec<f64> = (0..50).map(f64::from).collect();
        let cfg = BootstrapConfig { n_resamples: 200, ..Default::default() };
        let ci = bootstrap_ci(&data, |_| Ok(0.2), &cfg).unwrap();
        assert_eq!((ci.lower, ci.point, ci.upper), (0.2, 0.2, 0.2));
        assert_eq!(ci.n_failed, 0);
    }

    #[test]
    fn percentile_ranks() {
        let v: Vec<f64> = (1..=10_000).rev().map(f64::from).collect();
        assert_eq!(percentile_interval(&v, 0.95), Some((250.0, 9750.0)));
        let v: Vec<f64> = (1..=40).map(f64::from).collect();
        // ceil(.025 * 40) = 1, ceil(.975 * 40) = 39
        assert_eq!(percentile_interval(&v, 0.95), Some((1.0, 39.0)));
        assert_eq!(percentile_interval(&[3.0], 0.95), Some((3.0, 3.0)));
        // ceil(.05 * 9) = 1, ceil(.95 * 9) = 9
        let v = [9.0, 1.0, 5.0, 3.0, 7.0, 2.0, 8.0, 4.0, 6.0];
        assert_eq!(percentile_interval(&v, 0.9), Some((1.0, 9.0)));
    }

    #[test]
    fn same_seed_is_bit_identical_across_modes() {
        let data: Vec<f64> = (0..300).map(|i| ((i * 37) % 101) as f64 / 101.0).collect();
        let mean = |xs: &[f64]| Ok(vec![xs.iter().sum::<f64>() / xs.len() as f64]);
        let cfg = BootstrapConfig { n_resamples: 500, seed: 42, ..Default::default() };
        let a = bootstrap_many(&data, 1, mean, &cfg, Execution::Sequential).unwrap();
        let b = bootstrap_many(&data, 1, mean, &cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let c = bootstrap_many(&data, 1, mean, &BootstrapConfig { seed: 43, ..cfg }, Execution::Sequential).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn too_many_failures_is_an_error() {
        let data: Vec<f64> = (0..20).map(f64::from).collect();
        let cfg = BootstrapConfig { n_resamples: 100, seed: 1, ..Default::default() };
        // Fails whenever the first drawn row is odd: about half the resamples.
        let flaky = |xs: &[f64]| if xs[0] as usize % 2 == 1 { Err(Error::Domain("odd".into())) } else { Ok(1.0) };
        let err = bootstrap_ci(&data, flaky, &cfg);
        assert!(matches!(err, Err(Error::Unreliable { .. })), "{err:?}");
    }

    #[test]
    fn failed_resamples_are_counted() {
        let data: Vec<f64> = (0..1000).map(f64::from).collect();
        let cfg = BootstrapConfig { n_resamples: 200, seed: 3, ..Default::default() };
        // Row 0 appears in a resample with probability about 63%; fail when
        // it is drawn at least 4 times (about 2%).
        let pipeline = |xs: &[f64]| {
            if xs.iter().filter(|&&x| x == 0.0).count() >= 4 {
                Err(Error::Domain("rare".into()))
            } else {
                Ok(xs[0])
            }
        };
        let ci = bootstrap_ci(&data, pipeline, &cfg).unwrap();
        assert!(ci.n_failed <= 20);
        assert!(ci.lower <= ci.upper);
    }

    #[test]
    fn stratified_resampling_keeps_group_sizes() {
        use crate::records::{Answer, Subsample};
        let mut recs = vec![Respondent::new(Answer::Same, Subsample::One); 30];
        recs.extend(vec![Respondent::new(Answer::Different, Subsample::Two); 70]);
        let cfg = BootstrapConfig { n_resamples: 10, stratified: true, ..Default::default() };
        for i in 0..10 {
            let s = resample(&recs, &cfg, i);
            assert_eq!(s.len(), 100);
            assert_eq!(s.iter().filter(|r| r.subsample == Subsample::One).count(), 30);
        }
    }

    #[test]
    fn invalid_config() {
        let data = [1.0];
        let cfg = BootstrapConfig { n_resamples: 0, ..Default::default() };
        assert!(bootstrap_ci(&data, |_| Ok(1.0), &cfg).is_err());
        let cfg = BootstrapConfig { level: 1.0, ..Default::default() };
        assert!(bootstrap_ci(&data, |_| Ok(1.0), &cfg).is_err());
    }
}
