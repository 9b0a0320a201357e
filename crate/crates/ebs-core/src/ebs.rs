//! Empirical Bernstein Stopping: draw samples until the data-driven
//! confidence radius falls below the target accuracy.
//!
//! The stopping condition is only evaluated on a geometric grid of sample
//! counts. Each grid point consumes an equal share of the failure budget, and
//! the exponent of every check is inflated by the grid ratio so that stopping
//! between grid points stays covered. A hard cap on total measurement rounds
//! bounds the worst case.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::estimator::EnergySampler;

/// Parameters of one stopping run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbsConfig {
    /// Target half-width of the confidence interval, in energy units.
    pub epsilon: f64,
    /// Probability budget for missing the target.
    pub delta: f64,
    /// Geometric ratio between consecutive check points.
    pub beta: f64,
    /// Guaranteed range of a single sample, twice the coefficient one-norm.
    pub range: f64,
    /// Checks start only once this many samples have accumulated.
    pub min_samples: u64,
    /// Hard ceiling on measurement rounds across the whole run.
    pub cap_rounds: u64,
}

impl EbsConfig {
    /// Standard configuration: `beta` 1.1 and a floor of 10 samples.
    pub fn new(epsilon: f64, delta: f64, range: f64, cap_rounds: u64) -> Result<Self> {
        EbsConfig {
            epsilon,
            delta,
            beta: 1.1,
            range,
            min_samples: 10,
            cap_rounds,
        }
        .validated()
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        self.beta = beta;
        self.validated()
    }

    pub fn with_min_samples(mut self, min_samples: u64) -> Result<Self> {
        self.min_samples = min_samples;
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        if self.epsilon <= 0.0 || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if self.delta.is_nan() || self.delta <= 0.0 || self.delta >= 0.5 {
            return Err(Error::InvalidParameter(format!(
                "delta must lie strictly between 0 and 1/2, got {}",
                self.delta
            )));
        }
        if self.beta <= 1.0 || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must exceed 1, got {}",
                self.beta
            )));
        }
        if self.range <= 0.0 || !self.range.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "range must be positive and finite, got {}",
                self.range
            )));
        }
        if self.min_samples == 0 {
            return Err(Error::InvalidParameter(
                "min_samples must be at least 1".into(),
            ));
        }
        if self.cap_rounds == 0 {
            return Err(Error::InvalidParameter(
                "cap_rounds must be at least 1".into(),
            ));
        }
        Ok(self)
    }
}

/// Online mean and centered second moment.
///
/// Uses the shifted update (Welford's recurrence) so that a large common
/// offset in the data does not cancel catastrophically. The variance is
/// normalized by N, not N-1: it feeds a concentration bound stated for the
/// biased estimator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    sum_sq_dev: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.sum_sq_dev += delta * (value - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance (division by N); zero before the first sample.
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.sum_sq_dev / self.count as f64).max(0.0)
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }
}

/// One scheduled stopping check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckPoint {
    /// Geometric grid value; the check fires once the count exceeds it.
    pub at: u64,
    /// Exponent fed to the radius, already inflated by the grid ratio.
    pub x: f64,
}

/// The full check plan for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckSchedule {
    k0: u32,
    k_last: u32,
    d: f64,
    checks: Vec<CheckPoint>,
}

impl CheckSchedule {
    /// First geometric index, the smallest k with beta^k at least min_samples.
    pub fn k0(&self) -> u32 {
        self.k0
    }

    /// Last geometric index admitted by the round cap.
    pub fn k_last(&self) -> u32 {
        self.k_last
    }

    /// Failure budget consumed per index, delta divided by the index count.
    pub fn partial_inconfidence(&self) -> f64 {
        self.d
    }

    /// Number of geometric indices, duplicates included.
    pub fn num_indices(&self) -> u64 {
        (self.k_last - self.k0 + 1) as u64
    }

    /// Deduplicated check points, strictly increasing in `at`.
    pub fn checks(&self) -> &[CheckPoint] {
        &self.checks
    }
}

/// Lays out the geometric check grid `floor(beta^k)` for `k0 <= k <= k_last`,
/// keeping total rounds within the cap and splitting `delta` equally across
/// indices.
///
/// Consecutive indices with the same floor collapse into one check point;
/// their budget share is simply forfeited, which keeps the split summing to
/// `delta`. Errors with [`Error::CapTooSmall`] when the cap cannot even fund
/// `min_samples` samples, the regime where adaptive stopping cannot beat the
/// fixed baseline.
pub fn build_schedule(config: &EbsConfig, rounds_per_sample: u64) -> Result<CheckSchedule> {
    config.validated()?;
    if rounds_per_sample == 0 {
        return Err(Error::InvalidParameter(
            "rounds_per_sample must be at least 1".into(),
        ));
    }
    // Powers accumulate by repeated multiplication: floor(beta^k) must be
    // identical on every platform, and powf rounding is not.
    let mut power = 1.0_f64;
    let mut k = 0u32;
    while power < config.min_samples as f64 || k == 0 {
        power *= config.beta;
        k += 1;
    }
    let k0 = k;
    let mut prev_floor = {
        // floor(beta^(k0-1)), needed for the first ratio
        let mut p = 1.0_f64;
        for _ in 0..k0 - 1 {
            p *= config.beta;
        }
        (p.floor() as u64).max(1)
    };

    let mut checks: Vec<CheckPoint> = Vec::new();
    let mut raw: Vec<(u64, f64)> = Vec::new();
    loop {
        let floor = power.floor() as u64;
        if rounds_per_sample.saturating_mul(floor) > config.cap_rounds {
            break;
        }
        let alpha = floor as f64 / prev_floor as f64;
        raw.push((floor, alpha));
        prev_floor = floor;
        power *= config.beta;
        k += 1;
        if !power.is_finite() {
            break;
        }
    }
    if raw.is_empty() {
        return Err(Error::CapTooSmall {
            cap_rounds: config.cap_rounds,
            min_samples: config.min_samples,
        });
    }
    let k_last = k - 1;
    let d = config.delta / (k_last - k0 + 1) as f64;
    for (floor, alpha) in raw {
        if checks.last().map(|c| c.at) == Some(floor) {
            continue;
        }
        checks.push(CheckPoint {
            at: floor,
            x: alpha * (3.0 / d).ln(),
        });
    }
    Ok(CheckSchedule {
        k0,
        k_last,
        d,
        checks,
    })
}

/// Data-driven confidence half-width after `stats.count()` samples:
/// `std_dev * sqrt(2x/N) + 3 * range * x / N`.
///
/// Infinite before the first sample, so no stopping rule can fire at N = 0.
pub fn bernstein_radius(stats: &RunningStats, range: f64, x: f64) -> f64 {
    let n = stats.count();
    if n == 0 {
        return f64::INFINITY;
    }
    let n = n as f64;
    stats.std_dev() * (2.0 * x / n).sqrt() + 3.0 * range * x / n
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// A scheduled check certified the target accuracy.
    Bernstein,
    /// The round cap was reached first; the estimate falls back on the
    /// fixed-budget guarantee.
    HoeffdingCap,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Bernstein => "bernstein",
            Termination::HoeffdingCap => "hoeffding_cap",
        }
    }
}

/// Outcome of one adaptive estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    /// Running mean at termination.
    pub estimate: f64,
    pub samples_used: u64,
    pub rounds_used: u64,
    pub terminated_by: Termination,
    /// Confidence radius at every evaluated check, as (sample count, radius).
    pub trajectory: Vec<(u64, f64)>,
}

/// Draws samples from `sampler` until a scheduled check certifies accuracy
/// `config.epsilon` or the next sample would push past `config.cap_rounds`.
///
/// A check fires the first time the sample count strictly exceeds its grid
/// value, evaluating the radius mid-interval with that interval's inflated
/// exponent.
pub fn run_ebs<S: EnergySampler + ?Sized>(
    sampler: &S,
    config: &EbsConfig,
    rng: &mut dyn RngCore,
) -> Result<EstimationResult> {
    let rounds_per_sample = sampler.rounds_per_sample();
    let schedule = build_schedule(config, rounds_per_sample)?;
    let mut stats = RunningStats::new();
    let mut rounds_used = 0u64;
    let mut trajectory = Vec::new();
    let mut pending = schedule.checks().iter();
    let mut next_check = pending.next();

    loop {
        if rounds_used + rounds_per_sample > config.cap_rounds {
            return Ok(EstimationResult {
                estimate: stats.mean(),
                samples_used: stats.count(),
                rounds_used,
                terminated_by: Termination::HoeffdingCap,
                trajectory,
            });
        }
        let sample = sampler.sample(rng);
        debug_assert_eq!(sample.rounds_cost, rounds_per_sample);
        stats.push(sample.value);
        rounds_used += rounds_per_sample;

        while let Some(check) = next_check {
            if stats.count() <= check.at {
                break;
            }
            let radius = bernstein_radius(&stats, config.range, check.x);
            trajectory.push((stats.count(), radius));
            next_check = pending.next();
            if radius <= config.epsilon {
                return Ok(EstimationResult {
                    estimate: stats.mean(),
                    samples_used: stats.count(),
                    rounds_used,
                    terminated_by: Termination::Bernstein,
                    trajectory,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::FnSampler;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::cell::RefCell;

    fn config(epsilon: f64, cap_rounds: u64) -> EbsConfig {
        EbsConfig::new(epsilon, 0.1, 2.0, cap_rounds).unwrap()
    }

    #[test]
    fn stats_match_two_pass_on_small_data() {
        let data = [0.3, -1.2, 4.5, 0.0, 2.2, -0.7];
        let mut stats = RunningStats::new();
        for &v in &data {
            stats.push(v);
        }
        let mean = data.iter().sum::<f64>() / data.len() as f64;
        let var = data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / data.len() as f64;
        assert!((stats.mean() - mean).abs() < 1e-12);
        assert!((stats.variance() - var).abs() < 1e-12);
        assert_eq!(stats.count(), data.len() as u64);
    }

    #[test]
    fn stats_survive_large_offset() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let values: Vec<f64> = (0..1_000_000)
            .map(|_| 1e6 + rng.gen::<f64>() * 2.0 - 1.0)
            .collect();
        let mut stats = RunningStats::new();
        for &v in &values {
            stats.push(v);
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
        let rel = (stats.variance() - var).abs() / var;
        assert!(rel < 1e-6, "relative variance error {rel}");
    }

    #[test]
    fn empty_stats_are_benign() {
        let stats = RunningStats::new();
        assert_eq!(stats.count(), 0);
        assert_eq!(stats.variance(), 0.0);
        assert_eq!(bernstein_radius(&stats, 2.0, 1.0), f64::INFINITY);
    }

    #[test]
    fn schedule_first_index_for_default_beta() {
        // smallest k with 1.1^k >= 10 is 25
        let s = build_schedule(&config(0.1, 600), 1).unwrap();
        assert_eq!(s.k0(), 25);
        assert_eq!(s.checks()[0].at, 10);
    }

    #[test]
    fn schedule_last_index_respects_cap() {
        // 3 rounds per sample under a 600-round cap: 3*189 <= 600 < 3*208
        let s = build_schedule(&config(0.1, 600), 3).unwrap();
        assert_eq!(s.k_last(), 55);
        assert_eq!(s.checks().last().unwrap().at, 189);
        assert_eq!(s.num_indices(), 31);
    }

    #[test]
    fn schedule_splits_delta_equally() {
        let s = build_schedule(&config(0.1, 600), 3).unwrap();
        assert!((s.partial_inconfidence() - 0.1 / 31.0).abs() < 1e-15);
        let total = s.partial_inconfidence() * s.num_indices() as f64;
        assert!((total - 0.1).abs() < 1e-12);
    }

    #[test]
    fn schedule_checks_strictly_increase() {
        for beta in [1.01, 1.1, 1.5, 2.0] {
            let cfg = config(0.1, 5000).with_beta(beta).unwrap();
            let s = build_schedule(&cfg, 1).unwrap();
            for pair in s.checks().windows(2) {
                assert!(pair[0].at < pair[1].at, "beta {beta}");
            }
        }
    }

    #[test]
    fn schedule_dedups_repeated_floors() {
        // floor(1.01^k) stays at small integers for many k in a row
        let cfg = config(0.1, 10)
            .with_beta(1.01)
            .unwrap()
            .with_min_samples(1)
            .unwrap();
        let s = build_schedule(&cfg, 1).unwrap();
        assert_eq!(s.k0(), 1);
        let ats: Vec<u64> = s.checks().iter().map(|c| c.at).collect();
        assert_eq!(ats, vec![1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
        assert!(s.num_indices() > 10, "duplicates still consume budget");
    }

    #[test]
    fn schedule_exponent_uses_entered_interval() {
        let s = build_schedule(&config(0.1, 600), 3).unwrap();
        let d = s.partial_inconfidence();
        // first check: alpha = floor(1.1^25)/floor(1.1^24) = 10/9
        let expected = (10.0 / 9.0) * (3.0 / d).ln();
        assert!((s.checks()[0].x - expected).abs() < 1e-12);
    }

    #[test]
    fn schedule_rejects_cap_below_min_samples() {
        let err = build_schedule(&config(0.1, 600), 100);
        assert!(matches!(err, Err(Error::CapTooSmall { .. })));
    }

    #[test]
    fn radius_range_term_reference_value() {
        let mut stats = RunningStats::new();
        for _ in 0..100 {
            stats.push(0.5);
        }
        let r = bernstein_radius(&stats, 2.0, 30.0_f64.ln());
        assert!((r - 0.2040718428997293).abs() < 1e-15);
    }

    #[test]
    fn radius_with_unit_variance_reference_value() {
        let mut stats = RunningStats::new();
        for i in 0..100 {
            stats.push(if i % 2 == 0 { 1.0 } else { -1.0 });
        }
        assert!((stats.variance() - 1.0).abs() < 1e-12);
        let r = bernstein_radius(&stats, 2.0, 30.0_f64.ln());
        assert!((r - 0.4648858).abs() < 1e-6);
    }

    #[test]
    fn radius_decreases_with_more_samples() {
        let mut small = RunningStats::new();
        let mut large = RunningStats::new();
        for i in 0..100 {
            small.push(if i % 2 == 0 { 1.0 } else { -1.0 });
        }
        for i in 0..200 {
            large.push(if i % 2 == 0 { 1.0 } else { -1.0 });
        }
        let x = 30.0_f64.ln();
        assert!(bernstein_radius(&large, 2.0, x) < bernstein_radius(&small, 2.0, x));
    }

    #[test]
    fn zero_variance_run_stops_at_reference_count() {
        // constant source, 1 round per sample, cap 600: first passing check
        // sits at count 491 on the default grid
        let sampler = FnSampler::new(1, |_| 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let result = run_ebs(&sampler, &config(0.1, 600), &mut rng).unwrap();
        assert_eq!(result.terminated_by, Termination::Bernstein);
        assert_eq!(result.samples_used, 491);
        assert_eq!(result.rounds_used, 491);
        assert_eq!(result.estimate, 0.7);
        let (last_n, last_radius) = *result.trajectory.last().unwrap();
        assert_eq!(last_n, 491);
        assert!(last_radius <= 0.1);
    }

    #[test]
    fn zero_variance_run_matches_schedule_scan() {
        let sampler = FnSampler::new(1, |_| 0.7);
        let cfg = config(0.1, 600);
        let schedule = build_schedule(&cfg, 1).unwrap();
        let predicted = schedule
            .checks()
            .iter()
            .map(|c| (c.at + 1, 3.0 * cfg.range * c.x / (c.at + 1) as f64))
            .find(|&(_, radius)| radius <= cfg.epsilon)
            .map(|(n, _)| n)
            .expect("some check passes under the cap");
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let result = run_ebs(&sampler, &cfg, &mut rng).unwrap();
        assert_eq!(result.samples_used, predicted);
    }

    #[test]
    fn loose_target_stops_at_first_check() {
        // noisy source, sigma near range/2, target equal to the full range:
        // the very first check already certifies it
        let cfg = config(2.0, 10_000).with_min_samples(100).unwrap();
        let sampler = FnSampler::new(1, |rng: &mut dyn rand::RngCore| {
            if rng.gen::<f64>() < 0.5 {
                1.0
            } else {
                -1.0
            }
        });
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let result = run_ebs(&sampler, &cfg, &mut rng).unwrap();
        assert_eq!(result.terminated_by, Termination::Bernstein);
        assert_eq!(result.trajectory.len(), 1);
        assert_eq!(result.samples_used, 107);
    }

    #[test]
    fn tight_target_hits_the_cap() {
        let sampler = FnSampler::new(3, |_| 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let result = run_ebs(&sampler, &config(0.01, 600), &mut rng).unwrap();
        assert_eq!(result.terminated_by, Termination::HoeffdingCap);
        assert_eq!(result.samples_used, 200);
        assert_eq!(result.rounds_used, 600);
        assert_eq!(result.estimate, 0.7);
    }

    #[test]
    fn cap_is_never_exceeded_mid_sample() {
        // 7 rounds per sample cannot divide 600 evenly
        let sampler = FnSampler::new(7, |_| 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let result = run_ebs(&sampler, &config(0.001, 600), &mut rng).unwrap();
        assert_eq!(result.terminated_by, Termination::HoeffdingCap);
        assert_eq!(result.samples_used, 85);
        assert_eq!(result.rounds_used, 595);
    }

    #[test]
    fn trajectory_counts_strictly_increase() {
        let sampler = FnSampler::new(1, |rng: &mut dyn rand::RngCore| {
            if rng.gen::<f64>() < 0.5 {
                1.0
            } else {
                -1.0
            }
        });
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let result = run_ebs(&sampler, &config(0.05, 3000), &mut rng).unwrap();
        assert!(!result.trajectory.is_empty());
        for pair in result.trajectory.windows(2) {
            assert!(pair[0].0 < pair[1].0);
        }
    }

    #[test]
    fn config_rejects_bad_domains() {
        assert!(EbsConfig::new(0.0, 0.1, 2.0, 100).is_err());
        assert!(EbsConfig::new(0.1, 0.5, 2.0, 100).is_err());
        assert!(EbsConfig::new(0.1, 0.0, 2.0, 100).is_err());
        assert!(EbsConfig::new(0.1, 0.1, 0.0, 100).is_err());
        assert!(EbsConfig::new(0.1, 0.1, 2.0, 0).is_err());
        assert!(config(0.1, 100).with_beta(1.0).is_err());
        assert!(config(0.1, 100).with_min_samples(0).is_err());
    }

    /// Union-bound coverage: across many independent runs, the running mean
    /// stays within every evaluated radius of the true mean in all but at
    /// most a delta fraction of runs.
    #[test]
    fn radius_covers_true_mean_at_every_check() {
        let true_mean = 0.4;
        let mut violations = 0u64;
        let runs = 2000u64;
        for trial in 0..runs {
            let drawn: RefCell<Vec<f64>> = RefCell::new(Vec::new());
            let sampler = FnSampler::new(1, |rng: &mut dyn rand::RngCore| {
                let v = if rng.gen::<f64>() < 0.7 { 1.0 } else { -1.0 };
                drawn.borrow_mut().push(v);
                v
            });
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
            let result = run_ebs(&sampler, &config(0.01, 1000), &mut rng).unwrap();
            let values = drawn.borrow();
            let mut violated = false;
            for &(n, radius) in &result.trajectory {
                let mean: f64 = values[..n as usize].iter().sum::<f64>() / n as f64;
                if (mean - true_mean).abs() > radius {
                    violated = true;
                    break;
                }
            }
            if violated {
                violations += 1;
            }
        }
        let fraction = violations as f64 / runs as f64;
        assert!(fraction <= 0.1, "violation fraction {fraction}");
    }
}
