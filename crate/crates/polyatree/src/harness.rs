//! Simulation harness: null calibration, power curves against classical
//! baselines, the null-consistency experiment, and per-level evidence
//! decompositions.
//!
//! Evidence is measured as -log_bf, so larger means more alternative-like.
//! Thresholds come from the empirical null quantile of that quantity
//! (calibration), and power is the fraction of replicates exceeding the
//! threshold; baselines reject at p < 0.05 to pair with the 0.95 default
//! quantile.
//!
//! Every replicate draws from its own stream, addressed by a domain tag,
//! the grid position, and the replicate number. Results are therefore pure
//! functions of the configuration and master seed: more worker threads
//! change nothing.

use crate::baselines::{ks_two_sample, wilcoxon_rank_sum};
use crate::empirical::{empirical_test, EmpiricalConfig};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::scenarios::{sample_null_pair, sample_pair, ScenarioKind, ScenarioSpec};
use crate::subjective::{subjective_test, SubjectiveConfig, TestResult};
use rayon::prelude::*;
use std::collections::BTreeSet;

// Disjoint stream-index domains per experiment, so no replicate of one
// study can share a stream with another.
const CALIBRATION_DOMAIN: u64 = 1 << 60;
const POWER_DOMAIN: u64 = 2 << 60;
const NULL_CONSISTENCY_DOMAIN: u64 = 3 << 60;
const LEVEL_DOMAIN: u64 = 4 << 60;

/// Which test the harness runs, with its configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestMethod {
    Subjective(SubjectiveConfig),
    Empirical(EmpiricalConfig),
}

impl TestMethod {
    pub fn run(&self, y1: &[f64], y2: &[f64]) -> Result<TestResult> {
        match self {
            Self::Subjective(cfg) => subjective_test(y1, y2, cfg),
            Self::Empirical(cfg) => empirical_test(y1, y2, cfg),
        }
    }
}

/// Configuration shared by the calibration, power, and decomposition
/// studies. The same `replicates` count drives whichever study the config
/// is handed to; calibration conventionally uses more.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerStudyConfig {
    pub scenario: ScenarioKind,
    pub theta_grid: Vec<f64>,
    pub n_per_group: usize,
    pub replicates: usize,
    pub calibration_quantile: f64,
    pub method: TestMethod,
    pub master_seed: u64,
}

impl PowerStudyConfig {
    fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::InvalidConfig(
                "need at least 2 replicates".into(),
            ));
        }
        if self.replicates >= (1 << 32) || self.theta_grid.len() >= (1 << 28) {
            return Err(Error::InvalidConfig(
                "replicate count or grid too large to index streams".into(),
            ));
        }
        if self.theta_grid.is_empty() {
            return Err(Error::InvalidConfig("theta grid is empty".into()));
        }
        for &theta in &self.theta_grid {
            ScenarioSpec::new(self.scenario, theta)?;
        }
        if self.n_per_group == 0 {
            return Err(Error::InvalidConfig("n_per_group must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.calibration_quantile) {
            return Err(Error::InvalidConfig(format!(
                "calibration quantile {} outside [0, 1]",
                self.calibration_quantile
            )));
        }
        Ok(())
    }
}

/// One theta on a power curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCurvePoint {
    pub theta: f64,
    /// Fraction of replicates with evidence above the threshold.
    pub power_pt: f64,
    pub power_ks: f64,
    pub power_wilcoxon: f64,
    pub mean_ph1: f64,
    /// 5% and 95% empirical quantiles of posterior_h1, widened to the
    /// mean when a skewed draw lands the mean outside.
    pub ph1_lo: f64,
    pub ph1_hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    pub points: Vec<PowerCurvePoint>,
    pub threshold: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullConsistencyPoint {
    pub n_per_group: usize,
    pub mean_ph1: f64,
    pub ph1_lo: f64,
    pub ph1_hi: f64,
}

/// Five-number summary of one level's log-BF contributions across
/// replicates; replicates whose tree never reached the level enter as 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSummary {
    pub level: u32,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Empirical quantile of a sorted slice: the smallest order statistic with
/// at least a `q` fraction of the sample at or below it.
pub(crate) fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of an empty sample");
    let k = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[k - 1]
}

fn sorted_copy(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Runs replicate 0..count in parallel, preserving index order.
fn par_replicates<T, F>(count: usize, run: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..count).into_par_iter().map(run).collect()
}

/// Simulates null data (both groups from the scenario's reference
/// distribution) and returns the `calibration_quantile` of -log_bf across
/// `config.replicates` replicates.
pub fn calibrate_threshold(config: &PowerStudyConfig) -> Result<f64> {
    config.validate()?;
    let evidence = par_replicates(config.replicates, |r| {
        let mut stream = RngStream::new(config.master_seed, CALIBRATION_DOMAIN | r as u64);
        let (y1, y2) = sample_null_pair(
            config.scenario,
            config.n_per_group,
            config.n_per_group,
            &mut stream,
        )?;
        Ok(-config.method.run(&y1, &y2)?.log_bf_h0_over_h1)
    })?;
    Ok(empirical_quantile(&sorted_copy(&evidence), config.calibration_quantile))
}

/// Estimates power at each theta for the configured test and both
/// baselines, with posterior bands.
pub fn power_curve(config: &PowerStudyConfig, threshold: f64) -> Result<PowerCurve> {
    config.validate()?;
    if !threshold.is_finite() {
        return Err(Error::InvalidInput(format!(
            "power threshold {threshold} is not finite"
        )));
    }
    let mut points = Vec::with_capacity(config.theta_grid.len());
    for (ti, &theta) in config.theta_grid.iter().enumerate() {
        let spec = ScenarioSpec::new(config.scenario, theta)?;
        let rows = par_replicates(config.replicates, |r| {
            let idx = POWER_DOMAIN | ((ti as u64) << 32) | r as u64;
            let mut stream = RngStream::new(config.master_seed, idx);
            let (y1, y2) =
                sample_pair(&spec, config.n_per_group, config.n_per_group, &mut stream)?;
            let res = config.method.run(&y1, &y2)?;
            let ks = ks_two_sample(&y1, &y2)?;
            let wc = wilcoxon_rank_sum(&y1, &y2)?;
            Ok((
                -res.log_bf_h0_over_h1 > threshold,
                ks.p_value < 0.05,
                wc.p_value < 0.05,
                1.0 - res.posterior_h0,
            ))
        })?;
        let frac = |pred: fn(&(bool, bool, bool, f64)) -> bool| {
            rows.iter().filter(|row| pred(row)).count() as f64 / rows.len() as f64
        };
        let ph1: Vec<f64> = rows.iter().map(|row| row.3).collect();
        let mean_ph1 = ph1.iter().sum::<f64>() / ph1.len() as f64;
        let sorted = sorted_copy(&ph1);
        points.push(PowerCurvePoint {
            theta,
            power_pt: frac(|row| row.0),
            power_ks: frac(|row| row.1),
            power_wilcoxon: frac(|row| row.2),
            mean_ph1,
            ph1_lo: empirical_quantile(&sorted, 0.05).min(mean_ph1),
            ph1_hi: empirical_quantile(&sorted, 0.95).max(mean_ph1),
        });
    }
    Ok(PowerCurve {
        points,
        threshold,
        replicates: config.replicates,
    })
}

/// Distribution of posterior_h1 on pure standard-normal null data as the
/// group size grows.
pub fn null_consistency_experiment(
    n_grid: &[usize],
    replicates: usize,
    method: &TestMethod,
    master_seed: u64,
) -> Result<Vec<NullConsistencyPoint>> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "n grid must be nonempty and strictly increasing".into(),
        ));
    }
    if n_grid[0] == 0 {
        return Err(Error::InvalidConfig("group sizes must be positive".into()));
    }
    if replicates < 2 || replicates >= (1 << 32) {
        return Err(Error::InvalidConfig("bad replicate count".into()));
    }
    n_grid
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let ph1 = par_replicates(replicates, |r| {
                let idx = NULL_CONSISTENCY_DOMAIN | ((ni as u64) << 32) | r as u64;
                let mut stream = RngStream::new(master_seed, idx);
                let (y1, y2) = sample_null_pair(ScenarioKind::MeanShift, n, n, &mut stream)?;
                Ok(1.0 - method.run(&y1, &y2)?.posterior_h0)
            })?;
            let sorted = sorted_copy(&ph1);
            let mean_ph1 = ph1.iter().sum::<f64>() / ph1.len() as f64;
            Ok(NullConsistencyPoint {
                n_per_group: n,
                mean_ph1,
                ph1_lo: empirical_quantile(&sorted, 0.05).min(mean_ph1),
                ph1_hi: empirical_quantile(&sorted, 0.95).max(mean_ph1),
            })
        })
        .collect()
}

/// Per-level five-number summaries of log-BF contributions across
/// replicates at one theta.
pub fn level_decomposition_study(
    config: &PowerStudyConfig,
    theta: f64,
) -> Result<Vec<LevelSummary>> {
    config.validate()?;
    let spec = ScenarioSpec::new(config.scenario, theta)?;
    let contributions = par_replicates(config.replicates, |r| {
        let mut stream = RngStream::new(config.master_seed, LEVEL_DOMAIN | r as u64);
        let (y1, y2) = sample_pair(&spec, config.n_per_group, config.n_per_group, &mut stream)?;
        Ok(config.method.run(&y1, &y2)?.level_contributions)
    })?;
    let levels: BTreeSet<u32> = contributions
        .iter()
        .flat_map(|c| c.iter().map(|&(level, _)| level))
        .collect();
    Ok(levels
        .into_iter()
        .map(|level| {
            let per_rep: Vec<f64> = contributions
                .iter()
                .map(|c| {
                    c.iter()
                        .find(|&&(l, _)| l == level)
                        .map_or(0.0, |&(_, v)| v)
                })
                .collect();
            let sorted = sorted_copy(&per_rep);
            LevelSummary {
                level,
                min: sorted[0],
                q1: empirical_quantile(&sorted, 0.25),
                median: empirical_quantile(&sorted, 0.5),
                q3: empirical_quantile(&sorted, 0.75),
                max: sorted[sorted.len() - 1],
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config(replicates: usize) -> PowerStudyConfig {
        PowerStudyConfig {
            scenario: ScenarioKind::MeanShift,
            theta_grid: vec![0.0, 3.0],
            n_per_group: 20,
            replicates,
            calibration_quantile: 0.95,
            method: TestMethod::Subjective(SubjectiveConfig::default()),
            master_seed: 11,
        }
    }

    #[test]
    fn quantile_rule_picks_smallest_covering_order_statistic() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(empirical_quantile(&xs, 0.0), 1.0);
        assert_eq!(empirical_quantile(&xs, 0.25), 1.0);
        assert_eq!(empirical_quantile(&xs, 0.5), 2.0);
        assert_eq!(empirical_quantile(&xs, 0.51), 3.0);
        assert_eq!(empirical_quantile(&xs, 1.0), 4.0);
    }

    #[test]
    fn calibration_is_deterministic_and_quantile_monotone() {
        let config = quick_config(24);
        let a = calibrate_threshold(&config).unwrap();
        let b = calibrate_threshold(&config).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let min_cfg = PowerStudyConfig {
            calibration_quantile: 0.0,
            ..config.clone()
        };
        assert!(calibrate_threshold(&min_cfg).unwrap() <= a);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let config = quick_config(16);
        let solo = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| power_curve(&config, 1.0).unwrap());
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| power_curve(&config, 1.0).unwrap());
        assert_eq!(solo, many);
    }

    #[test]
    fn strong_shift_dominates_null_power() {
        let config = quick_config(30);
        let threshold = calibrate_threshold(&config).unwrap();
        let curve = power_curve(&config, threshold).unwrap();
        assert_eq!(curve.points.len(), 2);
        let null_point = &curve.points[0];
        let shifted = &curve.points[1];
        assert!(shifted.power_pt > null_point.power_pt + 0.4);
        assert!(shifted.power_ks > null_point.power_ks + 0.4);
        for p in &curve.points {
            for v in [p.power_pt, p.power_ks, p.power_wilcoxon, p.mean_ph1] {
                assert!((0.0..=1.0).contains(&v));
            }
            assert!(p.ph1_lo <= p.mean_ph1 && p.mean_ph1 <= p.ph1_hi);
        }
    }

    #[test]
    fn null_consistency_reports_ordered_bands() {
        let method = TestMethod::Subjective(SubjectiveConfig::default());
        let table = null_consistency_experiment(&[10, 40], 20, &method, 5).unwrap();
        assert_eq!(table.len(), 2);
        for point in &table {
            assert!(point.ph1_lo <= point.mean_ph1 && point.mean_ph1 <= point.ph1_hi);
            assert!((0.0..=1.0).contains(&point.ph1_lo));
            assert!((0.0..=1.0).contains(&point.ph1_hi));
        }
        let again = null_consistency_experiment(&[10, 40], 20, &method, 5).unwrap();
        assert_eq!(table, again);
        assert!(null_consistency_experiment(&[40, 10], 5, &method, 5).is_err());
    }

    #[test]
    fn level_decomposition_is_ordered_and_covers_low_levels() {
        let config = PowerStudyConfig {
            theta_grid: vec![2.0],
            replicates: 20,
            n_per_group: 30,
            ..quick_config(20)
        };
        let summaries = level_decomposition_study(&config, 2.0).unwrap();
        assert!(summaries.iter().any(|s| s.level == 1));
        for s in &summaries {
            assert!(s.min <= s.q1 && s.q1 <= s.median);
            assert!(s.median <= s.q3 && s.q3 <= s.max);
        }
        let levels: Vec<u32> = summaries.iter().map(|s| s.level).collect();
        let mut sorted_levels = levels.clone();
        sorted_levels.sort_unstable();
        assert_eq!(levels, sorted_levels);
    }

    #[test]
    fn empirical_method_runs_through_the_harness() {
        let config = PowerStudyConfig {
            scenario: ScenarioKind::MeanShift,
            theta_grid: vec![2.5],
            n_per_group: 10,
            replicates: 4,
            calibration_quantile: 0.95,
            method: TestMethod::Empirical(EmpiricalConfig::default()),
            master_seed: 21,
        };
        let curve = power_curve(&config, 0.5).unwrap();
        assert!((0.0..=1.0).contains(&curve.points[0].power_pt));
    }

    #[test]
    fn config_validation_rejects_bad_grids() {
        let mut config = quick_config(10);
        config.theta_grid = vec![5.0];
        assert!(matches!(
            power_curve(&config, 1.0),
            Err(Error::InvalidInput(_))
        ));
        config.theta_grid = vec![];
        assert!(calibrate_threshold(&config).is_err());
        let mut config = quick_config(1);
        config.theta_grid = vec![1.0];
        assert!(calibrate_threshold(&config).is_err());
        assert!(power_curve(&quick_config(10), f64::NAN).is_err());
    }
}
