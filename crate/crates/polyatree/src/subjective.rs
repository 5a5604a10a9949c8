//! Two-sample test under a Polya tree prior centered on the standard
//! normal.
//!
//! The pooled data are standardized, routed through normal quantile cells,
//! and each junction contributes an analytic Bayes factor term comparing
//! "both groups share the branch probability" against "each group has its
//! own". Branch probabilities carry Beta(alpha, alpha) priors with
//! alpha = c * level^2, which keeps the prior within the absolutely
//! continuous Polya tree family.

use crate::error::{Error, Result};
use crate::partition::{build_count_tree, CenteringSpec, CountTree, JunctionCounts};
use crate::special::log_beta;

/// Tuning knobs of the subjective test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubjectiveConfig {
    /// Multiplier in alpha = c * level^2. Larger values concentrate the
    /// prior toward the normal centering.
    pub c: f64,
    /// Prior probability that both groups share one distribution.
    pub prior_h0: f64,
    /// Deepest junction level expanded.
    pub depth_cap: u32,
}

impl Default for SubjectiveConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            prior_h0: 0.5,
            depth_cap: 32,
        }
    }
}

/// Outcome of either Polya tree test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    /// Log Bayes factor of "same distribution" over "different"; positive
    /// favors pooling.
    pub log_bf_h0_over_h1: f64,
    /// Posterior probability of "same distribution".
    pub posterior_h0: f64,
    /// Per-level sums of junction log Bayes factors, ascending by level;
    /// adding them reproduces `log_bf_h0_over_h1` exactly.
    pub level_contributions: Vec<(u32, f64)>,
    /// Junctions whose factor was evaluated.
    pub junction_count: usize,
    /// Tie-break and depth-cap diagnostics from the partition stage.
    pub warnings: Vec<String>,
}

/// Log Bayes factor contribution of a single junction: shared branch
/// probability (H0) against independent ones (H1), all under
/// Beta(alpha, alpha) priors.
///
/// When either group is absent from the junction (which covers every case
/// with three of the four counts zero) the factor is identically one and
/// exactly 0.0 is returned.
pub fn junction_log_bf(counts: &JunctionCounts, alpha: f64) -> f64 {
    debug_assert!(alpha > 0.0);
    if counts.group1_entering() == 0 || counts.group2_entering() == 0 {
        return 0.0;
    }
    let l1 = counts.n_left_1 as f64;
    let r1 = counts.n_right_1 as f64;
    let l2 = counts.n_left_2 as f64;
    let r2 = counts.n_right_2 as f64;
    // pooled counts are summed as integers so that exchanging the groups
    // cannot move the result by association order
    let l = counts.pooled_left() as f64;
    let r = counts.pooled_right() as f64;
    let h0 = log_beta(alpha + l, alpha + r) + log_beta(alpha, alpha);
    let h1 = log_beta(alpha + l1, alpha + r1) + log_beta(alpha + l2, alpha + r2);
    h0 - h1
}

/// Log marginal likelihood of the pooled counts under one shared Polya
/// tree, summed over realized junctions (those entered by >= 2 pooled
/// observations; junctions below carry closed-form factors that cancel in
/// any Bayes factor and are omitted).
pub fn log_marginal_likelihood(tree: &CountTree, c: f64) -> f64 {
    tree.junctions
        .values()
        .map(|j| {
            let alpha = alpha_at(c, j.level);
            log_beta(
                alpha + j.pooled_left() as f64,
                alpha + j.pooled_right() as f64,
            ) - log_beta(alpha, alpha)
        })
        .sum()
}

/// Posterior probability of H0 from a log Bayes factor and prior mass.
/// Saturates to 0 or 1 once the log odds exceed the exp range instead of
/// producing NaN.
pub fn posterior_from_log_odds(log_bf_h0_over_h1: f64, prior_h0: f64) -> f64 {
    let log_odds = log_bf_h0_over_h1 + (prior_h0 / (1.0 - prior_h0)).ln();
    1.0 / (1.0 + (-log_odds).exp())
}

pub(crate) fn alpha_at(c: f64, level: u32) -> f64 {
    let m = level as f64;
    c * m * m
}

pub(crate) fn validate_groups(y1: &[f64], y2: &[f64]) -> Result<()> {
    if y1.is_empty() {
        return Err(Error::EmptySample("group 1 is empty"));
    }
    if y2.is_empty() {
        return Err(Error::EmptySample("group 2 is empty"));
    }
    for &y in y1.iter().chain(y2) {
        if !y.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite observation {y}")));
        }
    }
    Ok(())
}

pub(crate) fn validate_shared_config(c: f64, prior_h0: f64, depth_cap: u32) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidConfig(format!("c must be positive, got {c}")));
    }
    if !(prior_h0 > 0.0 && prior_h0 < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "prior_h0 must lie in (0, 1), got {prior_h0}"
        )));
    }
    if depth_cap < 1 {
        return Err(Error::InvalidConfig("depth_cap must be >= 1".into()));
    }
    Ok(())
}

/// Assembles a [`TestResult`] from per-junction factors.
///
/// The total log Bayes factor is formed by summing the per-level sums, so
/// the decomposition reproduces the total identically.
pub(crate) fn result_from_tree<F: Fn(&JunctionCounts) -> Result<f64>>(
    tree: &CountTree,
    factor: F,
    prior_h0: f64,
    count_junction: impl Fn(&JunctionCounts) -> bool,
) -> Result<TestResult> {
    let mut level_contributions: Vec<(u32, f64)> = Vec::new();
    let mut junction_count = 0usize;
    for j in tree.junctions.values() {
        if !count_junction(j) {
            continue;
        }
        junction_count += 1;
        let lbf = factor(j)?;
        match level_contributions.last_mut() {
            Some((level, sum)) if *level == j.level => *sum += lbf,
            _ => level_contributions.push((j.level, lbf)),
        }
    }
    let log_bf = level_contributions.iter().map(|&(_, s)| s).sum();
    let mut warnings = tree.tie_warnings.clone();
    warnings.extend(tree.truncation_warnings.iter().cloned());
    Ok(TestResult {
        log_bf_h0_over_h1: log_bf,
        posterior_h0: posterior_from_log_odds(log_bf, prior_h0),
        level_contributions,
        junction_count,
        warnings,
    })
}

/// Runs the subjective Polya tree two-sample test.
///
/// Both groups are standardized by the pooled mean and standard deviation
/// (divisor n) before routing, so the test is invariant under joint affine
/// maps of the data. Errors on empty groups, non-finite values, and
/// zero-variance pooled data.
pub fn subjective_test(y1: &[f64], y2: &[f64], config: &SubjectiveConfig) -> Result<TestResult> {
    validate_groups(y1, y2)?;
    validate_shared_config(config.c, config.prior_h0, config.depth_cap)?;
    // Sum the groups separately and combine, so that swapping the inputs
    // cannot perturb the pooled moments by rounding.
    let n = (y1.len() + y2.len()) as f64;
    let mean = (y1.iter().sum::<f64>() + y2.iter().sum::<f64>()) / n;
    let ssd = |ys: &[f64]| ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>();
    let var = (ssd(y1) + ssd(y2)) / n;
    if var <= 0.0 || !var.is_finite() {
        return Err(Error::DegenerateData(format!(
            "pooled variance is {var}; cannot standardize"
        )));
    }
    let sd = var.sqrt();
    let z1: Vec<f64> = y1.iter().map(|y| (y - mean) / sd).collect();
    let z2: Vec<f64> = y2.iter().map(|y| (y - mean) / sd).collect();

    let tree = build_count_tree(&z1, &z2, CenteringSpec::StandardNormal, config.depth_cap)?;
    result_from_tree(
        &tree,
        |j| Ok(junction_log_bf(j, alpha_at(config.c, j.level))),
        config.prior_h0,
        |_| true,
    )
}
