//! Rank-based two-sample test with an empirically centered Polya tree.
//!
//! Centering the partition on pooled midpoint ranks removes the need to
//! standardize: the answer depends on the data only through ranks, so any
//! strictly monotone transform of both groups leaves it untouched. At each
//! junction the group totals and the pooled left/right split are treated as
//! fixed margins; the free count is how many group-1 observations went
//! left. Under "one distribution" that count is central hypergeometric.
//! Under "two distributions" the groups route with independent
//! Beta(alpha, alpha) branch probabilities, and conditioning on the margins
//! makes the count Wallenius noncentral hypergeometric with odds
//! omega = theta1 / theta2; the marginal averages it over the two
//! independent priors.

use crate::error::{Error, Result};
use crate::partition::{build_count_tree, CenteringSpec, JunctionCounts};
use crate::quad::{adaptive_integrate_segmented, gauss_legendre_unit, DEFAULT_REL_TOL};
use crate::rng::RngStream;
use crate::special::{log_beta, log_gamma};
use crate::subjective::{
    alpha_at, result_from_tree, validate_groups, validate_shared_config, TestResult,
};
use std::collections::HashMap;
use std::sync::{LazyLock, Mutex};

/// How the alternative's junction marginal (a double expectation over two
/// Beta priors) is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum H1Integration {
    /// Deterministic tensor-product rule with this many nodes per axis.
    TensorQuadrature { nodes_per_axis: usize },
    /// Plain Monte Carlo over prior draws; the stream for each junction is
    /// derived from `master_seed` and the junction's address, so results
    /// do not depend on evaluation order.
    MonteCarlo { samples: usize, master_seed: u64 },
}

/// Tuning knobs of the empirically centered test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalConfig {
    /// Multiplier in alpha = c * level^2.
    pub c: f64,
    /// Prior probability of "one distribution".
    pub prior_h0: f64,
    /// Deepest junction level expanded.
    pub depth_cap: u32,
    pub h1_integration: H1Integration,
}

impl Default for EmpiricalConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            prior_h0: 0.5,
            depth_cap: 32,
            h1_integration: H1Integration::TensorQuadrature { nodes_per_axis: 32 },
        }
    }
}

fn ln_choose(n: f64, k: f64) -> f64 {
    log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0)
}

/// Central hypergeometric log-pmf: probability that `x` of the `draws`
/// items taken without replacement from a population of `total` (of which
/// `successes` are marked) are marked. Returns -inf off the support.
pub fn log_hypergeometric_pmf(x: u32, total: u32, successes: u32, draws: u32) -> f64 {
    assert!(
        successes <= total && draws <= total,
        "hypergeometric margins exceed the population"
    );
    let lo = (draws + successes).saturating_sub(total);
    let hi = successes.min(draws);
    if x < lo || x > hi {
        return f64::NEG_INFINITY;
    }
    let (x, n_tot, m, n) = (x as f64, total as f64, successes as f64, draws as f64);
    ln_choose(m, x) + ln_choose(n_tot - m, n - x) - ln_choose(n_tot, n)
}

/// Parameters of the Wallenius noncentral hypergeometric distribution:
/// `draws` balls taken one at a time from `total`, where each of the
/// `successes` marked balls competes with weight `omega` against unit
/// weight for the rest, and `x` marked balls end up drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalleniusParams {
    pub x: u32,
    pub total: u32,
    pub successes: u32,
    pub draws: u32,
    pub omega: f64,
}

impl WalleniusParams {
    fn support(&self) -> (u32, u32) {
        (
            (self.draws + self.successes).saturating_sub(self.total),
            self.successes.min(self.draws),
        )
    }
}

/// Log-pmf of the Wallenius distribution via its integral representation
///
///   pmf = C(m, x) C(N - m, n - x) * Int_0^1 (1 - t^(w/D))^x (1 - t^(1/D))^(n-x) dt,
///   D = w (m - x) + (N - m - n + x),
///
/// evaluated with adaptive quadrature to `rel_tol`. Returns -inf off the
/// support and 0.0 when the support is a single point.
pub fn wallenius_log_pmf(params: &WalleniusParams, rel_tol: f64) -> Result<f64> {
    let WalleniusParams {
        x,
        total,
        successes,
        draws,
        omega,
    } = *params;
    if successes > total || draws > total {
        return Err(Error::InvalidInput(format!(
            "wallenius margins exceed the population: {params:?}"
        )));
    }
    if !(1e-8..=1e8).contains(&omega) {
        return Err(Error::InvalidInput(format!(
            "wallenius odds {omega} outside [1e-8, 1e8]"
        )));
    }
    let (lo, hi) = params.support();
    if x < lo || x > hi {
        return Ok(f64::NEG_INFINITY);
    }
    if lo == hi {
        return Ok(0.0);
    }
    let (xf, nf, mf, df) = (x as f64, total as f64, successes as f64, draws as f64);
    let prefactor = ln_choose(mf, xf) + ln_choose(nf - mf, df - xf);
    let d = omega * (mf - xf) + (nf - mf - df + xf);
    let integral = wallenius_integral(xf, df - xf, omega / d, 1.0 / d, rel_tol)?;
    Ok(prefactor + integral.max(f64::MIN_POSITIVE).ln())
}

/// Int_0^1 (1 - t^a)^k1 (1 - t^b)^k2 dt with the integrand assembled in log
/// space; a, b > 0.
fn wallenius_integral(k1: f64, k2: f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    // A rate far above 1 confines all variation of (1 - t^rate) to a layer
    // at t = 1 thinner than the quadrature rule's node spacing, where the
    // error estimate cannot see it; seed breakpoints across the layer's
    // dyadic scales.
    let mut breaks = Vec::new();
    for rate in [a, b] {
        if rate > 2.0 {
            let mut s = 0.25;
            loop {
                let t = (-(s * std::f64::consts::LN_2) / rate).exp();
                if t < 0.55 {
                    break;
                }
                breaks.push(t);
                s *= 4.0;
            }
        }
    }
    adaptive_integrate_segmented(
        |t| {
            let lt = t.ln();
            // ln(1 - t^a) = ln(-expm1(a ln t)), stable for t^a near 1
            let term1 = if k1 > 0.0 { k1 * (-f64::exp_m1(a * lt)).ln() } else { 0.0 };
            let term2 = if k2 > 0.0 { k2 * (-f64::exp_m1(b * lt)).ln() } else { 0.0 };
            (term1 + term2).exp()
        },
        rel_tol,
        &breaks,
    )
}

// One axis of the tensor rule for E[f(theta)] under Beta(alpha, alpha),
// as (theta, probability weight) pairs summing to one.
//
// For alpha < 50 each half of (0, 1) is mapped through theta = w^(1/alpha),
// which absorbs the theta^(alpha - 1) density factor exactly and handles
// the endpoint singularities of alpha < 1. For larger alpha the density is
// a sharp analytic bump around 1/2, so plain Gauss-Legendre nodes are laid
// across +/- 12 posterior standard deviations with log-space density
// weights.
fn beta_axis_rule(alpha: f64, nodes_per_axis: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(nodes_per_axis);
    if alpha < 50.0 {
        let half_nodes = (nodes_per_axis / 2).max(1);
        let gl = gauss_legendre_unit(half_nodes);
        let upper = 0.5f64.powf(alpha);
        let lb = log_beta(alpha, alpha);
        for &(xi, wi) in &gl {
            let w = upper * xi;
            let theta = w.powf(1.0 / alpha);
            let weight = upper * wi / alpha * ((alpha - 1.0) * (1.0 - theta).ln() - lb).exp();
            rule.push((theta, weight));
            rule.push((1.0 - theta, weight));
        }
    } else {
        let gl = gauss_legendre_unit(nodes_per_axis);
        let sd = 0.5 / (2.0 * alpha + 1.0).sqrt();
        let lo = (0.5 - 12.0 * sd).max(1e-12);
        let hi = (0.5 + 12.0 * sd).min(1.0 - 1e-12);
        let lb = log_beta(alpha, alpha);
        for &(xi, wi) in &gl {
            let theta = lo + (hi - lo) * xi;
            let log_density = (alpha - 1.0) * (theta.ln() + (-theta).ln_1p()) - lb;
            rule.push((theta, wi * (hi - lo) * log_density.exp()));
        }
    }
    let total: f64 = rule.iter().map(|&(_, w)| w).sum();
    for (_, w) in &mut rule {
        *w /= total;
    }
    rule
}

// The same junction read with the groups exchanged describes the same
// distribution (exchange x with n - x, successes with total - successes,
// and invert the odds, which the exchangeable theta priors absorb). Both
// orientations are therefore one value; computing the one with the smaller
// success margin makes group exchange a bitwise no-op and doubles cache
// hits.
fn canonical_margins(x: u32, total: u32, successes: u32, draws: u32) -> (u32, u32) {
    if 2 * successes < total || (2 * successes == total && x <= draws - x) {
        (x, successes)
    } else {
        (draws - x, total - successes)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct H1Key {
    x: u32,
    total: u32,
    successes: u32,
    draws: u32,
    alpha_bits: u64,
    nodes_per_axis: usize,
}

// Junction count signatures recur heavily across simulation replicates and
// the tensor rule is pure, so quadrature results are memoized process-wide.
// A hit returns exactly the value a fresh computation would.
static H1_QUAD_CACHE: LazyLock<Mutex<HashMap<H1Key, f64>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// Log marginal probability of the junction's group-1 left count under the
/// alternative: margins fixed, independent Beta(alpha, alpha) branch
/// probabilities for the groups, Wallenius likelihood averaged over both.
pub fn h1_junction_log_marginal(
    counts: &JunctionCounts,
    alpha: f64,
    config: &EmpiricalConfig,
) -> Result<f64> {
    let total = counts.pooled_entering();
    let successes = counts.group1_entering();
    let draws = counts.pooled_left();
    let x = counts.n_left_1;
    assert!(
        total >= 2 && successes > 0 && successes < total,
        "junction must mix both groups"
    );
    let (cx, cm) = canonical_margins(x, total, successes, draws);
    match config.h1_integration {
        H1Integration::TensorQuadrature { nodes_per_axis } => {
            let key = H1Key {
                x: cx,
                total,
                successes: cm,
                draws,
                alpha_bits: alpha.to_bits(),
                nodes_per_axis,
            };
            if let Some(&hit) = H1_QUAD_CACHE.lock().unwrap().get(&key) {
                return Ok(hit);
            }
            let value = h1_tensor_quadrature(cx, total, cm, draws, alpha, nodes_per_axis)?;
            H1_QUAD_CACHE.lock().unwrap().insert(key, value);
            Ok(value)
        }
        H1Integration::MonteCarlo {
            samples,
            master_seed,
        } => {
            // stream address derived from the junction so concurrent
            // evaluation order cannot matter
            let mut state = counts.path;
            let mixed = crate::rng::mix_to_index(&mut state, counts.level as u64);
            let mut stream = RngStream::new(master_seed, mixed);
            h1_monte_carlo(cx, total, cm, draws, alpha, samples, &mut stream)
        }
    }
}

fn h1_tensor_quadrature(
    x: u32,
    total: u32,
    successes: u32,
    draws: u32,
    alpha: f64,
    nodes_per_axis: usize,
) -> Result<f64> {
    let axis = beta_axis_rule(alpha, nodes_per_axis);
    let mut mean = 0.0;
    for &(t1, w1) in &axis {
        for &(t2, w2) in &axis {
            let omega = (t1 / t2).clamp(1e-8, 1e8);
            let w = wallenius_log_pmf(
                &WalleniusParams {
                    x,
                    total,
                    successes,
                    draws,
                    omega,
                },
                DEFAULT_REL_TOL,
            )?;
            mean += w1 * w2 * w.exp();
        }
    }
    Ok(mean.max(f64::MIN_POSITIVE).ln())
}

fn h1_monte_carlo(
    x: u32,
    total: u32,
    successes: u32,
    draws: u32,
    alpha: f64,
    samples: usize,
    stream: &mut RngStream,
) -> Result<f64> {
    let mut sum = 0.0;
    for _ in 0..samples {
        let t1 = stream.next_beta(alpha, alpha);
        let t2 = stream.next_beta(alpha, alpha);
        let omega = (t1 / t2).clamp(1e-8, 1e8);
        let w = wallenius_log_pmf(
            &WalleniusParams {
                x,
                total,
                successes,
                draws,
                omega,
            },
            DEFAULT_REL_TOL,
        )?;
        sum += w.exp();
    }
    Ok((sum / samples as f64).max(f64::MIN_POSITIVE).ln())
}

fn validate_h1(integration: &H1Integration) -> Result<()> {
    match *integration {
        H1Integration::TensorQuadrature { nodes_per_axis } => {
            if !(2..=512).contains(&nodes_per_axis) {
                return Err(Error::InvalidConfig(format!(
                    "nodes_per_axis {nodes_per_axis} outside [2, 512]"
                )));
            }
        }
        H1Integration::MonteCarlo { samples, .. } => {
            if samples < 16 {
                return Err(Error::InvalidConfig(format!(
                    "Monte Carlo samples {samples} below 16"
                )));
            }
        }
    }
    Ok(())
}

/// Runs the empirically centered Polya tree two-sample test.
///
/// No standardization is applied; the partition depends only on pooled
/// ranks. Junctions entered by fewer than two pooled observations, or
/// entered by one group alone, or whose pooled flow is one-sided, carry no
/// evidence and are skipped. Rank ties are broken by input order and
/// reported in `warnings`.
pub fn empirical_test(y1: &[f64], y2: &[f64], config: &EmpiricalConfig) -> Result<TestResult> {
    validate_groups(y1, y2)?;
    validate_shared_config(config.c, config.prior_h0, config.depth_cap)?;
    validate_h1(&config.h1_integration)?;
    let tree = build_count_tree(y1, y2, CenteringSpec::Empirical, config.depth_cap)?;
    let contributes = |j: &JunctionCounts| {
        let total = j.pooled_entering();
        let m = j.group1_entering();
        let n = j.pooled_left();
        m > 0 && m < total && n > 0 && n < total
    };
    Ok(result_from_tree(
        &tree,
        |j| {
            let h0 = log_hypergeometric_pmf(
                j.n_left_1,
                j.pooled_entering(),
                j.group1_entering(),
                j.pooled_left(),
            );
            let h1 = h1_junction_log_marginal(j, alpha_at(config.c, j.level), config)?;
            Ok(h0 - h1)
        },
        config.prior_h0,
        contributes,
    )?)
}
