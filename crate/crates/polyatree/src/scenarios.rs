//! Data generators for the eight canonical two-sample departures used in
//! the power studies.
//!
//! Group 1 is always standard normal (log-standard-normal for the two
//! lognormal kinds); group 2 departs from it along one axis indexed by
//! theta. Every generator draws group 1 fully before group 2 from a single
//! stream, so a `(seed, index)` pair pins down both samples exactly.

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Variance of the contaminating normal in the outlier scenario. The
/// second parameter of an N(0, x) here is a variance throughout, matching
/// the variance-shift convention N(0, theta^2).
const OUTLIER_VARIANCE: f64 = 20.0;

/// The departure axis for group 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// N(theta, 1).
    MeanShift,
    /// N(0, theta^2).
    VarianceShift,
    /// Half-half mixture of N(theta, 1) and N(-theta, 1).
    Mixture,
    /// Student t with 1/theta degrees of freedom.
    Tails,
    /// Skew-normal with shape theta.
    Skew,
    /// (1 - theta) N(0, 1) + theta N(0, 20).
    Outlier,
    /// log Y ~ N(theta, 1).
    LognormalMean,
    /// log Y ~ N(0, theta^2).
    LognormalVariance,
}

impl ScenarioKind {
    /// Closed theta interval the scenario is defined over.
    pub fn theta_range(self) -> (f64, f64) {
        match self {
            Self::MeanShift | Self::Mixture | Self::LognormalMean => (0.0, 3.0),
            Self::VarianceShift | Self::LognormalVariance => (1.0, 3.0),
            Self::Tails => (1e-3, 10.0),
            Self::Skew => (1.0, 10.0),
            Self::Outlier => (0.0, 1.0),
        }
    }

    /// Whether group 1 lives on the log scale (positive data).
    pub fn is_lognormal(self) -> bool {
        matches!(self, Self::LognormalMean | Self::LognormalVariance)
    }
}

/// A scenario kind together with a validated theta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec {
    kind: ScenarioKind,
    theta: f64,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, theta: f64) -> Result<Self> {
        let (lo, hi) = kind.theta_range();
        if !theta.is_finite() || theta < lo || theta > hi {
            return Err(Error::InvalidInput(format!(
                "theta {theta} outside [{lo}, {hi}] for {kind:?}"
            )));
        }
        Ok(Self { kind, theta })
    }

    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

fn check_sizes(n1: usize, n2: usize) -> Result<()> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidInput(
            "scenario sample sizes must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Student t draw with `nu` degrees of freedom: normal over the root of a
/// scaled chi-square. Tiny `nu` can underflow the chi-square draw to zero;
/// such draws are discarded and repeated.
fn next_student_t(stream: &mut RngStream, nu: f64) -> f64 {
    loop {
        let z = stream.next_normal();
        let chi2 = 2.0 * stream.next_gamma(nu / 2.0);
        let t = z / (chi2 / nu).sqrt();
        if t.is_finite() {
            return t;
        }
    }
}

/// Skew-normal draw with shape `lambda`, via the half-normal
/// representation delta |z0| + sqrt(1 - delta^2) z1.
fn next_skew_normal(stream: &mut RngStream, lambda: f64) -> f64 {
    let delta = lambda / (1.0 + lambda * lambda).sqrt();
    let z0 = stream.next_normal();
    let z1 = stream.next_normal();
    delta * z0.abs() + (1.0 - delta * delta).sqrt() * z1
}

fn next_group2(stream: &mut RngStream, kind: ScenarioKind, theta: f64) -> f64 {
    match kind {
        ScenarioKind::MeanShift => theta + stream.next_normal(),
        ScenarioKind::VarianceShift => theta * stream.next_normal(),
        ScenarioKind::Mixture => {
            let center = if stream.next_uniform() < 0.5 { theta } else { -theta };
            center + stream.next_normal()
        }
        ScenarioKind::Tails => next_student_t(stream, 1.0 / theta),
        ScenarioKind::Skew => next_skew_normal(stream, theta),
        ScenarioKind::Outlier => {
            let scale = if stream.next_uniform() < theta {
                OUTLIER_VARIANCE.sqrt()
            } else {
                1.0
            };
            scale * stream.next_normal()
        }
        ScenarioKind::LognormalMean => (theta + stream.next_normal()).exp(),
        ScenarioKind::LognormalVariance => (theta * stream.next_normal()).exp(),
    }
}

/// Draws the two groups for one replicate: group 1 from the scenario's
/// reference distribution, group 2 from the theta-indexed alternative.
pub fn sample_pair(
    spec: &ScenarioSpec,
    n1: usize,
    n2: usize,
    stream: &mut RngStream,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_sizes(n1, n2)?;
    let y1 = draw_reference(spec.kind, n1, stream);
    let y2 = (0..n2)
        .map(|_| next_group2(stream, spec.kind, spec.theta))
        .collect();
    Ok((y1, y2))
}

/// Draws both groups from the scenario's reference distribution; this is
/// the null configuration used to calibrate thresholds.
pub fn sample_null_pair(
    kind: ScenarioKind,
    n1: usize,
    n2: usize,
    stream: &mut RngStream,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_sizes(n1, n2)?;
    let y1 = draw_reference(kind, n1, stream);
    let y2 = draw_reference(kind, n2, stream);
    Ok((y1, y2))
}

fn draw_reference(kind: ScenarioKind, n: usize, stream: &mut RngStream) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z = stream.next_normal();
            if kind.is_lognormal() {
                z.exp()
            } else {
                z
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(xs: &[f64]) -> f64 {
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    fn variance(xs: &[f64]) -> f64 {
        let m = mean(xs);
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
    }

    fn skewness(xs: &[f64]) -> f64 {
        let m = mean(xs);
        let n = xs.len() as f64;
        let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
        let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
        m3 / m2.powf(1.5)
    }

    fn draw(kind: ScenarioKind, theta: f64, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let spec = ScenarioSpec::new(kind, theta).unwrap();
        let mut stream = RngStream::new(seed, 17);
        sample_pair(&spec, n, n, &mut stream).unwrap()
    }

    #[test]
    fn theta_ranges_are_enforced() {
        assert!(ScenarioSpec::new(ScenarioKind::MeanShift, 3.5).is_err());
        assert!(ScenarioSpec::new(ScenarioKind::VarianceShift, 0.5).is_err());
        assert!(ScenarioSpec::new(ScenarioKind::Tails, 0.0).is_err());
        assert!(ScenarioSpec::new(ScenarioKind::Outlier, 1.0).is_ok());
        assert!(ScenarioSpec::new(ScenarioKind::Skew, f64::NAN).is_err());
    }

    #[test]
    fn reference_group_is_standard_normal() {
        let (y1, _) = draw(ScenarioKind::MeanShift, 1.5, 100_000, 5);
        assert!(mean(&y1).abs() < 0.012, "mean {}", mean(&y1));
        assert!((variance(&y1) - 1.0).abs() < 0.02, "var {}", variance(&y1));
    }

    #[test]
    fn mean_shift_at_zero_matches_null() {
        let (_, y2) = draw(ScenarioKind::MeanShift, 0.0, 100_000, 6);
        assert!(mean(&y2).abs() < 0.012);
        assert!((variance(&y2) - 1.0).abs() < 0.02);
    }

    #[test]
    fn variance_shift_squares_theta() {
        // SE of the sample variance of N(0, 4) is 4 sqrt(2/(n-1))
        let (_, y2) = draw(ScenarioKind::VarianceShift, 2.0, 100_000, 7);
        let se = 4.0 * (2.0f64 / 99_999.0).sqrt();
        assert!((variance(&y2) - 4.0).abs() < 3.0 * se, "var {}", variance(&y2));
    }

    #[test]
    fn mixture_is_centered_with_inflated_variance() {
        // E = 0, Var = 1 + theta^2
        let (_, y2) = draw(ScenarioKind::Mixture, 2.0, 100_000, 8);
        assert!(mean(&y2).abs() < 0.03);
        assert!((variance(&y2) - 5.0).abs() < 0.1, "var {}", variance(&y2));
    }

    #[test]
    fn near_normal_tails_look_normal() {
        // theta = 1e-3 is t with 1000 df: variance 1000/998
        let (_, y2) = draw(ScenarioKind::Tails, 1e-3, 100_000, 9);
        assert!((variance(&y2) - 1.002).abs() < 0.02, "var {}", variance(&y2));
    }

    #[test]
    fn heavy_tails_produce_finite_draws() {
        // theta = 10 is t with 0.1 df: no moments, but all draws finite
        let (_, y2) = draw(ScenarioKind::Tails, 10.0, 10_000, 10);
        assert!(y2.iter().all(|v| v.is_finite()));
        let spread = y2.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        assert!(spread > 1e3, "0.1 df should produce extreme draws");
    }

    #[test]
    fn skewness_matches_closed_form() {
        let lambda = 5.0f64;
        let delta = lambda / (1.0 + lambda * lambda).sqrt();
        let b = delta * (2.0 / std::f64::consts::PI).sqrt();
        let gamma1 = (4.0 - std::f64::consts::PI) / 2.0 * b.powi(3)
            / (1.0 - b * b).powf(1.5);
        let (_, y2) = draw(ScenarioKind::Skew, lambda, 200_000, 11);
        assert!(
            (skewness(&y2) - gamma1).abs() < 0.03,
            "skewness {} vs {}",
            skewness(&y2),
            gamma1
        );
    }

    #[test]
    fn outlier_extremes_reduce_to_pure_normals() {
        let (_, clean) = draw(ScenarioKind::Outlier, 0.0, 100_000, 12);
        assert!((variance(&clean) - 1.0).abs() < 0.02);
        let (_, wide) = draw(ScenarioKind::Outlier, 1.0, 100_000, 13);
        let se = 20.0 * (2.0f64 / 99_999.0).sqrt();
        assert!(
            (variance(&wide) - 20.0).abs() < 3.0 * se,
            "var {}",
            variance(&wide)
        );
    }

    #[test]
    fn lognormal_kinds_are_positive_with_matching_moments() {
        let (y1, y2) = draw(ScenarioKind::LognormalMean, 1.0, 200_000, 14);
        assert!(y1.iter().chain(y2.iter()).all(|v| *v > 0.0));
        // E[exp(theta + Z)] = exp(theta + 1/2)
        let want = (1.5f64).exp();
        assert!((mean(&y2) - want).abs() < 0.08, "mean {}", mean(&y2));
        let (_, v2) = draw(ScenarioKind::LognormalVariance, 2.0, 100_000, 15);
        // median of exp(2 Z) is 1
        let mut sorted = v2.clone();
        sorted.sort_by(f64::total_cmp);
        let med = sorted[sorted.len() / 2];
        assert!((med - 1.0).abs() < 0.05, "median {med}");
    }

    #[test]
    fn draws_reproduce_exactly_per_stream() {
        let a = draw(ScenarioKind::Skew, 3.0, 500, 42);
        let b = draw(ScenarioKind::Skew, 3.0, 500, 42);
        assert_eq!(a, b);
        let c = draw(ScenarioKind::Skew, 3.0, 500, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn null_pair_shares_the_reference_distribution() {
        let mut stream = RngStream::new(3, 0);
        let (y1, y2) = sample_null_pair(ScenarioKind::LognormalMean, 4000, 4000, &mut stream).unwrap();
        assert!(y1.iter().chain(y2.iter()).all(|v| *v > 0.0));
        let mut stream = RngStream::new(3, 1);
        let (z1, z2) = sample_null_pair(ScenarioKind::MeanShift, 50_000, 50_000, &mut stream).unwrap();
        assert!(mean(&z1).abs() < 0.02 && mean(&z2).abs() < 0.02);
        assert!((variance(&z2) - 1.0).abs() < 0.03);
    }

    #[test]
    fn zero_sizes_are_rejected() {
        let spec = ScenarioSpec::new(ScenarioKind::MeanShift, 1.0).unwrap();
        let mut stream = RngStream::new(1, 0);
        assert!(sample_pair(&spec, 0, 5, &mut stream).is_err());
        assert!(sample_null_pair(ScenarioKind::Tails, 5, 0, &mut stream).is_err());
    }
}
