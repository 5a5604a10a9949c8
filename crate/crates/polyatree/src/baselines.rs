//! Classical two-sample tests used as comparison points: Kolmogorov-Smirnov
//! and the Wilcoxon rank-sum test with a normal approximation.

use crate::error::Result;
use crate::special::normal_cdf;
use crate::subjective::validate_groups;

/// Statistic and two-sided p-value of a classical test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution, Pr(K > lambda).
///
/// Two complementary series cover the range: the Jacobi theta form
/// converges fast for small lambda, the alternating exponential form for
/// large. Both are truncated once terms drop below 1e-10.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // cdf = sqrt(2 pi) / lambda * sum exp(-(2k-1)^2 pi^2 / (8 lambda^2))
        let f = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        for k in 1..100 {
            let odd = (2 * k - 1) as f64;
            let term = (-odd * odd * f).exp();
            cdf += term;
            if term < 1e-10 {
                break;
            }
        }
        (1.0 - (std::f64::consts::TAU).sqrt() / lambda * cdf).clamp(0.0, 1.0)
    } else {
        let mut sf = 0.0;
        for k in 1..100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sf += if k % 2 == 1 { 2.0 * term } else { -2.0 * term };
            if term < 1e-10 {
                break;
            }
        }
        sf.clamp(0.0, 1.0)
    }
}

/// Largest absolute gap between the two empirical distribution functions.
///
/// Both sorted samples are swept together; at ties across samples the two
/// pointers advance past the shared value before the gap is read, which is
/// what makes the statistic exact for tied data.
fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let v = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// Pr(K > sqrt(n1 n2 / (n1 + n2)) * D).
pub fn ks_two_sample(y1: &[f64], y2: &[f64]) -> Result<ClassicalResult> {
    validate_groups(y1, y2)?;
    let d = ks_statistic(y1.to_vec(), y2.to_vec());
    let (n1, n2) = (y1.len() as f64, y2.len() as f64);
    let lambda = (n1 * n2 / (n1 + n2)).sqrt() * d;
    Ok(ClassicalResult {
        statistic: d,
        p_value: kolmogorov_sf(lambda),
    })
}

/// Pooled midranks: tied values share the average of the ranks they occupy.
/// Returns the ranks in input order (group 1 then group 2) and the tie
/// correction term sum(t^3 - t) over tie groups.
fn midranks(pooled: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && pooled[order[j]] == pooled[order[i]] {
            j += 1;
        }
        let mid = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = mid;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    (ranks, tie_term)
}

/// Wilcoxon rank-sum test: the statistic is the midrank sum of group 1, the
/// p-value comes from the tie-corrected normal approximation with a
/// continuity correction of 1/2. Returns p = 1 when every pooled value is
/// identical.
pub fn wilcoxon_rank_sum(y1: &[f64], y2: &[f64]) -> Result<ClassicalResult> {
    validate_groups(y1, y2)?;
    let pooled: Vec<f64> = y1.iter().chain(y2.iter()).copied().collect();
    let (ranks, tie_term) = midranks(&pooled);
    let w: f64 = ranks[..y1.len()].iter().sum();
    let (n1, n2) = (y1.len() as f64, y2.len() as f64);
    let n = n1 + n2;
    let mean = n1 * (n + 1.0) / 2.0;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        // every observation tied: no ordering information at all
        return Ok(ClassicalResult {
            statistic: w,
            p_value: 1.0,
        });
    }
    let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
    Ok(ClassicalResult {
        statistic: w,
        p_value: (2.0 * normal_cdf(-z)).clamp(0.0, 1.0),
    })
}
