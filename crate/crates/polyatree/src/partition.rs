//! Recursive dyadic partitions and the observation counts that live on them.
//!
//! Every observation is mapped to a unit-interval score `u`; the partition
//! cell at depth `m` containing it is read off the first `m` binary digits
//! of `u`. Cells are closed on the left and open on the right, so a score
//! sitting exactly on a boundary belongs to the cell on the boundary's
//! right, which is what the carry rule in `digits_of` produces.
//!
//! The count tree stores, for each junction (an internal node splitting a
//! cell into halves), how many observations of each group went left and
//! right. A junction is materialized only while at least two pooled
//! observations enter it: below that point every Bayes factor contribution
//! is identically zero, so the tree is finite even though the partition is
//! conceptually infinite.

use crate::error::{Error, Result};
use crate::special::normal_cdf;
use std::collections::BTreeMap;

/// How observations are mapped to unit-interval scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenteringSpec {
    /// `u = Phi(y)`: cells are standard normal quantile intervals.
    StandardNormal,
    /// `u = (rank - 1/2) / n` against a pooled reference sample: cells are
    /// determined by ranks alone.
    Empirical,
}

/// Left/right split counts at one junction.
///
/// `level` is the depth of the split (1 = the root split of the whole
/// space); `path` holds the `level - 1` left/right turns leading to the
/// junction as the binary digits of an integer, most significant digit
/// first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JunctionCounts {
    pub level: u32,
    pub path: u64,
    pub n_left_1: u32,
    pub n_right_1: u32,
    pub n_left_2: u32,
    pub n_right_2: u32,
}

impl JunctionCounts {
    pub fn pooled_left(&self) -> u32 {
        self.n_left_1 + self.n_left_2
    }

    pub fn pooled_right(&self) -> u32 {
        self.n_right_1 + self.n_right_2
    }

    /// Observations entering the junction, both groups.
    pub fn pooled_entering(&self) -> u32 {
        self.pooled_left() + self.pooled_right()
    }

    pub fn group1_entering(&self) -> u32 {
        self.n_left_1 + self.n_right_1
    }

    pub fn group2_entering(&self) -> u32 {
        self.n_left_2 + self.n_right_2
    }
}

/// All realized junctions of a two-sample dyadic split, keyed by
/// `(level, path)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CountTree {
    pub junctions: BTreeMap<(u32, u64), JunctionCounts>,
    /// Deepest level holding a junction; 0 when the tree is empty.
    pub max_level_reached: u32,
    /// One message per cell where >= 2 observations were still together at
    /// the depth cap (duplicates, or data agreeing to many binary digits).
    pub truncation_warnings: Vec<String>,
    /// Set when pooled ranks needed the stable input-order tie break.
    pub tie_warnings: Vec<String>,
}

/// Affine parameters of a standardization, `z = (y - mean) / sd`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardization {
    pub mean: f64,
    pub sd: f64,
}

/// Centers and scales to mean 0 and standard deviation 1, population
/// convention (divisor n). Errors on empty input and on zero variance.
pub fn standardize(values: &[f64]) -> Result<(Vec<f64>, Standardization)> {
    if values.is_empty() {
        return Err(Error::EmptySample("standardize needs at least one value"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
    if var <= 0.0 || !var.is_finite() {
        return Err(Error::DegenerateData(format!(
            "pooled variance is {var}; cannot standardize"
        )));
    }
    let sd = var.sqrt();
    let out = values.iter().map(|y| (y - mean) / sd).collect();
    Ok((out, Standardization { mean, sd }))
}

/// First `depth` binary digits of `u` (clamped into [0, 1]), most
/// significant first. The doubling carry assigns boundary values to the
/// right-hand cell.
fn digits_of(mut u: f64, depth: u32) -> Vec<u8> {
    (0..depth)
        .map(|_| {
            u *= 2.0;
            if u >= 1.0 {
                u -= 1.0;
                1
            } else {
                0
            }
        })
        .collect()
}

fn unit_score(y: f64, centering: CenteringSpec, pooled: &[f64]) -> f64 {
    match centering {
        CenteringSpec::StandardNormal => normal_cdf(y),
        CenteringSpec::Empirical => {
            // earliest rank a value of y would take among the pooled sample
            let below = pooled.iter().filter(|&&x| x < y).count();
            (below as f64 + 0.5) / pooled.len() as f64
        }
    }
}

/// The depth-`depth` partition cell containing `y`, as left/right digits.
///
/// For [`CenteringSpec::Empirical`], `pooled` is the rank reference and the
/// score depends only on how many pooled values lie below `y`; for
/// [`CenteringSpec::StandardNormal`] the reference is ignored.
pub fn path_of(y: f64, centering: CenteringSpec, pooled: &[f64], depth: u32) -> Vec<u8> {
    digits_of(unit_score(y, centering, pooled), depth)
}

fn render_path(path: u64, level: u32) -> String {
    if level <= 1 {
        return "root".to_owned();
    }
    (0..level - 1)
        .rev()
        .map(|i| if path >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Builds the count tree for two groups of finite observations.
///
/// Expansion continues while a cell holds at least two pooled observations
/// and stops at `depth_cap` (recording a truncation warning if a cell was
/// still shared there). With empirical centering, rank ties are broken by
/// input order, group 1 before group 2, and flagged in `tie_warnings`.
pub fn build_count_tree(
    y1: &[f64],
    y2: &[f64],
    centering: CenteringSpec,
    depth_cap: u32,
) -> Result<CountTree> {
    if depth_cap < 1 || depth_cap > 60 {
        return Err(Error::InvalidConfig(format!(
            "depth_cap {depth_cap} outside [1, 60]"
        )));
    }
    for &y in y1.iter().chain(y2) {
        if !y.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite observation {y}")));
        }
    }

    let mut tree = CountTree::default();
    // observation -> (unit score, group tag)
    let scored: Vec<(f64, u8)> = match centering {
        CenteringSpec::StandardNormal => y1
            .iter()
            .map(|&y| (normal_cdf(y), 1u8))
            .chain(y2.iter().map(|&y| (normal_cdf(y), 2u8)))
            .collect(),
        CenteringSpec::Empirical => {
            let pooled: Vec<f64> = y1.iter().chain(y2).copied().collect();
            let n = pooled.len();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| {
                pooled[i]
                    .partial_cmp(&pooled[j])
                    .expect("finite values compare")
                    .then(i.cmp(&j))
            });
            let tied_pairs = order
                .windows(2)
                .filter(|w| pooled[w[0]] == pooled[w[1]])
                .count();
            if tied_pairs > 0 {
                tree.tie_warnings.push(format!(
                    "{tied_pairs} tied adjacent rank(s) in the pooled sample; \
                     ranks assigned by input order (group 1 first)"
                ));
            }
            let mut scored = vec![(0.0, 0u8); n];
            for (rank0, &idx) in order.iter().enumerate() {
                let u = (rank0 as f64 + 0.5) / n as f64;
                let group = if idx < y1.len() { 1 } else { 2 };
                scored[idx] = (u, group);
            }
            scored
        }
    };

    expand(scored, 1, 0, depth_cap, &mut tree);
    Ok(tree)
}

/// Recursively splits `obs` (scores rescaled to the current cell) at its
/// midpoint, recording one junction per visited cell.
fn expand(obs: Vec<(f64, u8)>, level: u32, path: u64, depth_cap: u32, tree: &mut CountTree) {
    if obs.len() < 2 {
        return;
    }
    if level > depth_cap {
        tree.truncation_warnings.push(format!(
            "{} observations still share cell {} below the depth cap {}",
            obs.len(),
            render_path(path, level),
            depth_cap
        ));
        return;
    }
    let mut counts = JunctionCounts {
        level,
        path,
        n_left_1: 0,
        n_right_1: 0,
        n_left_2: 0,
        n_right_2: 0,
    };
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (u, group) in obs {
        // exact in floating point: 2u and, on the right branch, 2u - 1
        if u >= 0.5 {
            match group {
                1 => counts.n_right_1 += 1,
                _ => counts.n_right_2 += 1,
            }
            right.push((2.0 * u - 1.0, group));
        } else {
            match group {
                1 => counts.n_left_1 += 1,
                _ => counts.n_left_2 += 1,
            }
            left.push((2.0 * u, group));
        }
    }
    tree.junctions.insert((level, path), counts);
    tree.max_level_reached = tree.max_level_reached.max(level);
    expand(left, level + 1, path << 1, depth_cap, tree);
    expand(right, level + 1, path << 1 | 1, depth_cap, tree);
}
