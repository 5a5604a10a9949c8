//! Two-sample hypothesis testing with Polya tree priors.
//!
//! The central question: given samples `y1` and `y2`, were they drawn from
//! the same distribution? Two Bayesian answers are provided, both built on
//! recursive dyadic partitions of the sample space:
//!
//! * [`subjective::subjective_test`] places a Polya tree prior centered on
//!   a standard normal over the standardized pooled data and reports the
//!   Bayes factor for "one common distribution" against "two distributions".
//! * [`empirical::empirical_test`] centers the partition on the pooled
//!   empirical distribution instead, which makes the answer depend only on
//!   ranks; per-junction evidence compares a central hypergeometric null
//!   against a Wallenius noncentral alternative.
//!
//! [`baselines`] supplies Kolmogorov-Smirnov and Wilcoxon rank-sum tests
//! for comparison, [`scenarios`] generates the alternative families used in
//! the simulation studies, and [`harness`] runs calibrated power curves
//! over them.

pub mod baselines;
pub mod empirical;
mod error;
pub mod harness;
pub mod partition;
pub mod quad;
pub mod rng;
pub mod scenarios;
pub mod special;
pub mod subjective;

pub use error::{Error, Result};
