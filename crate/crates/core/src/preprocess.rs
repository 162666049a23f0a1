//! Norm truncation of covariates and the random sample split used by the
//! two-stage sub-Gaussian estimator.

use rand::seq::index;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::rng;

/// Default truncation constant: with `E‖X‖² = d`, Markov keeps at least
/// 99% of samples at `10√d`.
pub const DEFAULT_C1: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationConfig {
    pub c1: f64,
    pub d: usize,
}

impl TruncationConfig {
    pub fn new(c1: f64, d: usize) -> Result<Self> {
        if !(c1 >= 1.0 && c1.is_finite()) {
            return Err(Error::invalid("truncation constant c1 must be at least 1"));
        }
        if d == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        Ok(TruncationConfig { c1, d })
    }

    pub fn default_for(d: usize) -> Self {
        TruncationConfig { c1: DEFAULT_C1, d }
    }

    pub fn threshold(&self) -> f64 {
        self.c1 * (self.d as f64).sqrt()
    }
}

/// Drops every sample with `‖x‖ > c1·√d`; returns the survivors (original
/// order) and the removed indices.
pub fn truncate(data: &Dataset, cfg: &TruncationConfig) -> Result<(Dataset, Vec<usize>)> {
    if cfg.d != data.dim() {
        return Err(Error::Dimension {
            expected: data.dim(),
            found: cfg.d,
        });
    }
    let t = cfg.threshold();
    let (keep, removed): (Vec<usize>, Vec<usize>) =
        (0..data.len()).partition(|&i| norm(data.x(i)) <= t);
    if keep.is_empty() {
        return Err(Error::DegenerateTruncation);
    }
    if removed.is_empty() {
        return Ok((data.clone(), removed));
    }
    Ok((data.subset(&keep)?, removed))
}

/// Uniformly random partition of `0..n` into ascending index lists of sizes
/// `n1` and `n - n1`.
pub fn split_indices(n: usize, n1: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n1 == 0 || n1 >= n {
        return Err(Error::invalid(format!("split size {n1} must lie in [1, {n})")));
    }
    let mut rng = rng::stream(seed);
    let mut first = index::sample(&mut rng, n, n1).into_vec();
    first.sort_unstable();
    let mut in_first = vec![false; n];
    first.iter().for_each(|&i| in_first[i] = true);
    let second = (0..n).filter(|&i| !in_first[i]).collect();
    Ok((first, second))
}

pub fn split(data: &Dataset, n1: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    let (a, b) = split_indices(data.len(), n1, seed)?;
    Ok((data.subset(&a)?, data.subset(&b)?))
}
