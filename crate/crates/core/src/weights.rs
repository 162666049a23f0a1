//! Point sets and weight vectors over samples.
//!
//! `Δ_δ` below is the capped simplex: probability vectors with every entry
//! at most `1/((1-δ)n)`. The packing box drops the sum-to-one constraint.

use crate::error::{Error, Result};
use crate::linalg::stable_sum;

/// Absolute tolerance on the unit sum of simplex weights.
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;

/// `n` vectors of a common dimension, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSet {
    d: usize,
    data: Vec<f64>,
}

impl VectorSet {
    pub fn new(d: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("vector dimension must be positive"));
        }
        if data.len() % d != 0 {
            return Err(Error::Dimension {
                expected: d,
                found: data.len() % d,
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite entry in vector set"));
        }
        Ok(VectorSet { d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map(Vec::len).ok_or(Error::NoSamples)?;
        let mut data = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.len() != d {
                return Err(Error::Dimension {
                    expected: d,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(d, data)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn squared_norms(&self) -> Vec<f64> {
        self.iter().map(|z| z.iter().map(|v| v * v).sum()).collect()
    }

    pub fn is_all_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// `Σ s_i Z_i`.
    pub fn weighted_mean(&self, s: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for (z, &w) in self.iter().zip(s) {
            if w != 0.0 {
                crate::linalg::axpy(w, z, &mut out);
            }
        }
        out
    }
}

/// Entry cap `1/((1-δ)n)` of `Δ_δ` and the packing box.
pub fn cap(delta: f64, n: usize) -> f64 {
    1.0 / ((1.0 - delta) * n as f64)
}

/// Feasible point of the packing box: `0 ≤ s_i ≤ 1/((1-δ)n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxWeights {
    s: Vec<f64>,
    delta: f64,
}

impl BoxWeights {
    pub fn new(s: Vec<f64>, delta: f64) -> Result<Self> {
        let w = BoxWeights { s, delta };
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!("box delta {delta} outside (0, 1)")));
        }
        if !w.is_feasible() {
            return Err(Error::invalid("box weights violate the cap or are negative"));
        }
        Ok(w)
    }

    /// All entries at the cap.
    pub fn full(n: usize, delta: f64) -> Self {
        BoxWeights {
            s: vec![cap(delta, n); n],
            delta,
        }
    }

    pub(crate) fn from_raw(s: Vec<f64>, delta: f64) -> Self {
        BoxWeights { s, delta }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn cap(&self) -> f64 {
        cap(self.delta, self.s.len())
    }

    pub fn total(&self) -> f64 {
        stable_sum(&self.s)
    }

    pub fn is_feasible(&self) -> bool {
        let c = self.cap();
        self.s.iter().all(|&v| v >= 0.0 && v <= c)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.s
    }
}

impl AsRef<[f64]> for BoxWeights {
    fn as_ref(&self) -> &[f64] {
        &self.s
    }
}

/// Member of `Δ_δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights {
    s: Vec<f64>,
    delta: f64,
}

impl SimplexWeights {
    pub fn new(s: Vec<f64>, delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::invalid(format!("simplex delta {delta} outside [0, 1)")));
        }
        let w = SimplexWeights { s, delta };
        if !w.is_member() {
            return Err(Error::invalid(format!(
                "weights are not in the capped simplex with delta {delta}"
            )));
        }
        Ok(w)
    }

    pub fn uniform(n: usize, delta: f64) -> Self {
        SimplexWeights {
            s: vec![1.0 / n as f64; n],
            delta,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn cap(&self) -> f64 {
        cap(self.delta, self.s.len())
    }

    /// Exact membership test for `Δ_δ` at this instance's `δ`.
    pub fn is_member(&self) -> bool {
        is_in_capped_simplex(&self.s, self.delta)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.s
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.s
    }
}

impl AsRef<[f64]> for SimplexWeights {
    fn as_ref(&self) -> &[f64] {
        &self.s
    }
}

/// `s ∈ Δ_δ`: nonnegative, capped at `1/((1-δ)n)`, summing to one within
/// [`SIMPLEX_SUM_TOL`].
pub fn is_in_capped_simplex(s: &[f64], delta: f64) -> bool {
    if s.is_empty() || !(0.0..1.0).contains(&delta) {
        return false;
    }
    let c = cap(delta, s.len());
    s.iter().all(|&v| v >= 0.0 && v <= c) && (stable_sum(s) - 1.0).abs() <= SIMPLEX_SUM_TOL
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_arithmetic() {
        assert!((cap(0.1, 10) - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(BoxWeights::full(4, 0.2).total(), 4.0 * cap(0.2, 4));
    }

    #[test]
    fn simplex_membership_checks_cap_and_sum() {
        assert!(SimplexWeights::new(vec![0.5, 0.25, 0.25], 1.0 / 3.0).is_ok());
        // entry above the cap 1/2
        assert!(SimplexWeights::new(vec![0.6, 0.2, 0.2], 1.0 / 3.0).is_err());
        // sum off by 1e-9
        assert!(SimplexWeights::new(vec![0.5, 0.25, 0.25 + 1e-9], 1.0 / 3.0).is_err());
        assert!(SimplexWeights::new(vec![1.2, -0.2], 0.0).is_err());
    }

    #[test]
    fn box_rejects_over_cap() {
        assert!(BoxWeights::new(vec![0.6, 0.0], 0.1).is_err());
        assert!(BoxWeights::new(vec![0.5, 0.1], 0.0 + 0.5).is_ok());
    }

    #[test]
    fn vector_set_shape_checks() {
        assert!(VectorSet::new(2, vec![1.0, 2.0, 3.0]).is_err());
        let vs = VectorSet::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(vs.len(), 2);
        assert_eq!(vs.get(1), &[3.0, 4.0]);
        assert_eq!(vs.squared_norms(), vec![5.0, 25.0]);
        assert_eq!(vs.weighted_mean(&[0.5, 0.5]), vec![2.0, 3.0]);
    }
}
