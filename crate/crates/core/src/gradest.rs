//! Robust estimation of the population gradient `Σ(w − w*)` from per-sample
//! gradients, by reweighting them with a near-optimal solution of (MT).

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::packsdp::{self, MtSolution, PackOptions};
use crate::weights::{SimplexWeights, VectorSet};

/// Per-sample gradients `G_i(w) = (⟨X_i, w⟩ − Y_i) X_i` at `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub g: VectorSet,
    pub w: Vec<f64>,
}

pub fn gradients(data: &Dataset, w: &[f64]) -> Result<GradientSet> {
    let d = data.dim();
    if w.len() != d {
        return Err(Error::Dimension {
            expected: d,
            found: w.len(),
        });
    }
    let mut flat = vec![0.0; data.len() * d];
    flat.par_chunks_mut(d)
        .zip(data.xs().par_chunks(d))
        .zip(data.ys().par_iter())
        .for_each(|((g, x), &y)| {
            let r = dot(x, w) - y;
            for (gj, xj) in g.iter_mut().zip(x) {
                *gj = r * xj;
            }
        });
    Ok(GradientSet {
        g: VectorSet::new(d, flat)?,
        w: w.to_vec(),
    })
}

/// Solver level for a corruption fraction: `δ = 3.5η`, so weights lie in
/// `Δ_{7η}`. Less trimming leaves too little room to damp the dominant
/// direction on tiny samples; more biases every step. Capped at `1/6`:
/// beyond that the shrunken gradients stall the descent within its
/// iteration budget.
pub fn solver_delta(eta: f64) -> f64 {
    (3.5 * eta).min(1.0 / 6.0)
}

#[derive(Debug, Clone)]
pub struct GradientEstimate {
    pub g_hat: Vec<f64>,
    /// `None` when every gradient was zero and the solver was skipped.
    pub diag: Option<MtSolution>,
}

impl GradientEstimate {
    pub fn weights(&self) -> Option<&SimplexWeights> {
        self.diag.as_ref().map(|d| &d.weights)
    }
}

/// One solve with `restarts` boosting repetitions (at least one).
pub fn estimate_gradient_boosted(
    data: &Dataset,
    w: &[f64],
    eta: f64,
    restarts: usize,
    opts: &PackOptions,
    seed: u64,
) -> Result<GradientEstimate> {
    if !(eta > 0.0 && eta <= 1.0 / 3.0) {
        return Err(Error::invalid(format!("eta {eta} outside (0, 1/3]")));
    }
    let gs = gradients(data, w)?;
    if gs.g.is_all_zero() {
        return Ok(GradientEstimate {
            g_hat: vec![0.0; data.dim()],
            diag: None,
        });
    }
    let sol = packsdp::solve_mt_boosted_with(&gs.g, solver_delta(eta), opts, restarts, seed)?;
    Ok(GradientEstimate {
        g_hat: gs.g.weighted_mean(sol.weights.as_slice()),
        diag: Some(sol),
    })
}

pub fn estimate_gradient(data: &Dataset, w: &[f64], eta: f64, seed: u64) -> Result<GradientEstimate> {
    estimate_gradient_boosted(data, w, eta, 1, &PackOptions::default(), seed)
}
