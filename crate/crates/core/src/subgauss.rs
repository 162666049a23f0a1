//! Two-stage estimator for sub-Gaussian data: a heavy-tailed fit on a small
//! truncated split, then one robust correction from the residuals of the
//! remaining samples.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{dist, dot, norm};
use crate::packsdp::{self, boost_count, PackOptions};
use crate::preprocess::{self, TruncationConfig, DEFAULT_C1};
use crate::regress::{fit_ht_monitored, FitReport, HtConfig, SgExtension, SimulationMonitor};
use crate::rng::derive_seed;
use crate::weights::{SimplexWeights, VectorSet};

/// Constant in `n₁ = ⌈C d ln(d + 1) / η⌉`.
pub const N1_CONSTANT: f64 = 20.0;
/// Fraction of stage-1 samples that must survive truncation.
pub const SURVIVOR_FRACTION: f64 = 0.95;
/// Largest η the analysis is stated for; above it the driver warns.
pub const ETA_NOMINAL_MAX: f64 = 1.0 / 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgConfig {
    pub eta: f64,
    pub sigma_hint: Option<f64>,
    /// Initial-estimate constant; recorded, not used by the algorithm.
    pub nu: f64,
    pub n1_cap: Option<usize>,
    pub c1: f64,
    /// Stage-1 configuration; its `eta`, `sigma_hint` and `seed` are
    /// overwritten from this config.
    pub ht: HtConfig,
    pub seed: u64,
    /// Population quantities for logging the stage-1 gradient error.
    #[serde(skip)]
    pub monitor: Option<SimulationMonitor>,
}

impl SgConfig {
    pub fn new(eta: f64) -> Self {
        SgConfig {
            eta,
            sigma_hint: None,
            nu: 1.0,
            n1_cap: None,
            c1: DEFAULT_C1,
            ht: HtConfig::new(eta),
            seed: 0,
            monitor: None,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma_hint = Some(sigma);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        // 3η is the correction solver level, which must stay at most 1/3.
        if !(self.eta > 0.0 && self.eta <= 1.0 / 9.0) {
            return Err(Error::invalid(format!("eta {} outside (0, 1/9]", self.eta)));
        }
        if !(self.nu > 0.0) {
            return Err(Error::invalid("nu must be positive"));
        }
        if self.n1_cap == Some(0) {
            return Err(Error::invalid("n1 cap must be positive"));
        }
        Ok(())
    }
}

/// `min(⌈n/2⌉, ⌈20 d ln(d+1) / η⌉)`.
pub fn stage1_size(n: usize, d: usize, eta: f64) -> usize {
    let formula = (N1_CONSTANT * d as f64 * ((d + 1) as f64).ln() / eta).ceil() as usize;
    n.div_ceil(2).min(formula)
}

/// Result of the correction step on its own.
#[derive(Debug, Clone)]
pub struct Correction {
    pub delta_w: Vec<f64>,
    pub weights: SimplexWeights,
    pub achieved: f64,
}

/// `Σ s_i Y'_i X_i` with `Y' = Y − ⟨X, w†⟩` and `s` from (MT) at level `3η`.
pub fn correction(part2: &Dataset, w_dagger: &[f64], eta: f64, seed: u64) -> Result<Correction> {
    let d = part2.dim();
    let mut flat = Vec::with_capacity(part2.len() * d);
    for (x, y) in part2.rows() {
        let r = y - dot(x, w_dagger);
        flat.extend(x.iter().map(|v| r * v));
    }
    let g = VectorSet::new(d, flat)?;
    let sol = packsdp::solve_mt_boosted_with(&g, 3.0 * eta, &PackOptions::default(), boost_count(1), seed)?;
    Ok(Correction {
        delta_w: g.weighted_mean(sol.weights.as_slice()),
        achieved: sol.achieved,
        weights: sol.weights,
    })
}

pub fn fit_sg(data: &Dataset, cfg: &SgConfig) -> Result<FitReport> {
    cfg.validate()?;
    let start = Instant::now();
    let n = data.len();
    if n < 4 {
        return Err(Error::invalid("the two-stage fit needs at least 4 samples"));
    }
    let d = data.dim();
    let mut n1 = stage1_size(n, d, cfg.eta);
    if let Some(c) = cfg.n1_cap {
        n1 = n1.min(c);
    }
    let (idx1, idx2) = preprocess::split_indices(n, n1, derive_seed(cfg.seed, 1))?;
    let part1 = data.subset(&idx1)?;
    let part2 = data.subset(&idx2)?;
    let tcfg = TruncationConfig::new(cfg.c1, d)?;
    let required = (SURVIVOR_FRACTION * n1 as f64).ceil() as usize;
    let (kept, removed) = match preprocess::truncate(&part1, &tcfg) {
        Ok(v) => v,
        Err(Error::DegenerateTruncation) => {
            return Err(Error::Stage1Shortfall {
                n1,
                survivors: 0,
                required,
            })
        }
        Err(e) => return Err(e),
    };
    let survivors = n1 - removed.len();
    if survivors < required {
        return Err(Error::Stage1Shortfall {
            n1,
            survivors,
            required,
        });
    }

    let mut ht = cfg.ht.clone();
    ht.eta = cfg.eta;
    ht.sigma_hint = cfg.sigma_hint.or(ht.sigma_hint);
    ht.seed = derive_seed(cfg.seed, 2);
    let stage1 = fit_ht_monitored(&kept, &ht, cfg.monitor.as_ref())?;
    let w_dagger = stage1.w_hat.clone();

    let corr = correction(&part2, &w_dagger, cfg.eta, derive_seed(cfg.seed, 3))?;
    let w_hat: Vec<f64> = w_dagger.iter().zip(&corr.delta_w).map(|(a, b)| a + b).collect();

    let mut warnings = stage1.warnings.clone();
    if cfg.eta > ETA_NOMINAL_MAX {
        warnings.push(format!("eta {} exceeds the nominal range (0, 1/20]", cfg.eta));
    }
    let truth = data.truth.as_ref();
    Ok(FitReport {
        algo: "sg".into(),
        error_vs_truth: truth.map(|t| dist(&w_hat, &t.w_star)),
        sg: Some(SgExtension {
            correction_norm: norm(&corr.delta_w),
            stage1_error: truth.map(|t| dist(&w_dagger, &t.w_star)),
            w_dagger,
            n1,
            survivors,
            correction_achieved: corr.achieved,
        }),
        w_hat,
        t_used: stage1.t_used,
        trace: stage1.trace,
        seconds: start.elapsed().as_secs_f64(),
        hints: stage1.hints,
        hints_defaulted: stage1.hints_defaulted,
        restarts: stage1.restarts,
        rescale: stage1.rescale,
        warnings,
    })
}
