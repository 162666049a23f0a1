//! Heavy-tailed robust regression: gradient descent from the origin where
//! every gradient comes from the robust estimator in [`crate::gradest`].
//!
//! The iteration count follows the contraction rate `1 − 1/(2κ)` of the
//! descent recursion, and each step repeats the randomized solve
//! `max(3, ⌈log₂ T⌉ + 3)` times, keeping the best certificate.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::gradest::{estimate_gradient_boosted, solver_delta};
use crate::linalg::{dist, least_squares, median, norm};
use crate::packsdp::{self, boost_count, PackOptions};
use crate::rng::derive_seed;
use crate::spectral::SOLVER_TOL;
use crate::weights::VectorSet;

/// Largest η the analysis is stated for; above it the driver warns.
pub const ETA_NOMINAL_MAX: f64 = 1.0 / 30.0;
const MAX_T: usize = 200;
const MAD_SCALE: f64 = 1.4826;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HtConfig {
    pub eta: f64,
    /// Noise level; MAD of the responses when absent.
    pub sigma_hint: Option<f64>,
    pub kappa_hint: f64,
    /// Upper bound on `‖w*‖`; trimmed OLS norm when absent.
    pub w_norm_hint: Option<f64>,
    pub step: f64,
    pub t_override: Option<usize>,
    /// Solver tolerance.
    pub tol: f64,
    /// Restarts per iteration; `max(3, ⌈log₂ T⌉ + 3)` when absent.
    pub restarts: Option<usize>,
    /// Warn when `κ²η` exceeds this.
    pub kappa_eta_warn: f64,
    /// Divide covariates by a robust estimate of `√‖Σ‖` before fitting.
    pub auto_rescale: bool,
    pub seed: u64,
}

impl HtConfig {
    pub fn new(eta: f64) -> Self {
        HtConfig {
            eta,
            sigma_hint: None,
            kappa_hint: 1.0,
            w_norm_hint: None,
            step: 1.0,
            t_override: None,
            tol: SOLVER_TOL,
            restarts: None,
            kappa_eta_warn: 0.05,
            auto_rescale: false,
            seed: 0,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma_hint = Some(sigma);
        self
    }

    pub fn with_w_norm(mut self, w_norm: f64) -> Self {
        self.w_norm_hint = Some(w_norm);
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa_hint = kappa;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_iterations(mut self, t: usize) -> Self {
        self.t_override = Some(t);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0 / 3.0) {
            return Err(Error::invalid(format!("eta {} outside (0, 1/3)", self.eta)));
        }
        if !(self.kappa_hint >= 1.0 && self.kappa_hint.is_finite()) {
            return Err(Error::invalid("kappa hint must be at least 1"));
        }
        if !(self.step > 0.0 && self.step < 2.0) {
            return Err(Error::invalid("step must lie in (0, 2)"));
        }
        if let Some(s) = self.sigma_hint {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::invalid("sigma hint must be finite and nonnegative"));
            }
        }
        if let Some(w) = self.w_norm_hint {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::invalid("w norm hint must be finite and nonnegative"));
            }
        }
        if !(self.tol > 0.0 && self.tol <= 0.1) {
            return Err(Error::invalid("solver tolerance must lie in (0, 0.1]"));
        }
        if self.t_override == Some(0) {
            return Err(Error::invalid("iteration count must be positive"));
        }
        Ok(())
    }
}

/// `⌈2κ ln(max(‖w*‖, 1) / (√η σ κ))⌉` clamped to `[1, 200]`.
pub fn iteration_count(eta: f64, sigma: f64, kappa: f64, w_norm: f64) -> usize {
    let arg = w_norm.max(1.0) / (eta.sqrt() * sigma * kappa);
    let t = 2.0 * kappa * arg.ln();
    if t.is_nan() || t >= MAX_T as f64 {
        return MAX_T;
    }
    (t.ceil() as usize).clamp(1, MAX_T)
}

/// Hints actually used by a fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hints {
    pub sigma: f64,
    pub kappa: f64,
    pub w_norm: f64,
}

/// Known population quantities in simulation mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationMonitor {
    pub w_star: Vec<f64>,
    /// Diagonal of `Σ` in the coordinates of the data.
    pub sigma_diag: Vec<f64>,
}

impl SimulationMonitor {
    /// `Σ(w − w*)`.
    pub fn population_gradient(&self, w: &[f64]) -> Vec<f64> {
        w.iter()
            .zip(&self.w_star)
            .zip(&self.sigma_diag)
            .map(|((a, b), s)| s * (a - b))
            .collect()
    }

    /// `‖I − γΣ‖` for diagonal `Σ`.
    pub fn contraction(&self, step: f64) -> f64 {
        self.sigma_diag
            .iter()
            .map(|s| (1.0 - step * s).abs())
            .fold(0.0, f64::max)
    }

    /// Checks `‖w_{t+1} − w*‖ ≤ ‖I − γΣ‖ ‖w_t − w*‖ + γ e_t + 1e-8` at every
    /// step of `trace`; returns the first violating step.
    pub fn check_descent(&self, trace: &[IterRecord], step: f64) -> std::result::Result<(), usize> {
        let c = self.contraction(step);
        for pair in trace.windows(2) {
            let Some(e) = pair[0].grad_error else { continue };
            let lhs = dist(&pair[1].w, &self.w_star);
            let rhs = c * dist(&pair[0].w, &self.w_star) + step * e + 1e-8;
            if lhs > rhs {
                return Err(pair[0].iter);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub w: Vec<f64>,
    /// `‖g_t‖`; absent on the final record.
    pub grad_norm: Option<f64>,
    /// Achieved `λ_max` of the weighted gradient moment.
    pub lambda: Option<f64>,
    pub ms: f64,
    /// `‖g_t − Σ(w_t − w*)‖`, simulation mode only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grad_error: Option<f64>,
}

/// Fields added by the two-stage sub-Gaussian fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgExtension {
    pub w_dagger: Vec<f64>,
    pub correction_norm: f64,
    pub n1: usize,
    pub survivors: usize,
    pub stage1_error: Option<f64>,
    pub correction_achieved: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub algo: String,
    pub w_hat: Vec<f64>,
    #[serde(rename = "T_used")]
    pub t_used: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<IterRecord>,
    pub error_vs_truth: Option<f64>,
    pub seconds: f64,
    pub hints: Option<Hints>,
    pub hints_defaulted: Vec<String>,
    pub restarts: usize,
    /// Covariate divisor applied by auto-rescaling.
    pub rescale: Option<f64>,
    pub warnings: Vec<String>,
    #[serde(flatten)]
    pub sg: Option<SgExtension>,
}

impl FitReport {
    fn fill_error(&mut self, data: &Dataset) {
        self.error_vs_truth = data.truth.as_ref().map(|t| dist(&self.w_hat, &t.w_star));
    }
}

/// Robust scale of the responses: `1.4826 · MAD(Y)`.
pub fn mad_sigma(data: &Dataset) -> f64 {
    let med = median(data.ys()).unwrap_or(0.0);
    let dev: Vec<f64> = data.ys().iter().map(|y| (y - med).abs()).collect();
    MAD_SCALE * median(&dev).unwrap_or(0.0)
}

/// Norm of OLS on the half of the samples with the smallest covariate norm.
pub fn trimmed_ols_norm(data: &Dataset) -> f64 {
    let n = data.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| norm(data.x(a)).total_cmp(&norm(data.x(b))).then(a.cmp(&b)));
    let keep = (n.div_ceil(2)).max(data.dim().min(n));
    let mut kept = idx[..keep].to_vec();
    kept.sort_unstable();
    let sub = match data.subset(&kept) {
        Ok(s) => s,
        Err(_) => return 1.0,
    };
    least_squares(sub.xs(), sub.dim(), sub.ys())
        .map(|w| norm(&w))
        .filter(|v| v.is_finite())
        .unwrap_or(1.0)
}

/// Robust estimate of `‖Σ‖`: optimal value of (MT) on the covariates.
pub fn robust_sigma_norm(data: &Dataset, eta: f64, seed: u64) -> Result<f64> {
    let xs = VectorSet::new(data.dim(), data.xs().to_vec())?;
    Ok(packsdp::solve_mt(&xs, solver_delta(eta), seed)?.achieved)
}

/// Ordinary least squares baseline.
pub fn fit_ols(data: &Dataset) -> Result<FitReport> {
    let start = Instant::now();
    let w_hat = least_squares(data.xs(), data.dim(), data.ys())
        .ok_or_else(|| Error::invalid("least squares system is singular"))?;
    let mut report = FitReport {
        algo: "ols".into(),
        w_hat,
        t_used: 0,
        trace: Vec::new(),
        error_vs_truth: None,
        seconds: start.elapsed().as_secs_f64(),
        hints: None,
        hints_defaulted: Vec::new(),
        restarts: 0,
        rescale: None,
        warnings: Vec::new(),
        sg: None,
    };
    report.fill_error(data);
    Ok(report)
}

pub fn fit_ht(data: &Dataset, cfg: &HtConfig) -> Result<FitReport> {
    fit_ht_monitored(data, cfg, None)
}

/// [`fit_ht`] that also logs the gradient error against known population
/// quantities.
pub fn fit_ht_monitored(
    data: &Dataset,
    cfg: &HtConfig,
    monitor: Option<&SimulationMonitor>,
) -> Result<FitReport> {
    cfg.validate()?;
    let start = Instant::now();
    let d = data.dim();
    if let Some(m) = monitor {
        if m.w_star.len() != d || m.sigma_diag.len() != d {
            return Err(Error::Dimension {
                expected: d,
                found: m.w_star.len(),
            });
        }
    }
    let mut warnings = Vec::new();
    if cfg.eta > ETA_NOMINAL_MAX {
        warnings.push(format!(
            "eta {} exceeds the nominal range (0, 1/30]; solver level {}",
            cfg.eta,
            solver_delta(cfg.eta)
        ));
    }
    let ke = cfg.kappa_hint * cfg.kappa_hint * cfg.eta;
    if ke > cfg.kappa_eta_warn {
        warnings.push(format!(
            "kappa^2 * eta = {ke:.4} exceeds {}; descent may not contract",
            cfg.kappa_eta_warn
        ));
    }

    let mut hints_defaulted = Vec::new();
    let (work, rescale) = if cfg.auto_rescale {
        let s = robust_sigma_norm(data, cfg.eta, derive_seed(cfg.seed, u64::MAX))?;
        if s > 0.0 {
            let c = s.sqrt();
            let xs: Vec<f64> = data.xs().iter().map(|v| v / c).collect();
            (Dataset::from_parts(d, xs, data.ys().to_vec())?, Some(c))
        } else {
            (data.clone(), None)
        }
    } else {
        (data.clone(), None)
    };
    let c = rescale.unwrap_or(1.0);
    let sigma = cfg.sigma_hint.unwrap_or_else(|| {
        hints_defaulted.push("sigma".to_string());
        mad_sigma(&work)
    });
    let w_norm = match cfg.w_norm_hint {
        Some(v) => v * c,
        None => {
            hints_defaulted.push("w_norm".to_string());
            trimmed_ols_norm(&work)
        }
    };
    let hints = Hints {
        sigma,
        kappa: cfg.kappa_hint,
        w_norm,
    };
    let t_used = cfg
        .t_override
        .unwrap_or_else(|| iteration_count(cfg.eta, sigma, cfg.kappa_hint, w_norm));
    let restarts = cfg.restarts.unwrap_or_else(|| boost_count(t_used)).max(1);
    let opts = PackOptions {
        tol: cfg.tol,
        ..PackOptions::default()
    };

    let mut w = vec![0.0; d];
    let mut trace = Vec::with_capacity(t_used + 1);
    for t in 0..t_used {
        let tick = Instant::now();
        let est = estimate_gradient_boosted(&work, &w, cfg.eta, restarts, &opts, derive_seed(cfg.seed, t as u64))?;
        let grad_error = monitor.map(|m| {
            let w_orig: Vec<f64> = w.iter().map(|v| v / c).collect();
            let target: Vec<f64> = m.population_gradient(&w_orig).iter().map(|v| v * c).collect();
            dist(&est.g_hat, &target) / c
        });
        let mut rec = IterRecord {
            iter: t,
            w: w.iter().map(|v| v / c).collect(),
            grad_norm: Some(norm(&est.g_hat)),
            lambda: Some(est.diag.as_ref().map_or(0.0, |s| s.achieved)),
            ms: 0.0,
            grad_error,
        };
        for (wj, gj) in w.iter_mut().zip(&est.g_hat) {
            *wj -= cfg.step * gj;
        }
        rec.ms = tick.elapsed().as_secs_f64() * 1e3;
        trace.push(rec);
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { iteration: t, trace });
        }
    }
    let w_hat: Vec<f64> = w.iter().map(|v| v / c).collect();
    trace.push(IterRecord {
        iter: t_used,
        w: w_hat.clone(),
        grad_norm: None,
        lambda: None,
        ms: 0.0,
        grad_error: None,
    });
    for w in &warnings {
        log::warn!("{w}");
    }
    let mut report = FitReport {
        algo: "ht".into(),
        w_hat,
        t_used,
        trace,
        error_vs_truth: None,
        seconds: start.elapsed().as_secs_f64(),
        hints: Some(hints),
        hints_defaulted,
        restarts,
        rescale,
        warnings,
        sg: None,
    };
    report.fill_error(data);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Sample;
    use crate::linalg::dot;

    fn basis_design(w_star: &[f64], reps: usize) -> Dataset {
        let d = w_star.len();
        let mut rows = Vec::new();
        for _ in 0..reps {
            for j in 0..d {
                for sgn in [1.0, -1.0] {
                    let mut x = vec![0.0; d];
                    x[j] = sgn * (d as f64).sqrt();
                    rows.push(Sample::new(x.clone(), dot(&x, w_star)));
                }
            }
        }
        Dataset::new(rows, d).unwrap()
    }

    #[test]
    fn iteration_count_formula() {
        assert_eq!(iteration_count(0.04, 1.0, 1.0, 1.0), 4);
        assert_eq!(iteration_count(0.04, 0.0, 1.0, 1.0), MAX_T);
        assert_eq!(iteration_count(0.04, 100.0, 1.0, 1.0), 1);
    }

    #[test]
    fn noiseless_isotropic_design_converges_exactly() {
        // Σ = I on ±√d e_j: the first gradient is exactly -w*.
        let w_star = [1.0, -2.0];
        let data = basis_design(&w_star, 5);
        let cfg = HtConfig::new(0.02).with_sigma(0.1).with_w_norm(3.0).with_seed(4);
        let rep = fit_ht(&data, &cfg).unwrap();
        assert!(dist(&rep.w_hat, &w_star) < 1e-9, "{:?}", rep.w_hat);
        assert_eq!(rep.trace.len(), rep.t_used + 1);
    }

    #[test]
    fn descent_inequality_on_trace() {
        let w_star = [0.5, 1.0, -1.5];
        let data = basis_design(&w_star, 8);
        let monitor = SimulationMonitor {
            w_star: w_star.to_vec(),
            sigma_diag: vec![1.0; 3],
        };
        let cfg = HtConfig::new(0.02).with_sigma(1.0).with_w_norm(2.0).with_iterations(5);
        let rep = fit_ht_monitored(&data, &cfg, Some(&monitor)).unwrap();
        assert!(monitor.check_descent(&rep.trace, cfg.step).is_ok());
        let errs: Vec<f64> = rep.trace.iter().map(|r| dist(&r.w, &w_star)).collect();
        assert!(errs.windows(2).all(|p| p[1] <= p[0] + 1e-12), "{errs:?}");
    }

    #[test]
    fn deterministic_reports() {
        let data = basis_design(&[1.0, 1.0], 6);
        let cfg = HtConfig::new(0.02).with_sigma(1.0).with_seed(11);
        let a = fit_ht(&data, &cfg).unwrap();
        let b = fit_ht(&data, &cfg).unwrap();
        assert_eq!(a.w_hat, b.w_hat);
        assert_eq!(a.t_used, b.t_used);
        assert_eq!(a.hints_defaulted, vec!["w_norm".to_string()]);
    }

    #[test]
    fn rejects_bad_config() {
        let data = basis_design(&[1.0], 2);
        assert!(fit_ht(&data, &HtConfig::new(0.0)).is_err());
        assert!(fit_ht(&data, &HtConfig::new(0.02).with_kappa(0.5)).is_err());
    }

    #[test]
    fn auto_rescale_undoes_covariate_scaling() {
        let w_star = [1.0, -2.0];
        let base = basis_design(&w_star, 5);
        let xs: Vec<f64> = base.xs().iter().map(|v| v * 3.0).collect();
        let ys: Vec<f64> = base.ys().iter().map(|v| v * 3.0).collect();
        let data = Dataset::from_parts(2, xs, ys).unwrap();
        let mut cfg = HtConfig::new(0.02).with_sigma(0.1).with_w_norm(3.0);
        cfg.auto_rescale = true;
        let rep = fit_ht(&data, &cfg).unwrap();
        assert!((rep.rescale.unwrap() - 3.0).abs() < 0.2);
        assert!(dist(&rep.w_hat, &w_star) < 1e-6, "{:?}", rep.w_hat);
    }

    #[test]
    fn ols_on_exact_data() {
        let data = basis_design(&[2.0, -1.0], 1);
        let rep = fit_ols(&data).unwrap();
        assert!(dist(&rep.w_hat, &[2.0, -1.0]) < 1e-12);
    }

    #[test]
    fn mad_of_symmetric_responses() {
        let rows = [-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|&y| Sample::new(vec![1.0], y)).collect();
        let ds = Dataset::new(rows, 1).unwrap();
        assert!((mad_sigma(&ds) - MAD_SCALE).abs() < 1e-12);
    }
}
