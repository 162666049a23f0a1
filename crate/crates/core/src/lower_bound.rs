//! Pairs of regression distributions that are close in total variation but
//! have well separated parameters. No estimator can tell the two apart
//! after an η-corruption, so the parameter gap is a floor on the error.
//!
//! Covariates are deterministic, so each distribution is a discrete noise
//! law plus a fixed design; TV between the joint laws equals TV between
//! the response laws and is computed exactly over the merged atoms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist, dot};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionDescription {
    /// Noise law of `ε`.
    pub atoms: Vec<Atom>,
    pub w_star: Vec<f64>,
    pub sigma: f64,
    pub eta: f64,
    /// The fixed covariate vector.
    pub covariate: Vec<f64>,
}

impl DistributionDescription {
    pub fn noise_mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.prob * a.value).sum()
    }

    pub fn noise_variance(&self) -> f64 {
        let m = self.noise_mean();
        self.atoms.iter().map(|a| a.prob * (a.value - m).powi(2)).sum()
    }

    /// Law of `Y = ⟨X, w*⟩ + ε`.
    pub fn response_law(&self) -> Vec<Atom> {
        let shift = dot(&self.covariate, &self.w_star);
        self.atoms
            .iter()
            .map(|a| Atom {
                value: shift + a.value,
                prob: a.prob,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LowerBoundCase {
    Ht,
    Sg,
    Cond,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundPair {
    pub case: LowerBoundCase,
    pub d1: DistributionDescription,
    pub d2: DistributionDescription,
    /// Exact total variation between the two response laws.
    pub tv: f64,
    /// `‖w*₁ − w*₂‖`.
    pub gap: f64,
    /// Diagonal of `E[XXᵀ]` per coordinate (see the module docs).
    pub second_moments: Vec<f64>,
}

/// Total variation between two finite laws; atoms closer than a relative
/// `1e-12` are treated as one point.
pub fn tv_between(a: &[Atom], b: &[Atom]) -> f64 {
    let mut pts: Vec<(f64, f64)> = a
        .iter()
        .map(|t| (t.value, t.prob))
        .chain(b.iter().map(|t| (t.value, -t.prob)))
        .collect();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut total = 0.0;
    let mut i = 0;
    while i < pts.len() {
        let v = pts[i].0;
        let mut net = 0.0;
        while i < pts.len() && (pts[i].0 - v).abs() <= 1e-12 * (1.0 + v.abs()) {
            net += pts[i].1;
            i += 1;
        }
        total += net.abs();
    }
    0.5 * total
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid("sigma must be positive"));
    }
    Ok(())
}

/// `(high value, low value)` of the two-point noise; the high value has
/// probability `η/2` and the pair has mean zero.
fn two_point(high: f64, eta: f64) -> (Vec<Atom>, f64) {
    let p = eta / 2.0;
    let low = -p * high / (1.0 - p);
    (
        vec![
            Atom { value: high, prob: p },
            Atom {
                value: low,
                prob: 1.0 - p,
            },
        ],
        -low,
    )
}

fn pair(
    case: LowerBoundCase,
    covariate: Vec<f64>,
    w2: Vec<f64>,
    atoms2: Vec<Atom>,
    sigma: f64,
    eta: f64,
    second_moments: Vec<f64>,
) -> LowerBoundPair {
    let d = covariate.len();
    let d1 = DistributionDescription {
        atoms: vec![Atom { value: 0.0, prob: 1.0 }],
        w_star: vec![0.0; d],
        sigma,
        eta,
        covariate: covariate.clone(),
    };
    let d2 = DistributionDescription {
        atoms: atoms2,
        w_star: w2,
        sigma,
        eta,
        covariate,
    };
    LowerBoundPair {
        case,
        tv: tv_between(&d1.response_law(), &d2.response_law()),
        gap: dist(&d1.w_star, &d2.w_star),
        d1,
        d2,
        second_moments,
    }
}

/// Heavy-tailed pair: `ε₂ = σ/√η` with probability `η/2`.
pub fn lower_bound_pair_ht(sigma: f64, eta: f64) -> Result<LowerBoundPair> {
    check_sigma(sigma)?;
    if !(eta > 0.0 && eta < 1.0 / 3.0) {
        return Err(Error::invalid(format!("eta {eta} outside (0, 1/3)")));
    }
    let (atoms, w2) = two_point(sigma / eta.sqrt(), eta);
    Ok(pair(LowerBoundCase::Ht, vec![1.0], vec![w2], atoms, sigma, eta, vec![1.0]))
}

/// Sub-Gaussian pair: `ε₂ = σ√(ln 1/η)` with probability `η/2`.
pub fn lower_bound_pair_sg(sigma: f64, eta: f64) -> Result<LowerBoundPair> {
    check_sigma(sigma)?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::invalid(format!("eta {eta} outside (0, 1)")));
    }
    let (atoms, w2) = two_point(sigma * (1.0 / eta).ln().sqrt(), eta);
    Ok(pair(LowerBoundCase::Sg, vec![1.0], vec![w2], atoms, sigma, eta, vec![1.0]))
}

/// Heavy-tailed pair embedded in the last coordinate of a design with
/// condition number `κ`: `X = (1, …, 1, 1/√κ)`, `w*₂ = (0, …, 0, w̃₂√κ)`.
pub fn lower_bound_pair_cond(sigma: f64, eta: f64, kappa: f64, d: usize) -> Result<LowerBoundPair> {
    if d < 2 {
        return Err(Error::invalid("the conditioned construction needs d >= 2"));
    }
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::invalid("kappa must be at least 1"));
    }
    let base = lower_bound_pair_ht(sigma, eta)?;
    let mut covariate = vec![1.0; d];
    covariate[d - 1] = 1.0 / kappa.sqrt();
    let mut w2 = vec![0.0; d];
    w2[d - 1] = base.d2.w_star[0] * kappa.sqrt();
    let mut moments = vec![1.0; d];
    moments[d - 1] = 1.0 / kappa;
    Ok(pair(LowerBoundCase::Cond, covariate, w2, base.d2.atoms, sigma, eta, moments))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ht_formulas() {
        let p = lower_bound_pair_ht(1.0, 0.04).unwrap();
        assert!((p.d2.atoms[0].value - 5.0).abs() < 1e-12);
        assert!((p.d2.atoms[0].prob - 0.02).abs() < 1e-15);
        assert!((p.gap - 0.2 / 1.96).abs() < 1e-12);
        assert!((p.tv - 0.02).abs() < 1e-12);
        assert!(p.d2.noise_mean().abs() < 1e-15);
    }

    #[test]
    fn sg_formulas() {
        let p = lower_bound_pair_sg(1.0, 0.05).unwrap();
        assert!((p.d2.atoms[0].value - 20f64.ln().sqrt()).abs() < 1e-12);
        assert!((p.d2.atoms[0].value - 1.73077).abs() < 1e-4);
        assert!((p.gap - 0.05 * 20f64.ln().sqrt() / 1.95).abs() < 1e-12);
        assert!((p.gap - 0.0444).abs() < 1e-3);
        assert!(lower_bound_pair_sg(1.0, 1.0).is_err());
    }

    #[test]
    fn cond_scales_gap() {
        let p = lower_bound_pair_cond(1.0, 0.04, 4.0, 3).unwrap();
        assert!((p.d2.w_star[2] - 0.4 / 1.96).abs() < 1e-12);
        assert_eq!(p.second_moments, vec![1.0, 1.0, 0.25]);
        let flat = lower_bound_pair_cond(1.0, 0.04, 1.0, 2).unwrap();
        let ht = lower_bound_pair_ht(1.0, 0.04).unwrap();
        assert_eq!(flat.d2.w_star[1], ht.d2.w_star[0]);
        assert!((flat.tv - ht.tv).abs() < 1e-15);
        assert!(lower_bound_pair_cond(1.0, 0.04, 4.0, 1).is_err());
    }

    #[test]
    fn tv_of_disjoint_and_equal_laws() {
        let a = [Atom { value: 0.0, prob: 1.0 }];
        let b = [Atom { value: 1.0, prob: 1.0 }];
        assert_eq!(tv_between(&a, &b), 1.0);
        assert_eq!(tv_between(&a, &a), 0.0);
    }
}
