//! η-corruption of a clean dataset.
//!
//! The adversary replaces exactly `⌊ηn⌋` samples. Oblivious adversaries pick
//! the indices uniformly at random; inspecting ones look at the clean noise
//! and pick the samples whose removal hurts most along the attack direction.
//! Positions of all other samples are untouched, bit for bit.

use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, GroundTruth};
use crate::datagen::random_unit;
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AdversaryKind {
    Idle,
    /// Keeps `X`, sets the residual to `magnitude·σ·sign⟨X, u⟩` so every
    /// planted gradient leans along `u`.
    MeanShift,
    /// Plants `X ≈ magnitude·u` with responses consistent with `w* + σu`.
    LeveragePoint,
    /// Keeps `X`, replaces `Y` by `-magnitude·Y`.
    ResponseFlip,
    /// Keeps `X`, shifts `Y` by the high atom `magnitude·σ/√η` of the
    /// heavy-tailed lower-bound construction.
    LowerBoundSwap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdversarySpec {
    pub kind: AdversaryKind,
    pub eta: f64,
    pub magnitude: f64,
    /// Selects indices by looking at the clean samples instead of at random.
    pub inspecting: bool,
}

impl AdversarySpec {
    pub fn new(kind: AdversaryKind, eta: f64, magnitude: f64) -> Self {
        AdversarySpec {
            kind,
            eta,
            magnitude,
            inspecting: false,
        }
    }

    pub fn idle() -> Self {
        Self::new(AdversaryKind::Idle, 0.0, 1.0)
    }

    pub fn inspecting(mut self) -> Self {
        self.inspecting = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0 / 3.0 + 1e-12).contains(&self.eta) {
            return Err(Error::invalid(format!("eta {} outside [0, 1/3]", self.eta)));
        }
        if !(self.magnitude > 0.0 && self.magnitude.is_finite()) {
            return Err(Error::invalid("adversary magnitude must be positive"));
        }
        Ok(())
    }
}

/// `⌊ηn⌋`, robust to representation error in `η`.
pub fn corruption_count(eta: f64, n: usize) -> usize {
    (eta * n as f64 + 1e-9).floor() as usize
}

/// Applies the adversary. Requires ground truth on `data`.
pub fn corrupt(data: &Dataset, adv: &AdversarySpec, seed: u64) -> Result<Dataset> {
    adv.validate()?;
    let truth = data
        .truth
        .as_ref()
        .ok_or_else(|| Error::precondition("corruption needs ground-truth metadata"))?;
    if adv.kind == AdversaryKind::Idle {
        return Ok(data.clone());
    }
    let n = data.len();
    let d = data.dim();
    let m = corruption_count(adv.eta, n);
    if m == 0 {
        log::warn!(
            "eta * n = {} rounds to zero corrupted samples; dataset left unchanged",
            adv.eta * n as f64
        );
        return Ok(data.clone());
    }

    let mut rng = rng::substream(seed, u64::MAX);
    let u = random_unit(d, &mut rng);
    let w_star = &truth.w_star;
    let sigma = if truth.sigma > 0.0 { truth.sigma } else { 1.0 };

    let mut chosen: Vec<usize> = if adv.inspecting {
        // Largest ε_i⟨X_i, u⟩ first: dropping them biases the clean part
        // against u, which the planted points then push further.
        let mut score: Vec<(f64, usize)> = data
            .rows()
            .enumerate()
            .map(|(i, (x, y))| (-(y - dot(x, w_star)) * dot(x, &u), i))
            .collect();
        score.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        score.into_iter().take(m).map(|(_, i)| i).collect()
    } else {
        index::sample(&mut rng, n, m).into_vec()
    };
    chosen.sort_unstable();

    let mut out = data.clone();
    let mut x_new = vec![0.0; d];
    for &i in &chosen {
        let mut r = rng::substream(seed, i as u64);
        let x = data.x(i);
        let y = data.y(i);
        let y_new = match adv.kind {
            AdversaryKind::Idle => unreachable!(),
            AdversaryKind::MeanShift => {
                x_new.copy_from_slice(x);
                let side = if dot(x, &u) >= 0.0 { 1.0 } else { -1.0 };
                dot(x, w_star) - side * adv.magnitude * sigma
            }
            AdversaryKind::LeveragePoint => {
                for (j, xj) in x_new.iter_mut().enumerate() {
                    let g: f64 = StandardNormal.sample(&mut r);
                    *xj = adv.magnitude * (u[j] + 0.05 * g / (d as f64).sqrt());
                }
                let w_bad: Vec<f64> = w_star.iter().zip(&u).map(|(w, uj)| w + sigma * uj).collect();
                dot(&x_new, &w_bad)
            }
            AdversaryKind::ResponseFlip => {
                x_new.copy_from_slice(x);
                -adv.magnitude * y
            }
            AdversaryKind::LowerBoundSwap => {
                x_new.copy_from_slice(x);
                dot(x, w_star) + adv.magnitude * sigma / adv.eta.sqrt()
            }
        };
        out.set_sample(i, &x_new, y_new);
    }
    out.truth = Some(GroundTruth {
        eta: adv.eta,
        corrupted_indices: chosen,
        ..truth.clone()
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate, GenerativeSpec};
    use crate::linalg::{dist, least_squares};

    fn clean(n: usize, d: usize, seed: u64) -> Dataset {
        let w: Vec<f64> = (0..d).map(|j| 1.0 - 0.3 * j as f64).collect();
        generate(&GenerativeSpec::gaussian_identity(w, 1.0), n, seed).unwrap()
    }

    #[test]
    fn replaces_floor_eta_n() {
        let ds = clean(200, 3, 1);
        for kind in [
            AdversaryKind::MeanShift,
            AdversaryKind::LeveragePoint,
            AdversaryKind::ResponseFlip,
            AdversaryKind::LowerBoundSwap,
        ] {
            let out = corrupt(&ds, &AdversarySpec::new(kind, 0.05, 3.0), 5).unwrap();
            let bad = &out.truth.as_ref().unwrap().corrupted_indices;
            assert_eq!(bad.len(), 10);
            for i in 0..ds.len() {
                if !bad.contains(&i) {
                    assert_eq!(out.sample(i), ds.sample(i));
                }
            }
        }
    }

    #[test]
    fn idle_is_identity() {
        let ds = clean(50, 2, 2);
        let out = corrupt(&ds, &AdversarySpec::idle(), 9).unwrap();
        assert_eq!(out, ds);
        assert!(out.truth.unwrap().corrupted_indices.is_empty());
    }

    #[test]
    fn tiny_budget_leaves_data_alone() {
        let ds = clean(10, 2, 3);
        let out = corrupt(&ds, &AdversarySpec::new(AdversaryKind::MeanShift, 0.05, 1.0), 1).unwrap();
        assert_eq!(out, ds);
    }

    #[test]
    fn requires_truth() {
        let mut ds = clean(10, 2, 3);
        ds.truth = None;
        assert!(corrupt(&ds, &AdversarySpec::new(AdversaryKind::MeanShift, 0.2, 1.0), 1).is_err());
    }

    #[test]
    fn deterministic_and_inspecting_differs() {
        let ds = clean(300, 4, 4);
        let adv = AdversarySpec::new(AdversaryKind::MeanShift, 0.1, 2.0);
        assert_eq!(corrupt(&ds, &adv, 3).unwrap(), corrupt(&ds, &adv, 3).unwrap());
        let a = corrupt(&ds, &adv, 3).unwrap().truth.unwrap().corrupted_indices;
        let b = corrupt(&ds, &adv.inspecting(), 3).unwrap().truth.unwrap().corrupted_indices;
        assert_ne!(a, b);
    }

    #[test]
    fn leverage_points_wreck_ols() {
        let d = 5;
        let ds = clean(2000, d, 6);
        let w = ds.truth.as_ref().unwrap().w_star.clone();
        let ols_clean = least_squares(ds.xs(), d, ds.ys()).unwrap();
        let bad = corrupt(&ds, &AdversarySpec::new(AdversaryKind::LeveragePoint, 0.1, 100.0), 6).unwrap();
        let ols_bad = least_squares(bad.xs(), d, bad.ys()).unwrap();
        assert!(dist(&ols_bad, &w) >= 5.0 * dist(&ols_clean, &w));
    }
}
