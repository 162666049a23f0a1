//! Approximate solver for `min_{s ∈ Δ_δ} λ_max(Σ s_i Z_i Z_iᵀ)`.
//!
//! The problem is reduced to a family of packing programs parameterized by
//! a spectral level `λ`:
//!
//! ```text
//!     max Σ s_i   s.t.  0 ≤ s_i ≤ 1/((1-δ)n),   Σ s_i Z_i Z_iᵀ ⪯ λ I
//! ```
//!
//! and a bisection over `λ` started from the bracket `[l*/d, l*]`, where
//! `l*` is the capped average of the smallest squared norms. A packing
//! point with mass at least `1 - δ/10` normalizes into `Δ_{2δ}` with
//! objective at most `(1 + δ/2) λ`.
//!
//! # Packing solver
//!
//! Each packing program is solved by a spectral filter. Starting from the
//! all-cap point, every round takes the top eigenvector `v` of the current
//! moment, scores each point by `τ_i = ⟨Z_i, v⟩²` and clips the points
//! scoring above the median, `s_i ← s_i min(1, θ / τ_i)`, so their
//! contribution along `v` drops to `s_i min(τ_i, θ)`. The threshold `θ`
//! (never below the median) is chosen so one round removes `1/24` of the
//! mass the bisection can afford to lose, which drains the top scorers
//! first.
//! The path therefore reaches the mass floor in about 24 rounds whatever
//! `n` and `δ` are. Any iterate scaled by
//! `min(1, λ / λ_max)` is feasible, and the solver returns the scaled
//! iterate of largest mass.
//!
//! The filter path does not depend on `λ`, only where it stops does. The
//! bisection therefore walks one shared path instead of restarting the
//! filter at every level; the answers are identical to fresh solves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, stable_sum};
use crate::rng::derive_seed;
use crate::spectral::{self, SpectralCertificate, ORACLE_TOL, SOLVER_TOL};
use crate::weights::{cap, BoxWeights, SimplexWeights, VectorSet};

/// Rounds the filter nominally spends removing its mass budget.
const NOMINAL_ROUNDS: f64 = 24.0;

#[derive(Debug, Clone, Copy)]
pub struct PackInstance<'a> {
    pub zs: &'a VectorSet,
    pub delta: f64,
    pub lambda: f64,
}

impl<'a> PackInstance<'a> {
    pub fn new(zs: &'a VectorSet, delta: f64, lambda: f64) -> Result<Self> {
        validate_delta(delta)?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("packing level {lambda} must be positive")));
        }
        if zs.is_empty() {
            return Err(Error::NoSamples);
        }
        Ok(PackInstance { zs, delta, lambda })
    }
}

fn validate_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0 / 3.0 + 1e-12) {
        return Err(Error::invalid(format!("delta {delta} outside (0, 1/3]")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct PackOptions {
    /// Relative slack on the spectral constraint and eigen tolerance.
    pub tol: f64,
    /// Round cap, `⌈40/δ⌉` when unset.
    pub max_rounds: Option<usize>,
}

impl Default for PackOptions {
    fn default() -> Self {
        PackOptions {
            tol: SOLVER_TOL,
            max_rounds: None,
        }
    }
}

impl PackOptions {
    fn rounds(&self, delta: f64) -> usize {
        self.max_rounds.unwrap_or((40.0 / delta).ceil() as usize)
    }
}

#[derive(Debug, Clone)]
pub struct PackSolution {
    pub weights: BoxWeights,
    /// `Σ s_i`.
    pub objective: f64,
    /// Estimated `λ_max` at `weights`.
    pub lambda_max: f64,
    /// Filter rounds run.
    pub rounds: usize,
}

/// One bisection step of [`solve_mt`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectionRound {
    pub lambda_m: f64,
    pub objective: f64,
    pub lambda_max: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct MtSolution {
    /// Member of `Δ_{2δ}`.
    pub weights: SimplexWeights,
    /// `λ_max` at `weights`.
    pub achieved: f64,
    /// Final `(λ_l, λ_h)`.
    pub bracket: (f64, f64),
    pub l_star: f64,
    /// Bisection rounds run.
    pub rounds: usize,
    pub trace: Vec<BisectionRound>,
}

/// `min_{s ∈ Δ_δ} Σ s_i ‖Z_i‖²`: the cap is placed on the smallest squared
/// norms until the mass reaches one.
pub fn l_star(zs: &VectorSet, delta: f64) -> Result<f64> {
    let n = zs.len();
    if !(0.0..1.0).contains(&delta) || (1.0 - delta) * (n as f64) < 1.0 - 1e-12 {
        return Err(Error::precondition("(1 - delta) n must be at least 1"));
    }
    Ok(lstar_point(zs, delta).1)
}

/// Minimizer of `Σ s_i ‖Z_i‖²` over `Δ_δ` and its value.
fn lstar_point(zs: &VectorSet, delta: f64) -> (Vec<f64>, f64) {
    let n = zs.len();
    let c = cap(delta, n);
    let sq = zs.squared_norms();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sq[a].total_cmp(&sq[b]).then(a.cmp(&b)));
    // Full caps on the smallest norms, remainder on the next one.
    let full = (((1.0 - delta) * n as f64 + 1e-9).floor() as usize).min(n);
    let rest = (1.0 - full as f64 * c).max(0.0);
    let mut s = vec![0.0; n];
    let mut value = 0.0;
    for (k, &i) in order.iter().enumerate() {
        let take = if k < full { c } else if k == full { rest.min(c) } else { break };
        s[i] = take;
        value += take * sq[i];
    }
    (s, value)
}

/// Filter iterate: weights, their mass and top eigenpair.
#[derive(Debug, Clone)]
struct Iterate {
    s: Vec<f64>,
    mass: f64,
    cert: SpectralCertificate,
}

impl Iterate {
    /// Scale making this iterate feasible at level `lambda`.
    fn scale_for(&self, lambda: f64, tol: f64) -> f64 {
        if self.cert.lambda <= lambda * (1.0 + tol) {
            1.0
        } else {
            lambda / self.cert.lambda
        }
    }
}

struct Filter<'a> {
    zs: &'a VectorSet,
    tol: f64,
    seed: u64,
    removal_per_round: f64,
    scores: Vec<f64>,
    active: Vec<f64>,
    heavy: Vec<(f64, f64)>,
    round: u64,
}

impl<'a> Filter<'a> {
    fn new(zs: &'a VectorSet, delta: f64, tol: f64, seed: u64) -> Self {
        let n = zs.len();
        let start_mass = n as f64 * cap(delta, n);
        let budget = (start_mass - (1.0 - delta / 10.0)).max(delta / 10.0);
        Filter {
            zs,
            tol,
            seed,
            removal_per_round: budget / NOMINAL_ROUNDS,
            scores: vec![0.0; n],
            active: Vec::with_capacity(n),
            heavy: Vec::with_capacity(n / 2 + 1),
            round: 0,
        }
    }

    fn start(&mut self, delta: f64) -> Result<Iterate> {
        let n = self.zs.len();
        let s = vec![cap(delta, n); n];
        let cert = spectral::lambda_max_from(self.zs, &s, self.tol, None, self.seed)?;
        let mass = stable_sum(&s);
        Ok(Iterate { s, mass, cert })
    }

    /// One downweighting round; `None` when no point scores above the median.
    fn fill_heavy(&mut self, it: &Iterate, floor: f64) {
        self.heavy.clear();
        self.heavy.extend(
            it.s.iter()
                .zip(&self.scores)
                .filter(|(&w, &t)| t > floor && w > 0.0)
                .map(|(&w, &t)| (t, w)),
        );
    }

    fn active_median(&mut self, it: &Iterate) -> f64 {
        self.active.clear();
        self.active.extend(
            it.s.iter()
                .zip(&self.scores)
                .filter(|(&w, _)| w > 0.0)
                .map(|(_, &t)| t),
        );
        let mid = self.active.len() / 2;
        let even = self.active.len() % 2 == 0;
        let (below, upper, _) = self.active.select_nth_unstable_by(mid, f64::total_cmp);
        if even && mid > 0 {
            let lower = below.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            0.5 * (lower + *upper)
        } else {
            *upper
        }
    }

    fn step(&mut self, it: &Iterate) -> Result<Option<Iterate>> {
        let v = &it.cert.v;
        let mut n_active = 0usize;
        for (i, z) in self.zs.iter().enumerate() {
            let t = if it.s[i] > 0.0 {
                n_active += 1;
                let p = dot(z, v);
                p * p
            } else {
                0.0
            };
            self.scores[i] = t;
        }
        // Each weight above the median is clipped so its contribution
        // s_i τ_i shrinks to s_i min(τ_i, θ); θ is set so one round removes
        // the per-round budget, which drains the top scores first. The level
        // is first solved over all positive scores; when fewer than half the
        // active points lie above it, it is already above the median.
        self.fill_heavy(it, 0.0);
        if self.heavy.is_empty() {
            return Ok(None);
        }
        let target = self.removal_per_round;
        let theta = match clip_level(&mut self.heavy, target, 0.0) {
            Some((theta, above)) if above < n_active - n_active / 2 => theta,
            _ => {
                let med = self.active_median(it);
                self.fill_heavy(it, med);
                if self.heavy.is_empty() {
                    return Ok(None);
                }
                clip_level(&mut self.heavy, target, med).map_or(med, |(theta, _)| theta)
            }
        };
        let mut s = it.s.clone();
        for (w, &t) in s.iter_mut().zip(&self.scores) {
            if t > theta {
                *w *= theta / t;
            }
        }
        self.round += 1;
        let cert = spectral::lambda_max_from(
            self.zs,
            &s,
            self.tol,
            Some(v),
            derive_seed(self.seed, self.round),
        )?;
        let mass = stable_sum(&s);
        Ok(Some(Iterate { s, mass, cert }))
    }
}

/// Level θ at which clipping the `(τ, s)` pairs above it removes `target`
/// mass, with θ kept above `floor`. Returns θ and the number of pairs
/// scoring above it, or `None` when even θ = `floor` removes too little.
/// Sorted by score, the mass removed on `[τ_(k+1), τ_(k)]` is `A_k - θ B_k`
/// for prefix sums `A` of `s` and `B` of `s / τ`. Only a prefix is sorted,
/// widened until the target is reached.
fn clip_level(heavy: &mut [(f64, f64)], target: f64, floor: f64) -> Option<(f64, usize)> {
    let desc = |x: &(f64, f64), y: &(f64, f64)| y.0.total_cmp(&x.0);
    let m = heavy.len();
    let mut top = m.min(64);
    loop {
        if top < m {
            heavy.select_nth_unstable_by(top, desc);
        }
        heavy[..top].sort_unstable_by(desc);
        let (mut a, mut b) = (0.0f64, 0.0f64);
        for k in 0..top {
            let (t, w) = heavy[k];
            a += w;
            b += w / t;
            let lo = if k + 1 < m { heavy[k + 1].0 } else { floor };
            if a - lo * b >= target {
                return Some((((a - target) / b).clamp(lo, t), k + 1));
            }
        }
        if top == m {
            return None;
        }
        top = (top * 4).min(m);
    }
}

/// Approximate solution of the packing program at `inst.lambda`.
pub fn solve_pack(inst: &PackInstance<'_>, seed: u64) -> Result<PackSolution> {
    solve_pack_with(inst, &PackOptions::default(), seed)
}

pub fn solve_pack_with(
    inst: &PackInstance<'_>,
    opts: &PackOptions,
    seed: u64,
) -> Result<PackSolution> {
    let mut filter = Filter::new(inst.zs, inst.delta, opts.tol, seed);
    let mut it = filter.start(inst.delta)?;
    let score = |it: &Iterate| {
        let scale = it.scale_for(inst.lambda, opts.tol);
        (scale * it.mass, scale)
    };
    let (mut best_obj, mut best_scale) = score(&it);
    let mut best = it.clone();
    let mut rounds = 0;
    while rounds < opts.rounds(inst.delta) && it.cert.lambda > inst.lambda * (1.0 + opts.tol) {
        match filter.step(&it)? {
            None => break,
            Some(next) => it = next,
        }
        rounds += 1;
        let (obj, scale) = score(&it);
        if obj > best_obj {
            best_obj = obj;
            best_scale = scale;
            best = it.clone();
        }
    }
    let lambda_max = best.cert.lambda * best_scale;
    let s: Vec<f64> = best.s.iter().map(|w| w * best_scale).collect();
    let objective = stable_sum(&s);
    Ok(PackSolution {
        weights: BoxWeights::from_raw(s, inst.delta),
        objective,
        lambda_max,
        rounds,
    })
}

/// Normalizes a packing point of mass at least `1 - δ/10` into `Δ_{2δ}`.
pub fn pack_to_mt(s: &BoxWeights, delta: f64, lambda: f64) -> Result<SimplexWeights> {
    validate_delta(delta)?;
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda must be positive"));
    }
    let total = s.total();
    let floor = 1.0 - delta / 10.0;
    if total < floor - 1e-12 {
        return Err(Error::precondition(format!(
            "packing mass {total} below 1 - delta/10 = {floor}"
        )));
    }
    let out: Vec<f64> = s.as_ref().iter().map(|w| w / total).collect();
    SimplexWeights::new(out, 2.0 * delta)
}

/// Filter path shared by all bisection levels of one solve.
struct Path<'a> {
    filter: Filter<'a>,
    iterates: Vec<Iterate>,
    floor: f64,
    tol: f64,
    max_rounds: usize,
    done: bool,
}

impl<'a> Path<'a> {
    fn new(zs: &'a VectorSet, delta: f64, opts: &PackOptions, seed: u64) -> Result<Self> {
        let mut filter = Filter::new(zs, delta, opts.tol, seed);
        let first = filter.start(delta)?;
        Ok(Path {
            filter,
            iterates: vec![first],
            floor: 1.0 - delta / 10.0,
            tol: opts.tol,
            max_rounds: opts.rounds(delta),
            done: false,
        })
    }

    /// Best scaled iterate at level `lambda`: `(index, scale, objective)`.
    /// Iterates below the mass floor are never kept since no later
    /// iterate can pass the acceptance test once one has.
    fn query(&mut self, lambda: f64) -> Result<(usize, f64, f64)> {
        let mut best = (0usize, 0.0f64, f64::NEG_INFINITY);
        let mut k = 0;
        loop {
            if k == self.iterates.len() {
                if self.done {
                    break;
                }
                self.extend()?;
                if k == self.iterates.len() {
                    break;
                }
            }
            let it = &self.iterates[k];
            let scale = it.scale_for(lambda, self.tol);
            let obj = scale * it.mass;
            if obj > best.2 {
                best = (k, scale, obj);
            }
            if it.cert.lambda <= lambda * (1.0 + self.tol) {
                break;
            }
            k += 1;
        }
        Ok(best)
    }

    fn extend(&mut self) -> Result<()> {
        let last = self.iterates.last().expect("path starts non-empty");
        if self.iterates.len() > self.max_rounds || last.mass < self.floor {
            self.done = true;
            return Ok(());
        }
        match self.filter.step(last)? {
            Some(next) if next.mass >= self.floor => self.iterates.push(next),
            _ => self.done = true,
        }
        Ok(())
    }
}

/// Single randomized solve: weights in `Δ_{2δ}` with `λ_max` at most
/// about `(1 + δ)` times the optimum over `Δ_δ`.
pub fn solve_mt(zs: &VectorSet, delta: f64, seed: u64) -> Result<MtSolution> {
    solve_mt_with(zs, delta, &PackOptions::default(), seed)
}

pub fn solve_mt_with(
    zs: &VectorSet,
    delta: f64,
    opts: &PackOptions,
    seed: u64,
) -> Result<MtSolution> {
    validate_delta(delta)?;
    let n = zs.len();
    let d = zs.dim();
    if n == 0 {
        return Err(Error::NoSamples);
    }
    if (1.0 - 2.0 * delta) * (n as f64) < 1.0 - 1e-12 {
        return Err(Error::precondition("(1 - 2 delta) n must be at least 1"));
    }
    if zs.is_all_zero() {
        return Ok(MtSolution {
            weights: SimplexWeights::uniform(n, 2.0 * delta),
            achieved: 0.0,
            bracket: (0.0, 0.0),
            l_star: 0.0,
            rounds: 0,
            trace: Vec::new(),
        });
    }
    let (lpoint, lstar) = lstar_point(zs, delta);
    if lstar == 0.0 {
        // Enough exact zeros to fill Δ_δ.
        return Ok(MtSolution {
            weights: SimplexWeights::new(lpoint, 2.0 * delta)?,
            achieved: 0.0,
            bracket: (0.0, 0.0),
            l_star: 0.0,
            rounds: 0,
            trace: Vec::new(),
        });
    }

    let floor = 1.0 - delta / 10.0;
    let mut path = Path::new(zs, delta, opts, seed)?;
    let mut trace = Vec::new();
    let mut lo = lstar / d as f64;
    let mut hi = lstar;
    let mut best = path.query(hi)?;
    // The bracket top always packs mass >= 1 in exact arithmetic; widen
    // it if the filter falls short.
    while best.2 < floor {
        trace.push(BisectionRound {
            lambda_m: hi,
            objective: best.2,
            lambda_max: path.iterates[best.0].cert.lambda * best.1,
            accepted: false,
        });
        lo = hi;
        hi *= 1.0 + delta / 4.0;
        best = path.query(hi)?;
    }
    let rounds = (10.0 * d as f64 / delta).log2().ceil().max(1.0) as usize;
    for _ in 0..rounds {
        let mid = 0.5 * (lo + hi);
        let q = path.query(mid)?;
        let accepted = q.2 >= floor;
        trace.push(BisectionRound {
            lambda_m: mid,
            objective: q.2,
            lambda_max: path.iterates[q.0].cert.lambda * q.1,
            accepted,
        });
        if accepted {
            hi = mid;
            best = q;
        } else {
            lo = mid;
        }
    }

    let (k, scale, _) = best;
    let s: Vec<f64> = path.iterates[k].s.iter().map(|w| w * scale).collect();
    let mut weights = pack_to_mt(&BoxWeights::from_raw(s, delta), delta, hi)?;
    let mut achieved = spectral::lambda_max_from(zs, weights.as_slice(), ORACLE_TOL, None, seed)?.lambda;
    // The l* minimizer lies in Δ_δ ⊂ Δ_{2δ} and never exceeds l*.
    let fallback = spectral::lambda_max_from(zs, &lpoint, ORACLE_TOL, None, seed)?.lambda;
    if fallback < achieved {
        if let Ok(w) = SimplexWeights::new(lpoint, 2.0 * delta) {
            weights = w;
            achieved = fallback;
        }
    }
    Ok(MtSolution {
        weights,
        achieved,
        bracket: (lo, hi),
        l_star: lstar,
        rounds,
        trace,
    })
}

/// Restart count `max(3, ⌈log₂ T⌉ + 3)` for a run of `T` solves.
pub fn boost_count(solves: usize) -> usize {
    let lg = (solves.max(1) as f64).log2().ceil() as usize;
    (lg + 3).max(3)
}

/// Runs `restarts` independent solves and keeps the smallest achieved
/// value, ties going to the lowest restart index.
pub fn solve_mt_boosted(
    zs: &VectorSet,
    delta: f64,
    restarts: usize,
    seed: u64,
) -> Result<MtSolution> {
    solve_mt_boosted_with(zs, delta, &PackOptions::default(), restarts, seed)
}

pub fn solve_mt_boosted_with(
    zs: &VectorSet,
    delta: f64,
    opts: &PackOptions,
    restarts: usize,
    seed: u64,
) -> Result<MtSolution> {
    let restarts = restarts.max(1);
    let runs: Vec<MtSolution> = (0..restarts as u64)
        .into_par_iter()
        .map(|r| solve_mt_with(zs, delta, opts, derive_seed(seed, r)))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.achieved < runs[best].achieved {
            best = i;
        }
    }
    Ok(runs.into_iter().nth(best).expect("at least one restart"))
}
