//! Reference oracles for small instances: total variation between weight
//! vectors, extreme-point decomposition of capped-simplex points, and a
//! brute-force minimizer of `λ_max(Σ s_i Z_i Z_iᵀ)` over `Δ_δ`.
//!
//! Nothing here calls the production solver or the Lanczos eigensolver;
//! the brute-force path uses its own dense Jacobi eigensolver.

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::stable_sum;
use crate::rng;
use crate::weights::{cap, SimplexWeights, VectorSet};

/// `½ Σ |a_i − b_i|` for two probability vectors.
pub fn tv_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            found: b.len(),
        });
    }
    for v in [a, b] {
        if (stable_sum(v) - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("weights must sum to one"));
        }
    }
    Ok(0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// `(extreme point, coefficient)` pairs.
    pub atoms: Vec<(Vec<f64>, f64)>,
    pub delta: f64,
}

impl Decomposition {
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.atoms.first().map_or(0, |a| a.0.len());
        let mut out = vec![0.0; n];
        for (e, g) in &self.atoms {
            for (o, v) in out.iter_mut().zip(e) {
                *o += g * v;
            }
        }
        out
    }

    pub fn coefficient_sum(&self) -> f64 {
        stable_sum(self.atoms.iter().map(|a| &a.1))
    }
}

/// Writes `s ∈ Δ_δ` as a convex combination of extreme points, each with
/// `(1 − δ)n` entries at the cap. Needs `δn` integral.
pub fn decompose(s: &SimplexWeights) -> Result<Decomposition> {
    let n = s.len();
    let delta = s.delta();
    let kf = (1.0 - delta) * n as f64;
    let k = kf.round() as usize;
    if (kf - k as f64).abs() > 1e-9 || k == 0 {
        return Err(Error::precondition("delta * n must be an integer below n"));
    }
    let c = 1.0 / k as f64;
    let mut r = s.as_slice().to_vec();
    let mut mass = 1.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut atoms = Vec::new();
    for _ in 0..=2 * n {
        if mass <= 1e-14 {
            break;
        }
        order.sort_by(|&a, &b| r[b].total_cmp(&r[a]).then(a.cmp(&b)));
        let (top, rest) = order.split_at(k);
        let min_in = top.iter().map(|&i| r[i]).fold(f64::INFINITY, f64::min);
        let max_out = rest.iter().map(|&i| r[i]).fold(0.0, f64::max);
        let gamma = (k as f64 * min_in).min(mass - k as f64 * max_out).clamp(0.0, mass);
        if gamma <= 0.0 {
            break;
        }
        let mut e = vec![0.0; n];
        for &i in top {
            e[i] = c;
            r[i] = (r[i] - gamma * c).max(0.0);
        }
        mass -= gamma;
        atoms.push((e, gamma));
    }
    Ok(Decomposition { atoms, delta })
}

/// Iteration budget of [`brute_mt_with`].
#[derive(Debug, Clone, Copy)]
pub struct BruteOptions {
    pub iterations: usize,
    pub restarts: usize,
    /// Grid resolution `1/m` for the exhaustive scan (`n ≤ 5` only).
    pub grid: usize,
    pub seed: u64,
}

impl Default for BruteOptions {
    fn default() -> Self {
        BruteOptions {
            iterations: 100_000,
            restarts: 20,
            grid: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteCertificate {
    pub value: f64,
    pub weights: Vec<f64>,
    /// Best value from subgradient descent alone.
    pub subgradient: f64,
    /// Best value from the grid scan, when run.
    pub grid: Option<f64>,
}

/// Reference optimum of (MT) for `n ≤ 10`, `d ≤ 4`.
pub fn brute_mt(zs: &VectorSet, delta: f64) -> Result<f64> {
    Ok(brute_mt_with(zs, delta, &BruteOptions::default())?.value)
}

pub fn brute_mt_with(zs: &VectorSet, delta: f64, opts: &BruteOptions) -> Result<BruteCertificate> {
    let n = zs.len();
    let d = zs.dim();
    if n == 0 || n > 10 || d > 4 {
        return Err(Error::invalid("brute-force oracle needs 1 <= n <= 10 and d <= 4"));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::invalid("delta outside [0, 1)"));
    }
    let capv = cap(delta, n);
    let starts = start_points(zs, delta, opts);
    let runs: Vec<(f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|s0| subgradient_descent(zs, s0, capv, opts.iterations))
        .collect();
    let (mut value, mut weights) = runs
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one start");
    let subgradient = value;
    let grid = if n <= 5 { grid_scan(zs, capv, opts.grid) } else { None };
    if let Some((gv, gw)) = &grid {
        if *gv < value {
            value = *gv;
            weights = gw.clone();
        }
    }
    Ok(BruteCertificate {
        value,
        weights,
        subgradient,
        grid: grid.map(|g| g.0),
    })
}

fn start_points(zs: &VectorSet, delta: f64, opts: &BruteOptions) -> Vec<Vec<f64>> {
    let n = zs.len();
    let capv = cap(delta, n);
    let mut starts = vec![vec![1.0 / n as f64; n]];
    // Cap on the smallest norms: the l* minimizer.
    let norms = zs.squared_norms();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| norms[a].total_cmp(&norms[b]).then(a.cmp(&b)));
    let mut s = vec![0.0; n];
    let mut left = 1.0f64;
    for &i in &idx {
        let take = left.min(capv);
        s[i] = take;
        left -= take;
    }
    starts.push(s);
    let mut rng = rng::stream(opts.seed);
    while starts.len() < opts.restarts.max(2) {
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let total: f64 = y.iter().sum();
        starts.push(project_capped_simplex(&y.iter().map(|v| v / total).collect::<Vec<_>>(), capv));
    }
    starts
}

fn moment(zs: &VectorSet, s: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; zs.dim() * zs.dim()];
    moment_into(zs, s, &mut m);
    m
}

fn moment_into(zs: &VectorSet, s: &[f64], m: &mut [f64]) {
    let d = zs.dim();
    m.iter_mut().for_each(|x| *x = 0.0);
    for (z, &w) in zs.iter().zip(s) {
        for a in 0..d {
            let wa = w * z[a];
            for b in a..d {
                m[a * d + b] += wa * z[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            m[a * d + b] = m[b * d + a];
        }
    }
}

fn subgradient_descent(zs: &VectorSet, mut s: Vec<f64>, capv: f64, iterations: usize) -> (f64, Vec<f64>) {
    let d = zs.dim();
    let n = zs.len();
    let mut m = moment(zs, &s);
    let (mut best, mut v) = top_eigen_small(&m, d);
    let mut best_s = s.clone();
    let mut g = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut kinks = Vec::with_capacity(2 * n);
    let step0 = capv;
    for t in 0..iterations {
        for (gi, z) in g.iter_mut().zip(zs.iter()) {
            let p: f64 = z.iter().zip(&v).map(|(a, b)| a * b).sum();
            *gi = p * p;
        }
        let gmax = g.iter().copied().fold(0.0, f64::max);
        if gmax <= 0.0 {
            break;
        }
        let alpha = step0 / ((t + 1) as f64).sqrt() / gmax;
        for ((yi, si), gi) in y.iter_mut().zip(&s).zip(&g) {
            *yi = si - alpha * gi;
        }
        project_into(&y, capv, &mut kinks, &mut s);
        moment_into(zs, &s, &mut m);
        let (lam, vec) = top_eigen_small(&m, d);
        v = vec;
        if lam < best {
            best = lam;
            best_s.copy_from_slice(&s);
        }
    }
    (best, best_s)
}

/// Euclidean projection onto `{0 ≤ s ≤ cap, Σ s = 1}`. The mass as a
/// function of the shift is piecewise linear with kinks at `y_i` and
/// `y_i − cap`, so the shift is found by search over the kinks and one
/// interpolation.
pub fn project_capped_simplex(y: &[f64], capv: f64) -> Vec<f64> {
    let mut out = vec![0.0; y.len()];
    project_into(y, capv, &mut Vec::new(), &mut out);
    out
}

fn project_into(y: &[f64], capv: f64, kinks: &mut Vec<f64>, s: &mut [f64]) {
    let total = |tau: f64| -> f64 { y.iter().map(|v| (v - tau).clamp(0.0, capv)).sum() };
    kinks.clear();
    kinks.extend(y.iter().flat_map(|&v| [v, v - capv]));
    kinks.sort_by(f64::total_cmp);
    // total(kinks[lo]) ≥ 1 ≥ total(kinks[hi])
    let (mut lo, mut hi) = (0, kinks.len() - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if total(kinks[mid]) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (kinks[lo], kinks[hi]);
    let (ta, tb) = (total(a), total(b));
    let tau = if ta > tb { a + (ta - 1.0) * (b - a) / (ta - tb) } else { a };
    for (si, v) in s.iter_mut().zip(y) {
        *si = (v - tau).clamp(0.0, capv);
    }
    // Spread the rounding residual over the strictly interior coordinates.
    let resid = 1.0 - s.iter().sum::<f64>();
    let free = s.iter().filter(|&&x| x > 0.0 && x < capv).count();
    if free > 0 {
        let share = resid / free as f64;
        for x in s.iter_mut().filter(|x| **x > 0.0 && **x < capv) {
            *x = (*x + share).clamp(0.0, capv);
        }
    }
}

fn grid_scan(zs: &VectorSet, capv: f64, m: usize) -> Option<(f64, Vec<f64>)> {
    let n = zs.len();
    let d = zs.dim();
    let kmax = ((capv * m as f64) + 1e-9).floor() as usize;
    if kmax * n < m {
        return None;
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut k = vec![0usize; n];
    fn rec(
        i: usize,
        left: usize,
        k: &mut Vec<usize>,
        kmax: usize,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        let n = k.len();
        if i + 1 == n {
            if left <= kmax {
                k[i] = left;
                visit(k);
            }
            return;
        }
        let rest_cap = kmax * (n - i - 1);
        let lo = left.saturating_sub(rest_cap);
        for v in lo..=left.min(kmax) {
            k[i] = v;
            rec(i + 1, left - v, k, kmax, visit);
        }
    }
    let mut visit = |k: &[usize]| {
        let s: Vec<f64> = k.iter().map(|&v| v as f64 / m as f64).collect();
        let (lam, _) = top_eigen_small(&moment(zs, &s), d);
        if best.as_ref().is_none_or(|b| lam < b.0) {
            best = Some((lam, s));
        }
    };
    rec(0, m, &mut k, kmax, &mut visit);
    best
}

/// Top eigenpair for `d ≤ 3` in closed form (trigonometric solution of the
/// characteristic cubic), falling back to Jacobi for larger `d` and for
/// near-repeated top eigenvalues.
pub fn top_eigen_small(a: &[f64], d: usize) -> (f64, Vec<f64>) {
    match d {
        1 => (a[0], vec![1.0]),
        2 => {
            let (p, q, r) = (a[0], a[1], a[3]);
            let mid = 0.5 * (p + r);
            let rad = (0.25 * (p - r) * (p - r) + q * q).sqrt();
            let lam = mid + rad;
            let v = if p >= r { [lam - r, q] } else { [q, lam - p] };
            let nv = v[0].hypot(v[1]);
            if nv <= 1e-300 {
                return (lam, vec![1.0, 0.0]);
            }
            (lam, vec![v[0] / nv, v[1] / nv])
        }
        3 => {
            let (a11, a12, a13, a22, a23, a33) = (a[0], a[1], a[2], a[4], a[5], a[8]);
            let p1 = a12 * a12 + a13 * a13 + a23 * a23;
            let q = (a11 + a22 + a33) / 3.0;
            let p2 = (a11 - q).powi(2) + (a22 - q).powi(2) + (a33 - q).powi(2) + 2.0 * p1;
            let p = (p2 / 6.0).sqrt();
            if p <= 1e-150 {
                return (q, vec![1.0, 0.0, 0.0]);
            }
            let b = [
                (a11 - q) / p, a12 / p, a13 / p,
                a12 / p, (a22 - q) / p, a23 / p,
                a13 / p, a23 / p, (a33 - q) / p,
            ];
            let det = b[0] * (b[4] * b[8] - b[5] * b[7]) - b[1] * (b[3] * b[8] - b[5] * b[6])
                + b[2] * (b[3] * b[7] - b[4] * b[6]);
            let phi = (0.5 * det).clamp(-1.0, 1.0).acos() / 3.0;
            let lam = q + 2.0 * p * phi.cos();
            let second = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
            if lam - second <= 1e-6 * p {
                return jacobi_top(a.to_vec(), 3);
            }
            let rows = [
                [a11 - lam, a12, a13],
                [a12, a22 - lam, a23],
                [a13, a23, a33 - lam],
            ];
            let cross = |u: [f64; 3], w: [f64; 3]| [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
            let mut best = [0.0; 3];
            let mut best_n = 0.0;
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let c = cross(rows[i], rows[j]);
                let n = c.iter().map(|x| x * x).sum::<f64>();
                if n > best_n {
                    best_n = n;
                    best = c;
                }
            }
            let nv = best_n.sqrt();
            (lam, best.iter().map(|x| x / nv).collect())
        }
        _ => jacobi_top(a.to_vec(), d),
    }
}

/// Top eigenpair of a dense symmetric `d × d` matrix by cyclic Jacobi.
pub fn jacobi_top(mut a: Vec<f64>, d: usize) -> (f64, Vec<f64>) {
    let (vals, vecs) = jacobi_eigen(&mut a, d);
    let mut top = 0;
    for i in 1..d {
        if vals[i] > vals[top] {
            top = i;
        }
    }
    let v = (0..d).map(|r| vecs[r * d + top]).collect();
    (vals[top], v)
}

/// All eigenpairs by cyclic Jacobi rotations; eigenvectors are the columns
/// of the returned row-major matrix.
pub fn jacobi_eigen(a: &mut [f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|p| (0..d).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p * d + q] * a[p * d + q])
            .sum();
        let scale: f64 = (0..d).map(|i| a[i * d + i] * a[i * d + i]).sum::<f64>() + off;
        if off <= 1e-30 * scale.max(1e-300) {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..d).map(|i| a[i * d + i]).collect(), v)
}
