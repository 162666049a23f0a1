//! Top eigenpair of the weighted second moment `M(s) = Σ s_i Z_i Z_iᵀ`.
//!
//! `M(s)` is never formed. Every product `M(s) v` is one pass over the
//! points (`O(nd)`), and the top eigenpair comes from a seeded Lanczos
//! iteration with full reorthogonalization, restarted from the current Ritz
//! vector until the residual `‖Mv − λv‖` drops below `tol · λ`. For
//! `d ≤ 40` a single Krylov cycle spans the whole space, so one solve costs
//! `d + 1` products.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm};
use crate::rng;
use crate::weights::VectorSet;

/// Default relative tolerance for standalone eigenvalue queries.
pub const ORACLE_TOL: f64 = 1e-6;
/// Relative tolerance used inside the packing solver.
pub const SOLVER_TOL: f64 = 1e-3;

const MAX_KRYLOV: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCertificate {
    /// Rayleigh quotient of `v`, a lower bound on the true `λ_max`.
    pub lambda: f64,
    /// Unit vector.
    pub v: Vec<f64>,
    /// `‖M v − λ v‖`.
    pub residual: f64,
    /// Matrix-vector products spent.
    pub matvecs: usize,
}

/// `Σ_i s_i ⟨Z_i, v⟩ Z_i` without materializing the `d × d` matrix.
pub fn weighted_moment_apply<W: AsRef<[f64]> + ?Sized>(
    zs: &VectorSet,
    s: &W,
    v: &[f64],
) -> Result<Vec<f64>> {
    let s = s.as_ref();
    check_dims(zs, s)?;
    if v.len() != zs.dim() {
        return Err(Error::Dimension {
            expected: zs.dim(),
            found: v.len(),
        });
    }
    let mut out = vec![0.0; zs.dim()];
    apply_into(zs, s, v, &mut out);
    Ok(out)
}

pub(crate) fn apply_into(zs: &VectorSet, s: &[f64], v: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (z, &w) in zs.iter().zip(s) {
        if w != 0.0 {
            let c = w * dot(z, v);
            axpy(c, z, out);
        }
    }
}

fn check_dims(zs: &VectorSet, s: &[f64]) -> Result<()> {
    if s.len() != zs.len() {
        return Err(Error::Dimension {
            expected: zs.len(),
            found: s.len(),
        });
    }
    Ok(())
}

/// Iteration budget: `10 · ⌈ln(d n) / tol⌉` products.
pub fn default_matvec_cap(n: usize, d: usize, tol: f64) -> usize {
    let ln = ((n.max(1) * d.max(1)) as f64).ln().max(1.0);
    10 * (ln / tol).ceil() as usize
}

/// Top eigenpair of `M(s)` from a seeded random start.
pub fn lambda_max<W: AsRef<[f64]> + ?Sized>(
    zs: &VectorSet,
    s: &W,
    tol: f64,
    seed: u64,
) -> Result<SpectralCertificate> {
    lambda_max_from(zs, s.as_ref(), tol, None, seed)
}

/// As [`lambda_max`], starting from `start` when given (warm start).
pub fn lambda_max_from(
    zs: &VectorSet,
    s: &[f64],
    tol: f64,
    start: Option<&[f64]>,
    seed: u64,
) -> Result<SpectralCertificate> {
    if !(tol > 0.0 && tol <= 0.1) {
        return Err(Error::invalid(format!("eigen tolerance {tol} outside (0, 0.1]")));
    }
    check_dims(zs, s)?;
    if let Some(st) = start {
        if st.len() != zs.dim() {
            return Err(Error::Dimension {
                expected: zs.dim(),
                found: st.len(),
            });
        }
    }
    let cap = default_matvec_cap(zs.len(), zs.dim(), tol);
    let mut apply = |v: &[f64], out: &mut [f64]| apply_into(zs, s, v, out);
    top_eigenpair(&mut apply, zs.dim(), tol, start, seed, cap)
}

/// Lanczos with full reorthogonalization on a symmetric PSD operator.
pub(crate) fn top_eigenpair(
    apply: &mut dyn FnMut(&[f64], &mut [f64]),
    d: usize,
    tol: f64,
    start: Option<&[f64]>,
    seed: u64,
    max_matvecs: usize,
) -> Result<SpectralCertificate> {
    let mut rng = rng::stream(seed);
    let mut random_unit = |basis: &[Vec<f64>]| -> Option<Vec<f64>> {
        let mut r: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        for _ in 0..2 {
            for q in basis {
                let c = dot(q, &r);
                axpy(-c, q, &mut r);
            }
        }
        let nr = norm(&r);
        (nr > 1e-8).then(|| r.into_iter().map(|x| x / nr).collect())
    };

    let mut q0 = match start {
        Some(st) if norm(st) > 0.0 => {
            let ns = norm(st);
            st.iter().map(|x| x / ns).collect()
        }
        _ => random_unit(&[]).expect("random start in positive dimension"),
    };

    let kmax = d.min(MAX_KRYLOV);
    let mut matvecs = 0usize;
    let mut w = vec![0.0; d];
    let mut best: Option<SpectralCertificate> = None;

    loop {
        let mut basis: Vec<Vec<f64>> = vec![q0];
        let mut alphas: Vec<f64> = Vec::with_capacity(kmax);
        let mut betas: Vec<f64> = Vec::with_capacity(kmax);
        let mut anorm = 0.0f64;
        for j in 0..kmax {
            apply(&basis[j], &mut w);
            matvecs += 1;
            let alpha = dot(&basis[j], &w);
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    axpy(-c, q, &mut w);
                }
            }
            alphas.push(alpha);
            if j + 1 == kmax {
                break;
            }
            let beta = norm(&w);
            anorm = anorm.max(alpha.abs() + beta);
            // Ritz residual of the current tridiagonal is `β |y_last|`.
            if j >= 1 && beta > 0.0 {
                let (theta, y_last) = top_ritz(&alphas, &betas);
                if beta * y_last.abs() <= 0.5 * tol * theta {
                    break;
                }
            }
            if beta <= 1e-10 * anorm || beta == 0.0 {
                // Krylov space is invariant; continue from a fresh direction.
                match random_unit(&basis) {
                    Some(r) => {
                        betas.push(0.0);
                        basis.push(r);
                    }
                    None => break,
                }
            } else {
                betas.push(beta);
                basis.push(w.iter().map(|x| x / beta).collect());
            }
        }

        let k = alphas.len();
        let eig = SymmetricEigen::new(tridiagonal(&alphas, &betas));
        let top = eig.eigenvalues.imax();
        let y = eig.eigenvectors.column(top);
        let mut v = vec![0.0; d];
        for (i, q) in basis.iter().take(k).enumerate() {
            axpy(y[i], q, &mut v);
        }
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);

        apply(&v, &mut w);
        matvecs += 1;
        let rho = dot(&v, &w).max(0.0);
        let residual = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - rho * b) * (a - rho * b))
            .sum::<f64>()
            .sqrt();
        let cert = SpectralCertificate {
            lambda: rho,
            v: v.clone(),
            residual,
            matvecs,
        };
        if residual <= tol * rho || (rho == 0.0 && residual == 0.0) {
            return Ok(cert);
        }
        if best.as_ref().is_none_or(|b| cert.lambda > b.lambda) {
            best = Some(cert);
        }
        if matvecs >= max_matvecs {
            return Err(Error::NoConvergence {
                matvecs,
                best: Box::new(best.expect("at least one cycle ran")),
            });
        }
        q0 = v;
    }
}

fn tridiagonal(alphas: &[f64], betas: &[f64]) -> DMatrix<f64> {
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    t
}

/// Top Ritz value and the last component of its eigenvector.
fn top_ritz(alphas: &[f64], betas: &[f64]) -> (f64, f64) {
    let eig = SymmetricEigen::new(tridiagonal(alphas, betas));
    let top = eig.eigenvalues.imax();
    (eig.eigenvalues[top], eig.eigenvectors[(alphas.len() - 1, top)])
}
