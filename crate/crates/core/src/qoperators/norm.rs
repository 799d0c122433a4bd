//! Largest singular value of a sparse operator.
//!
//! Runs the symmetric Lanczos recurrence on A*A from the normalized all-ones
//! vector, i.e. power iteration with Krylov acceleration. Diagonal A*A with
//! eigenvalues 1 − q^{2j} clustered at the top is the common case here, and
//! plain power iteration stalls on those clusters long before 1e−10.
//! The top Ritz value is accepted once its residual bound β_k·|s_k| drops
//! below `tol` relative to the value, or when the Krylov space becomes
//! invariant.

use num_complex::Complex64;

use super::{OperatorError, SparseOperator};

pub const NORM_TOLERANCE: f64 = 1e-10;
pub const NORM_MAX_ITER: usize = 10_000;

/// ‖A‖ with the default tolerance and iteration cap.
pub fn op_norm(a: &SparseOperator) -> Result<f64, OperatorError> {
    op_norm_with(a, NORM_TOLERANCE, NORM_MAX_ITER)
}

pub fn op_norm_with(a: &SparseOperator, tol: f64, max_iter: usize) -> Result<f64, OperatorError> {
    if a.nnz() == 0 {
        return Ok(0.0);
    }
    let n = a.dim();
    let apply_b = |x: &[Complex64]| a.apply_adjoint(&a.apply(x));

    let mut v = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let mut v_prev = vec![Complex64::new(0.0, 0.0); n];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new(); // betas[i] couples step i and i+1
    let mut beta_prev = 0.0;
    let mut scale = 0.0f64;

    for _ in 0..max_iter {
        let mut w = apply_b(&v);
        let alpha: f64 = v.iter().zip(&w).map(|(vi, wi)| (vi.conj() * wi).re).sum();
        for i in 0..n {
            w[i] -= v[i] * alpha + v_prev[i] * beta_prev;
        }
        let beta = norm2(&w);
        alphas.push(alpha);
        scale = scale.max(alpha.abs()).max(beta);

        let theta = top_eigenvalue(&alphas, &betas);
        if theta <= 0.0 && beta <= f64::EPSILON * scale.max(1.0) {
            return Ok(0.0);
        }
        // invariant subspace: theta is exact
        if beta <= 1e-14 * scale {
            return Ok(theta.max(0.0).sqrt());
        }
        let s_last = last_eigvec_component(&alphas, &betas, theta);
        if beta * s_last.abs() <= tol * theta.abs() {
            return Ok(theta.max(0.0).sqrt());
        }

        betas.push(beta);
        beta_prev = beta;
        let inv = 1.0 / beta;
        v_prev = std::mem::replace(&mut v, w.into_iter().map(|x| x * inv).collect());
    }
    Err(OperatorError::NormNotConverged {
        iterations: max_iter,
    })
}

fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Number of eigenvalues of the symmetric tridiagonal (alphas, betas) below x.
fn sturm_count(alphas: &[f64], betas: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0f64;
    for i in 0..alphas.len() {
        let b2 = if i == 0 {
            0.0
        } else {
            betas[i - 1] * betas[i - 1]
        };
        d = alphas[i] - x - if i == 0 { 0.0 } else { b2 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (alphas[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn top_eigenvalue(alphas: &[f64], betas: &[f64]) -> f64 {
    let k = alphas.len();
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = if i > 0 { betas[i - 1].abs() } else { 0.0 }
            + if i + 1 < k { betas[i].abs() } else { 0.0 };
        lo = lo.min(alphas[i] - r);
        hi = hi.max(alphas[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alphas, betas, mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Last component of the unit eigenvector of the tridiagonal for eigenvalue
/// `theta`, by two steps of inverse iteration.
fn last_eigvec_component(alphas: &[f64], betas: &[f64], theta: f64) -> f64 {
    let k = alphas.len();
    if k == 1 {
        return 1.0;
    }
    let shift = theta + 1e-13 * theta.abs().max(1e-300);
    let mut x = vec![1.0; k];
    for _ in 0..3 {
        x = solve_tridiagonal(alphas, betas, shift, &x);
        let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !nrm.is_finite() || nrm == 0.0 {
            return 1.0;
        }
        x.iter_mut().for_each(|v| *v /= nrm);
    }
    x[k - 1]
}

/// Solves (T − shift·I) x = rhs with partial pivoting (LAPACK gttrf-style).
fn solve_tridiagonal(alphas: &[f64], betas: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = alphas.len();
    let mut d: Vec<f64> = alphas.iter().map(|a| a - shift).collect();
    let mut du: Vec<f64> = betas[..n - 1].to_vec();
    let mut dl: Vec<f64> = betas[..n - 1].to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut b = rhs.to_vec();
    let tiny = f64::MIN_POSITIVE.sqrt();

    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i] = 0.0;
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            du[i] = tmp;
            b.swap(i, i + 1);
            b[i + 1] -= f * b[i];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = b[n - 1] / d[n - 1];
    if n >= 2 {
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    x
}
