//! Floating-point spectral diagnostics.
//!
//! Singular values and column distances come from a dense SVD and are capped
//! at `n <= 2048`. Norms of the plain and centered operators use matrix-free
//! power iteration on `AᵀA`, where the centered operator
//! `(M - p·11ᵀ)v = Mv - p(Σv)·1` is never materialized.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::matrix::SparseBinaryMatrix;

/// Largest dimension accepted by the dense routines.
pub const DENSE_MAX_N: usize = 2048;

/// Seed of the power-iteration start vector and of normal-vector probes.
pub const START_VECTOR_SEED: u64 = 0x5eed0f5ca1e;

/// Iteration cap for power iteration.
pub const POWER_ITERATION_CAP: usize = 20_000;

/// A spectral quantity together with its convergence status.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub s_min: f64,
    pub s_max: f64,
    /// `‖M - p·11ᵀ‖`.
    pub centered_norm: f64,
    pub rel_tol: f64,
    /// Power iterations spent on the centered norm.
    pub iterations: usize,
    pub converged: bool,
}

fn check_tol(rel_tol: f64) -> Result<()> {
    if !(1e-12..=1e-2).contains(&rel_tol) {
        return Err(invalid(format!("rel_tol must lie in [1e-12, 1e-2], got {rel_tol}")));
    }
    Ok(())
}

fn check_dense(n: usize) -> Result<()> {
    if n > DENSE_MAX_N {
        return Err(invalid(format!("dense routines accept n <= {DENSE_MAX_N}, got {n}")));
    }
    Ok(())
}

pub fn to_dmatrix(m: &SparseBinaryMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(m.n(), m.n());
    for &(i, j) in m.ones() {
        d[(i, j)] = 1.0;
    }
    d
}

/// All singular values, descending.
fn singular_values(d: DMatrix<f64>) -> (Vec<f64>, bool) {
    let n = d.ncols();
    match SVD::try_new(d.clone(), false, false, f64::EPSILON, 100 * n.max(10)) {
        Some(svd) => {
            let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
            s.sort_by(|a, b| b.total_cmp(a));
            (s, true)
        }
        None => {
            let eig = SymmetricEigen::new(d.transpose() * &d);
            let mut s: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
            s.sort_by(|a, b| b.total_cmp(a));
            (s, false)
        }
    }
}

/// Smallest singular value `σ_n(M)`.
///
/// If the SVD fails to converge the value falls back to the eigenvalues of
/// `MᵀM` and is flagged unconverged.
pub fn smallest_singular_value(m: &SparseBinaryMatrix, rel_tol: f64) -> Result<Estimate> {
    check_tol(rel_tol)?;
    check_dense(m.n())?;
    let (s, converged) = singular_values(to_dmatrix(m));
    Ok(Estimate {
        value: *s.last().unwrap(),
        iterations: 0,
        converged,
    })
}

/// Largest and smallest singular value from one dense decomposition.
pub fn extreme_singular_values(m: &SparseBinaryMatrix) -> Result<(f64, f64, bool)> {
    check_dense(m.n())?;
    let (s, converged) = singular_values(to_dmatrix(m));
    Ok((s[0], *s.last().unwrap(), converged))
}

fn start_vector(n: usize) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(START_VECTOR_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = norm2(&v);
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Power iteration on `AᵀA` where `apply` computes `A x` and `apply_t`
/// computes `Aᵀ x`. Stops when `‖AᵀAv - λv‖ <= rel_tol·λ`.
fn power_iteration(
    n: usize,
    rel_tol: f64,
    apply: impl Fn(&[f64], &mut [f64]),
    apply_t: impl Fn(&[f64], &mut [f64]),
) -> Estimate {
    let mut v = start_vector(n);
    let mut av = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut lambda = 0.0;
    for it in 1..=POWER_ITERATION_CAP {
        apply(&v, &mut av);
        apply_t(&av, &mut w);
        lambda = w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        let wnorm = norm2(&w);
        if wnorm == 0.0 {
            return Estimate {
                value: 0.0,
                iterations: it,
                converged: true,
            };
        }
        let residual = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= rel_tol * lambda {
            return Estimate {
                value: lambda.max(0.0).sqrt(),
                iterations: it,
                converged: true,
            };
        }
        v.iter_mut().zip(&w).for_each(|(x, y)| *x = y / wnorm);
    }
    Estimate {
        value: lambda.max(0.0).sqrt(),
        iterations: POWER_ITERATION_CAP,
        converged: false,
    }
}

/// `‖M‖` by power iteration.
pub fn spectral_norm(m: &SparseBinaryMatrix, rel_tol: f64) -> Result<Estimate> {
    check_tol(rel_tol)?;
    Ok(power_iteration(
        m.n(),
        rel_tol,
        |x, y| m.mul_vec(x, y),
        |x, y| m.mul_transpose_vec(x, y),
    ))
}

/// `‖M - p·11ᵀ‖` by matrix-free power iteration.
pub fn centered_norm(m: &SparseBinaryMatrix, p: f64, rel_tol: f64) -> Result<Estimate> {
    check_tol(rel_tol)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("p must lie in [0, 1], got {p}")));
    }
    let shift = |x: &[f64], y: &mut [f64]| {
        let s = p * x.iter().sum::<f64>();
        y.iter_mut().for_each(|v| *v -= s);
    };
    Ok(power_iteration(
        m.n(),
        rel_tol,
        |x, y| {
            m.mul_vec(x, y);
            shift(x, y);
        },
        |x, y| {
            m.mul_transpose_vec(x, y);
            shift(x, y);
        },
    ))
}

pub fn spectral_report(m: &SparseBinaryMatrix, p: f64, rel_tol: f64) -> Result<SpectralReport> {
    check_tol(rel_tol)?;
    let (s_max, s_min, svd_ok) = extreme_singular_values(m)?;
    let c = centered_norm(m, p, rel_tol)?;
    Ok(SpectralReport {
        s_min,
        s_max,
        centered_norm: c.value,
        rel_tol,
        iterations: c.iterations,
        converged: svd_ok && c.converged,
    })
}

/// Orthonormal basis of the span of the columns of `m` other than `col`.
fn complement_basis(d: &DMatrix<f64>, col: usize) -> DMatrix<f64> {
    let n = d.nrows();
    if n == 1 {
        return DMatrix::zeros(1, 0);
    }
    let b = d.clone().remove_column(col);
    let svd = SVD::new(b, true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = n as f64 * f64::EPSILON * smax;
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| smax > 0.0 && svd.singular_values[k] > tol)
        .collect();
    DMatrix::from_fn(n, keep.len(), |i, k| u[(i, keep[k])])
}

fn residual_norm(basis: &DMatrix<f64>, x: &DVector<f64>) -> (DVector<f64>, f64) {
    let r = x - basis * (basis.transpose() * x);
    let norm = r.norm();
    (r, norm)
}

/// Distance from column `col` to the span of the remaining columns.
pub fn dist_to_complement_span(m: &SparseBinaryMatrix, col: usize) -> Result<f64> {
    if col >= m.n() {
        return Err(invalid(format!("column {col} out of range for n = {}", m.n())));
    }
    check_dense(m.n())?;
    let d = to_dmatrix(m);
    let basis = complement_basis(&d, col);
    Ok(residual_norm(&basis, &d.column(col).into_owned()).1)
}

/// Unit vector orthogonal to every column except `col`.
///
/// Returns `None` when those columns span less than `n - 1` dimensions, in
/// which case the normal direction is not unique.
pub fn normal_vector(m: &SparseBinaryMatrix, col: usize) -> Result<Option<Vec<f64>>> {
    let n = m.n();
    if col >= n {
        return Err(invalid(format!("column {col} out of range for n = {n}")));
    }
    check_dense(n)?;
    let basis = complement_basis(&to_dmatrix(m), col);
    if basis.ncols() < n - 1 {
        return Ok(None);
    }
    let probe = DVector::from_vec(start_vector(n));
    let (mut r, mut norm) = residual_norm(&basis, &probe);
    // A second projection removes the rounding left by the first.
    if norm > 0.0 {
        r /= norm;
        (r, norm) = residual_norm(&basis, &r);
    }
    if norm < 1e-8 {
        return Ok(None);
    }
    Ok(Some((r / norm).iter().copied().collect()))
}
