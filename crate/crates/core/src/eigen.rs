//! Symmetric eigensolvers for possibly indefinite operators.
//!
//! The iterative path finds the algebraically smallest eigenpairs of `L` by
//! running a thick-restart Lanczos iteration (full reorthogonalization) on
//! `sigma I - L`, where `sigma` bounds the spectral radius of `L`. The
//! largest Ritz values of the shifted operator are the smallest of `L`, and
//! no factorization of the indefinite matrix is needed. An optional
//! deflation vector (the constant vector by default) is kept out of the
//! Krylov space, so the solve runs on its orthogonal complement.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// A symmetric linear operator available only through products.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;

    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Upper bound on `max |lambda|`, e.g. the largest absolute row sum.
    fn norm_bound(&self) -> f64;
}

impl SymmetricOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, out) in y.iter_mut().enumerate() {
            *out = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn norm_bound(&self) -> f64 {
        (0..self.nrows())
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Eigenpairs in ascending eigenvalue order.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    /// `||A v - lambda v||` for each pair.
    pub residuals: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum Deflation {
    None,
    /// Work in the complement of `span{1}`.
    #[default]
    Constant,
    /// Work in the complement of the given (not necessarily unit) vector.
    Vector(Vec<f64>),
}

impl Deflation {
    fn unit_vector(&self, n: usize) -> Option<Vec<f64>> {
        match self {
            Deflation::None => None,
            Deflation::Constant => Some(vec![1.0 / (n as f64).sqrt(); n]),
            Deflation::Vector(v) => {
                let norm = dot(v, v).sqrt();
                Some(v.iter().map(|x| x / norm).collect())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    pub k: usize,
    pub deflation: Deflation,
    /// Residual tolerance relative to the operator norm bound.
    pub tol: f64,
    /// Cap on operator applications.
    pub max_iter: usize,
    pub seed: u64,
    /// Krylov basis size before a restart; `None` picks `max(2k + 20, 40)`.
    pub krylov_dim: Option<usize>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            k: 1,
            deflation: Deflation::Constant,
            tol: 1e-8,
            max_iter: 50_000,
            seed: 0,
            krylov_dim: None,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn residual_norm<O: SymmetricOperator + ?Sized>(op: &O, lambda: f64, x: &[f64]) -> f64 {
    let mut y = vec![0.0; x.len()];
    op.apply(x, &mut y);
    y.iter()
        .zip(x)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn check_symmetric(mat: &DMatrix<f64>) -> Result<()> {
    if !mat.is_square() {
        return Err(Error::DimensionMismatch {
            expected: mat.nrows(),
            got: mat.ncols(),
        });
    }
    let scale = mat.amax().max(1.0);
    let dev = (mat - mat.transpose()).amax();
    if dev > 1e-10 * scale {
        return Err(Error::NotSymmetric(dev));
    }
    Ok(())
}

fn sorted_pairs(eig: SymmetricEigen<f64, nalgebra::Dyn>) -> (Vec<f64>, DMatrix<f64>) {
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    (values, vectors)
}

/// Full eigendecomposition of a dense symmetric matrix.
pub fn dense_symmetric_eig(mat: &DMatrix<f64>) -> Result<Spectrum> {
    check_symmetric(mat)?;
    let sym = (mat + mat.transpose()) * 0.5;
    let (values, vectors) = sorted_pairs(SymmetricEigen::new(sym));
    let eigenvectors: Vec<Vec<f64>> = vectors.column_iter().map(|c| c.iter().copied().collect()).collect();
    let residuals = values
        .iter()
        .zip(&eigenvectors)
        .map(|(&l, v)| residual_norm(mat, l, v))
        .collect();
    Ok(Spectrum {
        eigenvalues: values,
        eigenvectors,
        residuals,
    })
}

/// Orthonormal basis (as columns) of the complement of the unit vector `u`,
/// taken from the Householder reflector that maps `e_1` to `+-u`.
fn complement_basis(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let mut w = DVector::from_column_slice(u);
    let sign = if u[0] >= 0.0 { 1.0 } else { -1.0 };
    w[0] += sign;
    let norm = w.norm();
    w /= norm;
    let h = DMatrix::<f64>::identity(n, n) - (&w * w.transpose()) * 2.0;
    h.columns(1, n - 1).into_owned()
}

/// Dense eigendecomposition restricted to the complement of the deflation
/// vector (`n - 1` pairs), or of the whole space with [`Deflation::None`].
pub fn dense_deflated_eig(mat: &DMatrix<f64>, deflation: &Deflation) -> Result<Spectrum> {
    check_symmetric(mat)?;
    let n = mat.nrows();
    let Some(u) = deflation.unit_vector(n) else {
        return dense_symmetric_eig(mat);
    };
    if u.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u.len() });
    }
    let q = complement_basis(&u);
    let sym = (mat + mat.transpose()) * 0.5;
    let projected = q.transpose() * &sym * &q;
    let projected = (&projected + projected.transpose()) * 0.5;
    let (values, vectors) = sorted_pairs(SymmetricEigen::new(projected));
    let full = &q * vectors;
    let eigenvectors: Vec<Vec<f64>> = full.column_iter().map(|c| c.iter().copied().collect()).collect();
    let residuals = values
        .iter()
        .zip(&eigenvectors)
        .map(|(&l, v)| residual_norm(mat, l, v))
        .collect();
    Ok(Spectrum {
        eigenvalues: values,
        eigenvectors,
        residuals,
    })
}

/// Two passes of classical Gram-Schmidt. Returns the coefficients against
/// `basis` (the deflation vectors are projected out silently).
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>], locked: &[Vec<f64>]) -> Vec<f64> {
    let mut coeffs = vec![0.0; basis.len()];
    for _ in 0..2 {
        for u in locked {
            let c = dot(u, w);
            axpy(-c, u, w);
        }
        for (b, acc) in basis.iter().zip(coeffs.iter_mut()) {
            let c = dot(b, w);
            axpy(-c, b, w);
            *acc += c;
        }
    }
    coeffs
}

fn random_orthonormal(rng: &mut ChaCha8Rng, n: usize, basis: &[Vec<f64>], locked: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let before = dot(&v, &v).sqrt();
        orthogonalize(&mut v, basis, locked);
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-8 * before {
            v.iter_mut().for_each(|x| *x /= norm);
            return Some(v);
        }
    }
    None
}

/// The `k` algebraically smallest eigenpairs of `op` (on the complement of
/// the deflation vector, if any).
///
/// A single-vector Krylov space holds one copy of a repeated eigenvalue, so
/// after convergence the solver probes the complement of the pairs found so
/// far and swaps in anything smaller than the current `k`-th value.
pub fn smallest_eigenpairs<O: SymmetricOperator + ?Sized>(op: &O, opts: &EigenOptions) -> Result<Spectrum> {
    let n = op.dim();
    let k = opts.k;
    if k == 0 || k >= n {
        return Err(Error::TooManyEigenpairs { k, n });
    }
    let locked: Vec<Vec<f64>> = opts.deflation.unit_vector(n).into_iter().collect();
    if locked.iter().any(|u| u.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: locked[0].len(),
        });
    }
    let eff = n - locked.len();
    if k > eff {
        return Err(Error::TooManyEigenpairs { k, n: eff });
    }

    let sigma = op.norm_bound();
    let mut run = Lanczos {
        op,
        sigma,
        tol_abs: opts.tol * if sigma > 0.0 { sigma } else { 1.0 },
        max_iter: opts.max_iter,
        krylov_dim: opts.krylov_dim,
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        matvecs: 0,
    };
    let mut found = run.solve(&locked, k)?;
    let mut guard = locked.clone();
    guard.extend(found.eigenvectors.iter().cloned());
    while guard.len() < n {
        let probe = run.solve(&guard, 1)?;
        let top = found.eigenvalues[k - 1];
        if probe.eigenvalues[0] >= top - 10.0 * run.tol_abs {
            break;
        }
        let pos = found.eigenvalues.partition_point(|&l| l <= probe.eigenvalues[0]);
        found.eigenvalues.insert(pos, probe.eigenvalues[0]);
        found.eigenvectors.insert(pos, probe.eigenvectors[0].clone());
        found.residuals.insert(pos, probe.residuals[0]);
        found.eigenvalues.truncate(k);
        found.eigenvectors.truncate(k);
        found.residuals.truncate(k);
        guard.truncate(locked.len());
        guard.extend(found.eigenvectors.iter().cloned());
    }
    Ok(found)
}

struct Lanczos<'a, O: SymmetricOperator + ?Sized> {
    op: &'a O,
    sigma: f64,
    tol_abs: f64,
    max_iter: usize,
    krylov_dim: Option<usize>,
    rng: ChaCha8Rng,
    matvecs: usize,
}

impl<O: SymmetricOperator + ?Sized> Lanczos<'_, O> {
    /// Thick-restart Lanczos on `sigma I - A` restricted to the complement
    /// of `locked` (orthonormal).
    fn solve(&mut self, locked: &[Vec<f64>], k: usize) -> Result<Spectrum> {
        let op = self.op;
        let sigma = self.sigma;
        let n = op.dim();
        let eff = n - locked.len();
        let breakdown = 1e-12 * if sigma > 0.0 { sigma } else { 1.0 };
        let m_max = self.krylov_dim.unwrap_or((2 * k + 20).max(40)).max(k + 2).min(eff);

        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m_max);
        basis.push(random_orthonormal(&mut self.rng, n, &basis, locked).ok_or(Error::TooManyEigenpairs { k, n: eff })?);
        let mut h = DMatrix::<f64>::zeros(m_max, m_max);
        let mut w = vec![0.0; n];

        loop {
            // Expand the basis to m_max vectors (or until the space is exhausted).
            let mut beta;
            loop {
                let j = basis.len() - 1;
                op.apply(&basis[j], &mut w);
                self.matvecs += 1;
                for (wi, bi) in w.iter_mut().zip(&basis[j]) {
                    *wi = sigma * bi - *wi;
                }
                let coeffs = orthogonalize(&mut w, &basis, locked);
                for (i, &c) in coeffs.iter().enumerate() {
                    h[(i, j)] = c;
                    h[(j, i)] = c;
                }
                beta = dot(&w, &w).sqrt();
                if basis.len() == m_max {
                    break;
                }
                if beta > breakdown {
                    basis.push(w.iter().map(|x| x / beta).collect());
                } else {
                    beta = 0.0;
                    match random_orthonormal(&mut self.rng, n, &basis, locked) {
                        Some(v) => basis.push(v),
                        None => break,
                    }
                }
            }

            let m = basis.len();
            let projected = h.view((0, 0), (m, m)).into_owned();
            let (values, vectors) = sorted_pairs(SymmetricEigen::new(projected));
            // Largest shifted values first: these are the smallest of A.
            let wanted: Vec<usize> = (0..m).rev().collect();
            let estimates: Vec<f64> = wanted[..k]
                .iter()
                .map(|&q| (beta * vectors[(m - 1, q)]).abs())
                .collect();
            let converged = beta <= breakdown || estimates.iter().all(|&r| r <= self.tol_abs);

            if converged || self.matvecs >= self.max_iter {
                let mut eigenvalues = Vec::with_capacity(k);
                let mut eigenvectors = Vec::with_capacity(k);
                let mut residuals = Vec::with_capacity(k);
                for &q in &wanted[..k] {
                    let mut x = vec![0.0; n];
                    for (b, &c) in basis.iter().zip(vectors.column(q).iter()) {
                        axpy(c, b, &mut x);
                    }
                    let lambda = sigma - values[q];
                    residuals.push(residual_norm(op, lambda, &x));
                    eigenvalues.push(lambda);
                    eigenvectors.push(x);
                }
                if !converged {
                    let worst = estimates.iter().copied().fold(0.0, f64::max);
                    return Err(Error::NotConverged {
                        matvecs: self.matvecs,
                        worst_residual: worst,
                        residuals,
                    });
                }
                return Ok(Spectrum {
                    eigenvalues,
                    eigenvectors,
                    residuals,
                });
            }

            // Thick restart: keep the best Ritz vectors, continue from the residual.
            let keep = (k + (m - k) / 2).clamp(k, m - 1);
            let mut kept: Vec<Vec<f64>> = Vec::with_capacity(m_max);
            for &q in &wanted[..keep] {
                let mut x = vec![0.0; n];
                for (b, &c) in basis.iter().zip(vectors.column(q).iter()) {
                    axpy(c, b, &mut x);
                }
                kept.push(x);
            }
            h.fill(0.0);
            for (slot, &q) in wanted[..keep].iter().enumerate() {
                h[(slot, slot)] = values[q];
            }
            basis = kept;
            let next = if beta > breakdown {
                let mut v: Vec<f64> = w.iter().map(|x| x / beta).collect();
                orthogonalize(&mut v, &basis, locked);
                let norm = dot(&v, &v).sqrt();
                v.iter_mut().for_each(|x| *x /= norm);
                Some(v)
            } else {
                random_orthonormal(&mut self.rng, n, &basis, locked)
            };
            match next {
                Some(v) => basis.push(v),
                None => return Err(Error::TooManyEigenpairs { k, n: eff }),
            }
        }
    }
}

/// Eigengap heuristic: the `K` in `2..=k_max` maximizing
/// `lambda_K - lambda_{K-1}` (1-based), ties going to the smaller `K`.
pub fn eigengap_select(eigenvalues: &[f64], k_max: usize) -> Result<usize> {
    if eigenvalues.len() < 3 {
        return Err(Error::TooFewEigenvalues(eigenvalues.len()));
    }
    if k_max < 2 || k_max > eigenvalues.len() {
        return Err(Error::InvalidK {
            k: k_max,
            n: eigenvalues.len(),
        });
    }
    let mut best = 2;
    let mut best_gap = f64::NEG_INFINITY;
    for k in 2..=k_max {
        let gap = eigenvalues[k - 1] - eigenvalues[k - 2];
        if gap > best_gap {
            best_gap = gap;
            best = k;
        }
    }
    Ok(best)
}
