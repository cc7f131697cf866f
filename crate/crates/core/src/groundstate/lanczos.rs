//! Restarted Lanczos eigensolver with full reorthogonalisation and locking.
//!
//! Each cycle extends an orthonormal basis with the residuals of the unconverged
//! Ritz pairs among the lowest `k` (for `k = 1` these are exactly the Lanczos
//! vectors). When the basis is full it is compressed to the current best Ritz
//! vectors, a thick restart. The Rayleigh quotient matrix is solved densely.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::hamiltonian::SparseHamiltonian;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Solver knobs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosOptions {
    /// Target `||H v - e v||` for unit `v`.
    pub tol: f64,
    /// Maximum basis size before a restart.
    pub krylov_dim: usize,
    /// Maximum number of matrix-vector products.
    pub max_matvecs: usize,
    /// Seed for the start vector and injected directions.
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tol: 1e-9, krylov_dim: 36, max_matvecs: 20_000, seed: 0x1a2c_2057 }
    }
}

/// One converged eigenpair.
#[derive(Clone, Debug)]
pub struct EigenPair<T> {
    pub value: T,
    pub vector: Vec<T>,
    pub residual: f64,
}

/// Chunk size of the parallel reductions. Partial sums are combined in chunk
/// order, so results do not depend on the thread schedule.
const CHUNK: usize = 1 << 13;

/// `sum_{i < n} f(i)` with a schedule-independent summation order.
pub(crate) fn ordered_sum<T: Real>(n: usize, f: impl Fn(usize) -> T + Sync) -> T {
    let partial: Vec<T> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(n)).map(&f).fold(T::zero(), |a, b| a + b))
        .collect();
    partial.into_iter().fold(T::zero(), |a, b| a + b)
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    ordered_sum(a.len(), |i| a[i] * b[i])
}

fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    y.par_iter_mut().with_min_len(CHUNK).zip(x).for_each(|(yi, &xi)| *yi += alpha * xi);
}

fn scale<T: Real>(alpha: T, x: &mut [T]) {
    x.par_iter_mut().with_min_len(CHUNK).for_each(|v| *v *= alpha);
}

pub(crate) fn norm<T: Real>(a: &[T]) -> f64 {
    ordered_sum(a.len(), |i| a[i].to_f64_lossy().powi(2)).sqrt()
}

/// Normalises `v` in place; returns the original norm.
pub(crate) fn normalize<T: Real>(v: &mut [T]) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        scale(T::lit(1.0 / n), v);
    }
    n
}

/// Two passes of classical Gram-Schmidt against `basis`; returns the remaining norm.
fn orthogonalize<T: Real>(basis: &[Vec<T>], v: &mut [T]) -> f64 {
    let before = norm(v);
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            axpy(-c, b, v);
        }
    }
    let after = norm(v);
    if before > 0.0 {
        after / before
    } else {
        0.0
    }
}

fn random_vector<T: Real>(dim: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    (0..dim).map(|_| T::lit(StandardNormal.sample(rng))).collect()
}

struct Ritz<T> {
    values: Vec<T>,
    /// Column `i` holds the coefficients of Ritz vector `i` in the basis.
    coeffs: DMatrix<T>,
}

fn rayleigh_ritz<T: Real>(proj: &DMatrix<T>) -> Ritz<T> {
    let eig = SymmetricEigen::new(proj.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).expect("NaN in projected matrix"));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let coeffs = DMatrix::from_fn(proj.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ritz { values, coeffs }
}

fn combine<T: Real>(basis: &[Vec<T>], coeffs: &[T]) -> Vec<T> {
    let dim = basis[0].len();
    let mut out = vec![T::zero(); dim];
    out.par_iter_mut().with_min_len(1 << 12).enumerate().for_each(|(s, o)| {
        let mut acc = T::zero();
        for (b, &c) in basis.iter().zip(coeffs) {
            acc += c * b[s];
        }
        *o = acc;
    });
    out
}

/// Lowest `k` eigenpairs of `h`, ascending.
///
/// The search runs on a block of `k` directions (`start` plus random vectors), so
/// eigenvalues of multiplicity up to `k` are resolved.
pub fn lowest_eigenpairs<T: Real>(
    h: &SparseHamiltonian<T>,
    k: usize,
    start: Option<&[T]>,
    opts: &LanczosOptions,
) -> Result<Vec<EigenPair<T>>> {
    let dim = h.dim();
    if k == 0 || k > dim {
        return Err(Error::InvalidParameter(format!("requested {k} eigenpairs of a {dim}-dimensional operator")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let m_max = opts.krylov_dim.max(2 * k + 8).min(dim);
    let keep = (k + 4).min(m_max - k).max(k.min(m_max));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut basis: Vec<Vec<T>> = Vec::with_capacity(m_max);
    let mut hbasis: Vec<Vec<T>> = Vec::with_capacity(m_max);
    let mut pending: Vec<Vec<T>> = Vec::with_capacity(k);
    match start {
        Some(s) if s.len() != dim => return Err(Error::SizeMismatch { expected: dim, actual: s.len() }),
        Some(s) if norm(s) > 0.0 => pending.push(s.to_vec()),
        _ => {}
    }
    while pending.len() < k {
        pending.push(random_vector(dim, &mut rng));
    }
    let mut matvecs = 0usize;
    let mut best_residual = f64::INFINITY;
    let mut proj = DMatrix::<T>::zeros(0, 0);

    loop {
        for mut v in pending.drain(..) {
            if basis.len() == dim {
                break;
            }
            if orthogonalize(&basis, &mut v) < 1e-10 {
                v = random_vector(dim, &mut rng);
                orthogonalize(&basis, &mut v);
            }
            normalize(&mut v);
            let mut hv = vec![T::zero(); dim];
            h.apply(&v, &mut hv);
            matvecs += 1;
            basis.push(v);
            hbasis.push(hv);
            let m = basis.len();
            let new_col: Vec<T> = (0..m).map(|i| dot(&basis[i], &hbasis[m - 1])).collect();
            proj = proj.resize(m, m, T::zero());
            for (i, &c) in new_col.iter().enumerate() {
                proj[(i, m - 1)] = c;
                proj[(m - 1, i)] = c;
            }
        }
        let m = basis.len();
        let ritz = rayleigh_ritz(&proj);
        let coeffs = |i: usize| -> Vec<T> { ritz.coeffs.column(i).iter().copied().collect() };

        let mut residuals = Vec::new();
        let mut n_converged = 0;
        for i in 0..k.min(m) {
            let col = coeffs(i);
            let y = combine(&basis, &col);
            let mut r = combine(&hbasis, &col);
            axpy(-ritz.values[i], &y, &mut r);
            let res = norm(&r);
            if i == 0 {
                best_residual = res;
            }
            if res < opts.tol {
                n_converged += 1;
            } else {
                residuals.push(r);
            }
        }
        if n_converged >= k || m == dim {
            return Ok((0..k.min(m))
                .map(|i| {
                    let col = coeffs(i);
                    let mut v = combine(&basis, &col);
                    let mut r = combine(&hbasis, &col);
                    axpy(-ritz.values[i], &v, &mut r);
                    let nv = normalize(&mut v);
                    let residual = norm(&r) / nv.max(f64::MIN_POSITIVE);
                    EigenPair { value: ritz.values[i], vector: v, residual }
                })
                .collect());
        }
        if matvecs >= opts.max_matvecs {
            return Err(Error::NotConverged { iterations: matvecs, residual: best_residual });
        }
        pending = residuals;

        if m + pending.len() > m_max {
            // Thick restart: keep the best Ritz vectors and their images.
            let kept = keep.min(m);
            let new_basis: Vec<Vec<T>> = (0..kept).map(|i| combine(&basis, &coeffs(i))).collect();
            let new_h: Vec<Vec<T>> = (0..kept).map(|i| combine(&hbasis, &coeffs(i))).collect();
            basis = new_basis;
            hbasis = new_h;
            // Restore orthonormality lost to rounding in the recombination.
            for i in 0..basis.len() {
                let (done, rest) = basis.split_at_mut(i);
                let (hdone, hrest) = hbasis.split_at_mut(i);
                for (b, hb) in done.iter().zip(hdone.iter()) {
                    let c = dot(b, &rest[0]);
                    axpy(-c, b, &mut rest[0]);
                    axpy(-c, hb, &mut hrest[0]);
                }
                let n = norm(&rest[0]);
                scale(T::lit(1.0 / n), &mut rest[0]);
                scale(T::lit(1.0 / n), &mut hrest[0]);
            }
            proj = DMatrix::from_fn(kept, kept, |i, j| {
                (dot(&basis[i], &hbasis[j]) + dot(&basis[j], &hbasis[i])) * T::lit(0.5)
            });
        }
    }
}

/// Lowest eigenpair.
pub fn lowest_eigenpair<T: Real>(
    h: &SparseHamiltonian<T>,
    start: Option<&[T]>,
    opts: &LanczosOptions,
) -> Result<EigenPair<T>> {
    Ok(lowest_eigenpairs(h, 1, start, opts)?.remove(0))
}
