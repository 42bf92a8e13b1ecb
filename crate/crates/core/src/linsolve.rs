//! CSR matrices and a Jacobi-preconditioned conjugate gradient solver.
//!
//! Every kernel is thread-parallel over rows or fixed-size chunks, and every
//! reduction sums chunk partials with a fixed pairwise tree, so results are
//! bit-identical whatever the size of the rayon pool.

use rayon::prelude::*;
use thiserror::Error;

use crate::num::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum LinSolveError {
    #[error("dimension mismatch: matrix is {rows}x{rows}, vector has {len} entries")]
    DimensionMismatch { rows: usize, len: usize },
    #[error("non-finite entry in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },
    #[error("CG did not converge in {iterations} iterations (relative residual {residual:e}, history tail {tail:?})")]
    NotConverged { iterations: usize, residual: f64, tail: Vec<f64> },
    #[error("relative tolerance must lie in (0, 1), got {0}")]
    BadTolerance(f64),
    #[error("matrix is not positive definite (p·Ap = {0:e})")]
    NotPositiveDefinite(f64),
}

/// Chunk length for reductions. Fixed so the summation tree does not depend
/// on the thread count.
const CHUNK: usize = 4096;
const ROW_GRAIN: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Square matrix from CSR arrays. Column indices must be sorted per row.
    pub fn new(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<T>) -> Self {
        assert_eq!(row_ptr.len(), n + 1);
        assert_eq!(col_idx.len(), values.len());
        assert_eq!(row_ptr[n], values.len());
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix::new(n, (0..=n).collect(), (0..n).collect(), vec![T::one(); n])
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut sorted = triplets.to_vec();
        sorted.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::new();
        let mut values: Vec<T> = Vec::new();
        let mut last = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() = *values.last().unwrap() + v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix::new(n, row_ptr, col_idx, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Exact structural and numerical symmetry.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}

pub fn spmv<T: Scalar>(a: &CsrMatrix<T>, x: &[T]) -> Result<Vec<T>, LinSolveError> {
    let mut y = vec![T::zero(); a.n];
    spmv_into(a, x, &mut y)?;
    Ok(y)
}

pub fn spmv_into<T: Scalar>(a: &CsrMatrix<T>, x: &[T], y: &mut [T]) -> Result<(), LinSolveError> {
    if x.len() != a.n {
        return Err(LinSolveError::DimensionMismatch { rows: a.n, len: x.len() });
    }
    if y.len() != a.n {
        return Err(LinSolveError::DimensionMismatch { rows: a.n, len: y.len() });
    }
    y.par_iter_mut().enumerate().with_min_len(ROW_GRAIN).for_each(|(i, yi)| {
        let mut s = T::zero();
        for k in a.row_ptr[i]..a.row_ptr[i + 1] {
            s = s + a.values[k] * x[a.col_idx[k]];
        }
        *yi = s;
    });
    Ok(())
}

fn tree_sum<T: Scalar>(mut parts: Vec<T>) -> T {
    if parts.is_empty() {
        return T::zero();
    }
    while parts.len() > 1 {
        parts = parts
            .chunks(2)
            .map(|p| if p.len() == 2 { p[0] + p[1] } else { p[0] })
            .collect();
    }
    parts[0]
}

/// Dot product with a thread-count independent summation order.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let parts: Vec<T> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).fold(T::zero(), |s, (&p, &q)| s + p * q))
        .collect();
    tree_sum(parts)
}

pub fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `y ← y + alpha x`
fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    y.par_iter_mut().zip(x.par_iter()).with_min_len(CHUNK).for_each(|(yi, &xi)| *yi = *yi + alpha * xi);
}

/// `p ← z + beta p`
fn xpby<T: Scalar>(z: &[T], beta: T, p: &mut [T]) {
    p.par_iter_mut().zip(z.par_iter()).with_min_len(CHUNK).for_each(|(pi, &zi)| *pi = zi + beta * *pi);
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Preconditioner {
    #[default]
    Jacobi,
    None,
}

/// Matrix plus right-hand side of one linear solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSystem<T> {
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
}

impl<T: Scalar> SparseSystem<T> {
    pub fn validate(&self) -> Result<(), LinSolveError> {
        if self.rhs.len() != self.matrix.n {
            return Err(LinSolveError::DimensionMismatch { rows: self.matrix.n, len: self.rhs.len() });
        }
        if let Some(index) = self.matrix.values.iter().position(|v| !v.is_finite()) {
            return Err(LinSolveError::NonFinite { what: "matrix", index });
        }
        if let Some(index) = self.rhs.iter().position(|v| !v.is_finite()) {
            return Err(LinSolveError::NonFinite { what: "right-hand side", index });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CgSolution<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// Final `‖b - Ax‖ / ‖b‖`.
    pub residual: T,
    /// Relative residual after each iteration (index 0 is the initial guess).
    pub history: Vec<T>,
}

/// Preconditioned conjugate gradients for an SPD system.
pub fn solve_cg<T: Scalar>(
    system: &SparseSystem<T>,
    x0: &[T],
    rel_tol: T,
    max_iter: usize,
    preconditioner: Preconditioner,
) -> Result<CgSolution<T>, LinSolveError> {
    cg(system, x0, rel_tol, max_iter, preconditioner, |_| ())
}

/// CG core; `observe` sees every iterate.
pub(crate) fn cg<T: Scalar>(
    system: &SparseSystem<T>,
    x0: &[T],
    rel_tol: T,
    max_iter: usize,
    preconditioner: Preconditioner,
    mut observe: impl FnMut(&[T]),
) -> Result<CgSolution<T>, LinSolveError> {
    system.validate()?;
    if !(rel_tol > T::zero() && rel_tol < T::one()) {
        return Err(LinSolveError::BadTolerance(rel_tol.to_f64_lossy()));
    }
    let a = &system.matrix;
    let b = &system.rhs;
    let n = a.n;
    if x0.len() != n {
        return Err(LinSolveError::DimensionMismatch { rows: n, len: x0.len() });
    }
    if let Some(index) = x0.iter().position(|v| !v.is_finite()) {
        return Err(LinSolveError::NonFinite { what: "initial guess", index });
    }
    let b_norm = norm2(b);
    if b_norm == T::zero() {
        return Ok(CgSolution { x: vec![T::zero(); n], iterations: 0, residual: T::zero(), history: vec![T::zero()] });
    }
    let inv_diag: Vec<T> = match preconditioner {
        Preconditioner::Jacobi => a
            .diagonal()
            .into_iter()
            .map(|d| if d > T::zero() { T::one() / d } else { T::one() })
            .collect(),
        Preconditioner::None => vec![T::one(); n],
    };
    let apply_prec = |r: &[T], z: &mut [T]| {
        z.par_iter_mut()
            .zip(r.par_iter().zip(inv_diag.par_iter()))
            .with_min_len(CHUNK)
            .for_each(|(zi, (&ri, &di))| *zi = ri * di);
    };
    let true_residual = |x: &[T], r: &mut [T]| -> Result<(), LinSolveError> {
        spmv_into(a, x, r)?;
        r.par_iter_mut().zip(b.par_iter()).with_min_len(CHUNK).for_each(|(ri, &bi)| *ri = bi - *ri);
        Ok(())
    };

    let mut x = x0.to_vec();
    let mut r = vec![T::zero(); n];
    true_residual(&x, &mut r)?;
    let mut z = vec![T::zero(); n];
    apply_prec(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![T::zero(); n];
    let mut rz = dot(&r, &z);
    let mut rel = norm2(&r) / b_norm;
    let mut history = vec![rel];
    let mut it = 0;
    while rel > rel_tol {
        if it >= max_iter {
            let tail = history.iter().rev().take(5).map(|v| v.to_f64_lossy()).collect();
            return Err(LinSolveError::NotConverged { iterations: it, residual: rel.to_f64_lossy(), tail });
        }
        it += 1;
        spmv_into(a, &p, &mut ap)?;
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(LinSolveError::NotPositiveDefinite(pap.to_f64_lossy()));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        observe(&x);
        rel = norm2(&r) / b_norm;
        if rel <= rel_tol {
            // Confirm against the true residual before stopping.
            true_residual(&x, &mut r)?;
            rel = norm2(&r) / b_norm;
            if rel > rel_tol {
                apply_prec(&r, &mut z);
                p.copy_from_slice(&z);
                rz = dot(&r, &z);
                history.push(rel);
                continue;
            }
        }
        history.push(rel);
        apply_prec(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        xpby(&z, beta, &mut p);
    }
    Ok(CgSolution { x, iterations: it, residual: rel, history })
}
