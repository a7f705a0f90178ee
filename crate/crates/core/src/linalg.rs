//! Linear algebra kernels: SPD solves, smallest eigenpairs and an exact PSD test.

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Rational, Real};

/// Systems below this size are solved by dense Cholesky.
pub const DENSE_LIMIT: usize = 500;
/// Target relative residual for conjugate gradients.
pub const CG_TOLERANCE: f64 = 1e-10;

/// Sparse symmetric matrix in row-compressed form.
#[derive(Clone, Debug)]
pub struct SparseSym<T> {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> SparseSym<T> {
    /// Assemble from `(i, j, v)` entries of the upper or lower triangle; off-diagonal entries are mirrored
    /// and duplicates summed.
    pub fn from_triplets(n: usize, entries: impl IntoIterator<Item = (usize, usize, T)>) -> Self {
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for (i, j, v) in entries {
            rows[i].push((j, v));
            if i != j {
                rows[j].push((i, v));
            }
        }
        let mut row_start = Vec::with_capacity(n + 1);
        let (mut cols, mut vals) = (Vec::new(), Vec::new());
        row_start.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut v = T::zero();
                while k < row.len() && row[k].0 == j {
                    v += row[k].1;
                    k += 1;
                }
                cols.push(j);
                vals.push(v);
            }
            row_start.push(cols.len());
        }
        SparseSym { n, row_start, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        (self.row_start[i]..self.row_start[i + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.row(i).find(|&(j, _)| j == i).map_or(T::zero(), |(_, v)| v)).collect()
    }

    pub fn mul_vec(&self, x: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).fold(T::zero(), |acc, (j, v)| acc + v * x[j]);
        }
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    DenseCholesky,
    ConjugateGradient,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveInfo {
    pub method: SolveMethod,
    pub unknowns: usize,
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Solve `A x = b` for symmetric positive-definite `A`: dense Cholesky below [`DENSE_LIMIT`]
/// unknowns, Jacobi-preconditioned CG otherwise.
pub fn solve_spd<T: Real>(a: &SparseSym<T>, b: &[T]) -> Result<(Vec<T>, SolveInfo)> {
    let n = a.dim();
    if n == 0 {
        return Ok((Vec::new(), SolveInfo { method: SolveMethod::DenseCholesky, unknowns: 0, iterations: 0, relative_residual: 0.0 }));
    }
    if n < DENSE_LIMIT {
        let chol = a.to_dense().cholesky().ok_or_else(|| Error::Numeric("matrix is not positive definite".into()))?;
        let x = chol.solve(&DVector::from_column_slice(b));
        let x: Vec<T> = x.iter().copied().collect();
        let rel = relative_residual(a, &x, b);
        return Ok((x, SolveInfo { method: SolveMethod::DenseCholesky, unknowns: n, iterations: 1, relative_residual: rel }));
    }
    let cap = (50.0 * (n as f64).sqrt()).ceil() as usize;
    cg_jacobi(a, b, T::of(CG_TOLERANCE), cap)
}

fn relative_residual<T: Real>(a: &SparseSym<T>, x: &[T], b: &[T]) -> f64 {
    let mut ax = vec![T::zero(); x.len()];
    a.mul_vec(x, &mut ax);
    let r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    let nb = norm(b);
    if nb.is_zero() {
        norm(&r).to_f64_lossy()
    } else {
        (norm(&r) / nb).to_f64_lossy()
    }
}

/// Conjugate gradients with diagonal preconditioning, stopping at `‖r‖ ≤ tol·‖b‖`.
pub fn cg_jacobi<T: Real>(a: &SparseSym<T>, b: &[T], tol: T, max_iter: usize) -> Result<(Vec<T>, SolveInfo)> {
    let n = a.dim();
    let inv_diag: Vec<T> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > T::zero() { T::one() / d } else { T::one() })
        .collect();
    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let nb = norm(b);
    if nb.is_zero() {
        return Ok((x, SolveInfo { method: SolveMethod::ConjugateGradient, unknowns: n, iterations: 0, relative_residual: 0.0 }));
    }
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&ri, &di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    for it in 1..=max_iter {
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= T::zero() {
            return Err(Error::Numeric("conjugate gradients met a non-positive curvature direction".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = norm(&r) / nb;
        if rel <= tol {
            let info = SolveInfo { method: SolveMethod::ConjugateGradient, unknowns: n, iterations: it, relative_residual: rel.to_f64_lossy() };
            return Ok((x, info));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Numeric(format!(
        "conjugate gradients did not reach relative residual {} within {max_iter} iterations",
        tol.to_f64_lossy()
    )))
}

/// Smallest eigenvalue of a symmetric matrix and a unit eigenvector for it.
pub fn smallest_eigenpair<T: Real>(m: &DMatrix<T>) -> (T, DVector<T>) {
    let eig = m.clone().symmetric_eigen();
    let (k, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .expect("non-empty matrix");
    (lambda, eig.eigenvectors.column(k).into_owned())
}

/// Singular values in decreasing order.
pub fn singular_values<T: Real>(m: &DMatrix<T>) -> Vec<T> {
    let mut s: Vec<T> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Exact positive-semidefiniteness test by symmetric Gaussian elimination over the rationals.
pub fn is_psd_exact(m: &[Vec<Rational>]) -> bool {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    for k in 0..n {
        let d = a[k][k].clone();
        if d.is_negative() {
            return false;
        }
        if d.is_zero() {
            // A zero pivot forces the whole remaining row to vanish.
            if (k + 1..n).any(|j| !a[k][j].is_zero()) {
                return false;
            }
            continue;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = a[i][k].clone() / d.clone();
            for j in k..n {
                let t = f.clone() * a[k][j].clone();
                a[i][j] -= t;
            }
        }
    }
    true
}

/// Identity-sized rational matrix helper for tests and oracles.
pub fn rational_identity(n: usize) -> Vec<Vec<Rational>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect()
}
