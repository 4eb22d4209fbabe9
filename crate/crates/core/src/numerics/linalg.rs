//! Small dense linear algebra for the information matrices.
//!
//! Dimensions never exceed a handful of parameters here, so everything is a
//! flat row-major `Vec<f64>` and the symmetric eigenproblem is solved by
//! cyclic Jacobi rotations.

use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};

/// Default relative floor for the smallest eigenvalue of an information matrix.
pub const DEFAULT_EIGEN_FLOOR: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_TOLERANCE: f64 = 1e-14;

/// Dense square matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

/// Dense symmetric matrix; `self[(i, j)] == self[(j, i)]` holds bit for bit.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument(
                "matrix must be square and non-empty".into(),
            ));
        }
        Ok(Matrix {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Matrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.dim, v.len(), "dimension mismatch");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.dim).map(|i| self.row(i)).collect();
        f.debug_struct("Matrix").field("rows", &rows).finish()
    }
}

/// Eigen-decomposition of a symmetric matrix: `vectors` holds one unit
/// eigenvector per row, so `vectors * m * vectors^T = diag(values)`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![1.0; dim])
    }

    pub fn diag(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = SymMatrix::zeros(dim);
        for (i, v) in values.iter().enumerate() {
            m.data[i * dim + i] = *v;
        }
        m
    }

    /// Builds from rows, rejecting anything that is not exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Matrix::from_rows(rows)?;
        let n = m.dim;
        for i in 0..n {
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(SymMatrix {
            dim: n,
            data: m.data,
        })
    }

    /// Builds from the lower triangle of `f`; the upper triangle is mirrored.
    pub fn from_lower(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    /// Symmetrizes an arbitrary square matrix as `(a + a^T) / 2`.
    pub fn symmetrize(a: &Matrix) -> Self {
        Self::from_lower(a.dim, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
    }

    /// Outer product `v v^T`.
    pub fn outer(v: &[f64]) -> Self {
        Self::from_lower(v.len(), |i, j| v[i] * v[j])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.clone(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn scale(&self, factor: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, other: &SymMatrix, factor: f64) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
    }

    /// `self += factor * v v^T`.
    pub fn add_outer(&mut self, v: &[f64], factor: f64) {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                self.data[i * n + j] += factor * v[i] * v[j];
            }
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.dim, v.len(), "dimension mismatch");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Quadratic form `v^T self v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        self.mul_vec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Cyclic Jacobi eigen-decomposition, eigenvalues sorted descending.
    pub fn eigen(&self) -> Result<SymEigen> {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut v = Matrix::identity(n);
        let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let threshold = JACOBI_TOLERANCE * frob;

        let mut converged = false;
        for _ in 0..JACOBI_MAX_SWEEPS {
            let off = off_diagonal_norm(&a, n);
            if off <= threshold {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;

                    a[p * n + p] -= t * apq;
                    a[q * n + q] += t * apq;
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    for k in 0..n {
                        if k == p || k == q {
                            continue;
                        }
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        let new_kp = c * akp - s * akq;
                        let new_kq = s * akp + c * akq;
                        a[k * n + p] = new_kp;
                        a[p * n + k] = new_kp;
                        a[k * n + q] = new_kq;
                        a[q * n + k] = new_kq;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
        if !converged && off_diagonal_norm(&a, n) > threshold {
            return Err(Error::Internal(format!(
                "Jacobi eigen-solver did not converge in {JACOBI_MAX_SWEEPS} sweeps"
            )));
        }

        // Columns of `v` are eigenvectors; emit them as rows in descending order.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
        let values = order.iter().map(|&i| a[i * n + i]).collect();
        let vectors = Matrix::from_fn(n, |row, k| v[(k, order[row])]);
        Ok(SymEigen { values, vectors })
    }

    /// Applies `f` to the eigenvalues: `P^T diag(f(d)) P`.
    fn spectral_map(eig: &SymEigen, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = eig.values.len();
        let mapped: Vec<f64> = eig.values.iter().map(|&d| f(d)).collect();
        let p = &eig.vectors;
        SymMatrix::from_lower(n, |i, j| {
            (0..n).map(|k| p[(k, i)] * mapped[k] * p[(k, j)]).sum()
        })
    }

    fn check_floor(eig: &SymEigen, eigen_floor: f64) -> Result<()> {
        let max = eig.values.first().copied().unwrap_or(0.0);
        let min = eig.values.last().copied().unwrap_or(0.0);
        if !(max > 0.0) || !(min >= eigen_floor * max) {
            return Err(Error::SingularInformation {
                min_eigenvalue: min,
                max_eigenvalue: max,
            });
        }
        Ok(())
    }

    /// Symmetric inverse square root `P^T D^{-1/2} P`.
    ///
    /// Fails with [`Error::SingularInformation`] when the smallest eigenvalue
    /// is below `eigen_floor` times the largest.
    pub fn inv_sqrt(&self, eigen_floor: f64) -> Result<SymMatrix> {
        let eig = self.eigen()?;
        Self::check_floor(&eig, eigen_floor)?;
        Ok(Self::spectral_map(&eig, |d| 1.0 / d.sqrt()))
    }

    /// Symmetric square root of a positive definite matrix.
    pub fn sqrt(&self, eigen_floor: f64) -> Result<SymMatrix> {
        let eig = self.eigen()?;
        Self::check_floor(&eig, eigen_floor)?;
        Ok(Self::spectral_map(&eig, f64::sqrt))
    }

    /// Inverse through the eigen-decomposition.
    pub fn inverse(&self, eigen_floor: f64) -> Result<SymMatrix> {
        let eig = self.eigen()?;
        Self::check_floor(&eig, eigen_floor)?;
        Ok(Self::spectral_map(&eig, |d| 1.0 / d))
    }

    /// Solves `self x = b` by Cholesky factorisation; `self` must be positive definite.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim;
        assert_eq!(b.len(), n, "dimension mismatch");
        let mut l = vec![0.0; n * n];
        let scale = self.max_abs();
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self[(i, j)];
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(sum > DEFAULT_EIGEN_FLOOR * scale) {
                        return Err(Error::SingularInformation {
                            min_eigenvalue: sum,
                            max_eigenvalue: scale,
                        });
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        let mut y = vec![0.0; n];
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
            y[i] = (b[i] - s) / l[i * n + i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|k| l[k * n + i] * x[k]).sum();
            x[i] = (y[i] - s) / l[i * n + i];
        }
        Ok(x)
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.dim).map(|i| self.row(i)).collect();
        f.debug_struct("SymMatrix").field("rows", &rows).finish()
    }
}
