//! Dense matrices over a generic [`Scalar`], with rank-revealing elimination,
//! null spaces, linear solves and nilpotency detection.
//!
//! Everything here is sized for desk-scale problems (dimension up to a few
//! dozen); elimination uses partial pivoting by magnitude with the pivot
//! threshold `rank_tol * max|entry|` in float mode and exact zero tests in
//! exact mode.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{RealScalar, Scalar};

/// Thresholds for float-mode decisions. Ignored entirely by exact scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Pivot threshold for rank decisions, relative to the largest entry.
    pub rank_tol: f64,
    /// Verification threshold for residual checks.
    pub residual_tol: f64,
    /// Radius used to merge float eigenvalue clusters into one multiple root.
    pub cluster_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_tol: 1e-10,
            residual_tol: 1e-9,
            cluster_tol: 1e-6,
        }
    }
}

impl Tolerance {
    pub fn with_rank_tol(mut self, rank_tol: f64) -> Self {
        self.rank_tol = rank_tol;
        self
    }

    pub fn with_residual_tol(mut self, residual_tol: f64) -> Self {
        self.residual_tol = residual_tol;
        self
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Build from nested rows; panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|row| row.len() == c),
            "ragged rows in matrix literal"
        );
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn diag(entries: &[T]) -> Self {
        let n = entries.len();
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                entries[i].clone()
            } else {
                T::zero()
            }
        })
    }

    /// Column vector (n x 1).
    pub fn col_vec(entries: Vec<T>) -> Self {
        let rows = entries.len();
        Matrix {
            rows,
            cols: 1,
            data: entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Matrix<T> {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn column(&self, j: usize) -> Matrix<T> {
        Matrix::from_fn(self.rows, 1, |i, _| self[(i, j)].clone())
    }

    pub fn columns(&self) -> Vec<Matrix<T>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    /// Contiguous sub-block starting at (r0, c0).
    pub fn sub_block(&self, r0: usize, c0: usize, nrows: usize, ncols: usize) -> Matrix<T> {
        assert!(r0 + nrows <= self.rows && c0 + ncols <= self.cols);
        Matrix::from_fn(nrows, ncols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix<T>) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)].clone();
            }
        }
    }

    pub fn hstack(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        let mut out = Matrix::zeros(self.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(0, self.cols, other);
        out
    }

    pub fn vstack(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        let mut out = Matrix::zeros(self.rows + other.rows, self.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, 0, other);
        out
    }

    pub fn block_diag(blocks: &[&Matrix<T>]) -> Matrix<T> {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(rows, cols);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            out.set_block(r, c, b);
            r += b.rows;
            c += b.cols;
        }
        out
    }

    pub fn from_columns(cols: &[Matrix<T>]) -> Matrix<T> {
        assert!(!cols.is_empty(), "from_columns needs at least one column");
        let rows = cols[0].rows;
        assert!(cols.iter().all(|c| c.rows == rows && c.cols == 1));
        Matrix::from_fn(rows, cols.len(), |i, j| cols[j][(i, 0)].clone())
    }

    pub fn scale(&self, factor: &T) -> Matrix<T> {
        self.map(|x| x.clone() * factor.clone())
    }

    pub fn pow(&self, k: usize) -> Matrix<T> {
        assert!(self.is_square());
        let mut out = Matrix::identity(self.rows);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Largest entry magnitude; 0 for empty matrices.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    /// Max row sum of entry magnitudes (induced infinity norm).
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].magnitude()).sum())
            .fold(0.0, f64::max)
    }

    /// Max column sum of entry magnitudes (induced 1-norm).
    pub fn one_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].magnitude()).sum())
            .fold(0.0, f64::max)
    }

    pub fn is_negligible(&self, threshold: f64) -> bool {
        self.data.iter().all(|x| x.is_negligible(threshold))
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    fn pivot_threshold(&self, tol: &Tolerance) -> f64 {
        if T::EXACT {
            0.0
        } else {
            tol.rank_tol * self.max_abs()
        }
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self, tol: &Tolerance) -> Result<T> {
        if !self.is_square() {
            return Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let threshold = self.pivot_threshold(tol);
        let mut a = self.clone();
        let mut det = T::one();
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&i, &j| {
                    a[(i, col)]
                        .magnitude()
                        .partial_cmp(&a[(j, col)].magnitude())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            if a[(pivot_row, col)].is_negligible(threshold) {
                return Ok(T::zero());
            }
            if pivot_row != col {
                a.swap_rows(pivot_row, col);
                det = -det;
            }
            let pivot = a[(col, col)].clone();
            det = det * pivot.clone();
            for row in col + 1..n {
                let factor = a[(row, col)].clone() / pivot.clone();
                for j in col..n {
                    let v = a[(col, j)].clone();
                    a[(row, j)] = a[(row, j)].clone() - factor.clone() * v;
                }
            }
        }
        Ok(det)
    }

    /// Solve `self * X = rhs` for possibly multiple right-hand sides.
    pub fn solve(&self, rhs: &Matrix<T>, tol: &Tolerance) -> Result<Matrix<T>> {
        if !self.is_square() {
            return Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if rhs.rows != self.rows {
            return Err(Error::dim(format!(
                "solve: lhs is {}x{} but rhs has {} rows",
                self.rows, self.cols, rhs.rows
            )));
        }
        let n = self.rows;
        let k = rhs.cols;
        let threshold = self.pivot_threshold(tol);
        let mut a = self.hstack(rhs);
        // Forward elimination.
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&i, &j| {
                    a[(i, col)]
                        .magnitude()
                        .partial_cmp(&a[(j, col)].magnitude())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            if a[(pivot_row, col)].is_negligible(threshold) {
                return Err(Error::SingularMatrix);
            }
            if pivot_row != col {
                a.swap_rows(pivot_row, col);
            }
            let pivot = a[(col, col)].clone();
            for row in col + 1..n {
                let factor = a[(row, col)].clone() / pivot.clone();
                for j in col..n + k {
                    let v = a[(col, j)].clone();
                    a[(row, j)] = a[(row, j)].clone() - factor.clone() * v;
                }
            }
        }
        // Back substitution.
        let mut x: Matrix<T> = Matrix::zeros(n, k);
        for col in (0..n).rev() {
            let pivot = a[(col, col)].clone();
            for j in 0..k {
                let mut sum = a[(col, n + j)].clone();
                for inner in col + 1..n {
                    sum = sum - a[(col, inner)].clone() * x[(inner, j)].clone();
                }
                x[(col, j)] = sum / pivot.clone();
            }
        }
        Ok(x)
    }

    pub fn inverse(&self, tol: &Tolerance) -> Result<Matrix<T>> {
        self.solve(&Matrix::identity(self.rows), tol)
    }

    /// Rank and an explicit kernel basis (columns). Always satisfies
    /// `rank + basis.cols() == self.cols()`.
    pub fn rank_and_nullspace(&self, tol: &Tolerance) -> (usize, Matrix<T>) {
        let threshold = self.pivot_threshold(tol);
        let (m, n) = (self.rows, self.cols);
        let mut a = self.clone();
        let mut pivot_cols: Vec<usize> = Vec::new();
        let mut row = 0;
        for col in 0..n {
            if row >= m {
                break;
            }
            let pivot_row = (row..m)
                .max_by(|&i, &j| {
                    a[(i, col)]
                        .magnitude()
                        .partial_cmp(&a[(j, col)].magnitude())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            if a[(pivot_row, col)].is_negligible(threshold) {
                continue;
            }
            a.swap_rows(pivot_row, row);
            let pivot = a[(row, col)].clone();
            for j in col..n {
                a[(row, j)] = a[(row, j)].clone() / pivot.clone();
            }
            for r in 0..m {
                if r != row && !a[(r, col)].is_negligible(threshold) {
                    let factor = a[(r, col)].clone();
                    for j in col..n {
                        let v = a[(row, j)].clone();
                        a[(r, j)] = a[(r, j)].clone() - factor.clone() * v;
                    }
                }
            }
            pivot_cols.push(col);
            row += 1;
        }
        let rank = pivot_cols.len();
        let free_cols: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
        let mut basis = Matrix::zeros(n, free_cols.len());
        for (k, &fc) in free_cols.iter().enumerate() {
            basis[(fc, k)] = T::one();
            for (r, &pc) in pivot_cols.iter().enumerate() {
                basis[(pc, k)] = -a[(r, fc)].clone();
            }
        }
        (rank, basis)
    }

    pub fn rank(&self, tol: &Tolerance) -> usize {
        self.rank_and_nullspace(tol).0
    }

    /// Smallest `k >= 1` with `self^k = 0`, or [`Error::NotNilpotent`].
    ///
    /// In float mode the zero test for the k-th power uses the threshold
    /// `rank_tol * max(1, max|entry|)^k`, tracking the natural growth of
    /// entry products.
    pub fn nilpotency_index(&self, tol: &Tolerance) -> Result<usize> {
        if !self.is_square() {
            return Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(1);
        }
        let base = self.max_abs().max(1.0);
        let mut power = self.clone();
        let mut scale = base;
        for k in 1..=n {
            let threshold = if T::EXACT { 0.0 } else { tol.rank_tol * scale };
            if power.is_negligible(threshold) {
                return Ok(k);
            }
            power = &power * self;
            scale *= base;
        }
        Err(Error::NotNilpotent)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for col in 0..self.cols {
            self.data.swap(i * self.cols + col, j * self.cols + col);
        }
    }
}

impl<T: RealScalar> Matrix<T> {
    pub fn complexify(&self) -> Matrix<T::Cx> {
        self.map(RealScalar::complexify)
    }
}

/// Extract the real part of a complex matrix, failing when any imaginary
/// entry exceeds `im_tol * max(1, max|entry|)`.
pub fn real_part_checked<T: RealScalar>(m: &Matrix<T::Cx>, im_tol: f64) -> Result<Matrix<T>> {
    let scale = m.max_abs().max(1.0);
    let mut worst = 0.0f64;
    for z in m.as_slice() {
        worst = worst.max(T::imag_part(z).magnitude());
    }
    if worst > im_tol * scale {
        return Err(Error::ImaginaryResidue { magnitude: worst });
    }
    Ok(m.map(|z| T::real_part(z)))
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape");
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() + rhs[(i, j)].clone()
        })
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape");
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() - rhs[(i, j)].clone()
        })
    }
}

impl<T: Scalar> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        self.map(|x| -x.clone())
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "mul shape");
        let mut out: Matrix<T> = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let lhs = self[(i, k)].clone();
                if lhs.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)].clone() + lhs.clone() * rhs[(k, j)].clone();
                }
            }
        }
        out
    }
}

impl<T: Scalar> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn m64(rows: Vec<Vec<f64>>) -> Matrix<f64> {
        Matrix::from_rows(rows)
    }

    #[test]
    fn rank_of_identity_is_full() {
        let (rank, basis) = Matrix::<f64>::identity(3).rank_and_nullspace(&Tolerance::default());
        assert_eq!(rank, 3);
        assert_eq!(basis.cols(), 0);
    }

    #[test]
    fn rank_of_zero_matrix_is_zero() {
        let (rank, basis) = Matrix::<f64>::zeros(2, 2).rank_and_nullspace(&Tolerance::default());
        assert_eq!(rank, 0);
        assert_eq!(basis.cols(), 2);
    }

    #[test]
    fn kernel_of_rank_one_matrix() {
        let a = m64(vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        let (rank, basis) = a.rank_and_nullspace(&Tolerance::default());
        assert_eq!(rank, 1);
        assert_eq!(basis.cols(), 1);
        // Kernel is spanned by (2, -1); check A * basis = 0 and direction.
        let prod = &a * &basis;
        assert!(prod.max_abs() < 1e-12);
        let ratio = basis[(0, 0)] / basis[(1, 0)];
        assert!((ratio - (-2.0)).abs() < 1e-12);
    }

    #[test]
    fn solve_identity() {
        let b = Matrix::col_vec(vec![3.0, 4.0]);
        let x = Matrix::<f64>::identity(2).solve(&b, &Tolerance::default()).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn solve_diagonal() {
        let a = Matrix::diag(&[2.0f64, 4.0]);
        let b = Matrix::col_vec(vec![2.0, 8.0]);
        let x = a.solve(&b, &Tolerance::default()).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((x[(1, 0)] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn solve_singular_reports_error() {
        let a = Matrix::<f64>::zeros(2, 2);
        let b = Matrix::col_vec(vec![1.0, 0.0]);
        assert_eq!(a.solve(&b, &Tolerance::default()), Err(Error::SingularMatrix));
    }

    #[test]
    fn nilpotency_of_zero_is_one() {
        let n = Matrix::<f64>::zeros(1, 1);
        assert_eq!(n.nilpotency_index(&Tolerance::default()), Ok(1));
    }

    #[test]
    fn nilpotency_of_shift_block() {
        let n = m64(vec![vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert_eq!(n.nilpotency_index(&Tolerance::default()), Ok(2));
    }

    #[test]
    fn identity_is_not_nilpotent() {
        let n = Matrix::<f64>::identity(2);
        assert_eq!(n.nilpotency_index(&Tolerance::default()), Err(Error::NotNilpotent));
    }

    #[test]
    fn exact_mode_solve_is_bit_exact() {
        let q = |n, d| BigRational::from_ratio(n, d);
        let a = Matrix::from_rows(vec![vec![q(1, 3), q(1, 2)], vec![q(2, 5), q(1, 7)]]);
        let b = Matrix::col_vec(vec![q(1, 1), q(0, 1)]);
        let x = a.solve(&b, &Tolerance::default()).unwrap();
        let residual = &(&a * &x) - &b;
        assert!(residual.as_slice().iter().all(num_traits::Zero::is_zero));
    }

    #[test]
    fn exact_rank_detects_dependence() {
        let q = |n: i64, d: i64| BigRational::from_ratio(n, d);
        let a = Matrix::from_rows(vec![vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]]);
        let (rank, basis) = a.rank_and_nullspace(&Tolerance::default());
        assert_eq!(rank, 1);
        let prod = &a * &basis;
        assert!(prod.as_slice().iter().all(num_traits::Zero::is_zero));
    }

    #[test]
    fn empty_products_are_zero_matrices() {
        let a = Matrix::<f64>::zeros(3, 0);
        let b = Matrix::<f64>::zeros(0, 2);
        let c = &a * &b;
        assert_eq!((c.rows(), c.cols()), (3, 2));
        assert!(c.max_abs() == 0.0);
    }

    #[test]
    fn f32_smoke() {
        let a = Matrix::<f32>::identity(2);
        let b = Matrix::col_vec(vec![1.0f32, 2.0]);
        let x = a.solve(&b, &Tolerance::default()).unwrap();
        assert_eq!(x, b);
    }
}
