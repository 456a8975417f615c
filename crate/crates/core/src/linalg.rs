//! Dense complex matrices and LU factorization with partial pivoting.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(ZERO, |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn mul_mat(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `diag(d) * self`.
    pub fn scale_rows(&self, d: &[Complex64]) -> ComplexMatrix {
        assert_eq!(d.len(), self.rows, "dimension mismatch");
        let mut out = self.clone();
        for (i, &s) in d.iter().enumerate() {
            for v in &mut out.data[i * self.cols..(i + 1) * self.cols] {
                *v *= s;
            }
        }
        out
    }

    /// Entries `row[i] * a_ij * col[j]`.
    pub fn scale_real(&self, row: &[f64], col: &[f64]) -> ComplexMatrix {
        assert_eq!((row.len(), col.len()), (self.rows, self.cols), "dimension mismatch");
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * (row[i] * col[j]))
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        ComplexMatrix { data, ..*self }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        ComplexMatrix { data, ..*self }
    }

    pub fn neg(&self) -> ComplexMatrix {
        ComplexMatrix {
            data: self.data.iter().map(|a| -a).collect(),
            ..*self
        }
    }

    /// `I + self`.
    pub fn add_identity(&self) -> ComplexMatrix {
        assert_eq!(self.rows, self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            out[(i, i)] += ONE;
        }
        out
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &ComplexMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            let dst = &mut self.data[(r0 + i) * self.cols + c0..(r0 + i) * self.cols + c0 + block.cols];
            dst.copy_from_slice(block.row(i));
        }
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn norm_inf_vec(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `P R A = LU` with `R` the row-equilibration diagonal and unit-diagonal `L`
/// stored below the diagonal of `lu`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    row_scale: Vec<f64>,
    pivot_growth: f64,
}

impl Lu {
    /// Factorizes a square matrix after scaling every row to unit maximum. A
    /// pivot no larger than `n * eps` (or a zero row) is reported as singular;
    /// `what` names the matrix in the error.
    pub fn factor(a: &ComplexMatrix, what: &'static str) -> Result<Lu> {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let mut row_scale = Vec::with_capacity(n);
        for i in 0..n {
            let m = norm_inf_vec(a.row(i));
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::Singular {
                    what,
                    column: i,
                    pivot_growth: f64::INFINITY,
                });
            }
            row_scale.push(1.0 / m);
        }
        let ones = vec![1.0; n];
        let mut lu = a.scale_real(&row_scale, &ones);
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = lu.max_abs();
        let threshold = n as f64 * f64::EPSILON * scale;
        let mut max_u = 0.0_f64;
        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmag > threshold) || scale == 0.0 {
                return Err(Error::Singular {
                    what,
                    column: k,
                    pivot_growth: if scale > 0.0 { max_u / scale } else { f64::INFINITY },
                });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= factor * u;
                }
            }
            for j in k..n {
                max_u = max_u.max(lu[(k, j)].norm());
            }
        }
        Ok(Lu {
            lu,
            perm,
            row_scale,
            pivot_growth: if scale > 0.0 { max_u / scale } else { 1.0 },
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    /// `max|U| / max|RA|`.
    pub fn pivot_growth(&self) -> f64 {
        self.pivot_growth
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(b.len(), n, "dimension mismatch");
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p] * self.row_scale[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= row[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        x
    }

    /// Solves for every column of `b`.
    pub fn solve_matrix(&self, b: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(b.rows, self.dim(), "dimension mismatch");
        let mut out = ComplexMatrix::zeros(b.rows, b.cols);
        let mut col = vec![ZERO; b.rows];
        for j in 0..b.cols {
            for (i, c) in col.iter_mut().enumerate() {
                *c = b[(i, j)];
            }
            let x = self.solve(&col);
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    pub fn inverse(&self) -> ComplexMatrix {
        self.solve_matrix(&ComplexMatrix::identity(self.dim()))
    }
}

/// `b - A x`.
pub fn residual(a: &ComplexMatrix, x: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.mul_vec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

/// LU solve with one step of iterative refinement when the residual exceeds
/// `1e-10 (|A| |x| + |b|)`. Returns the solution and its residual norm.
pub fn solve_refined(
    a: &ComplexMatrix,
    b: &[Complex64],
    what: &'static str,
) -> Result<(Vec<Complex64>, f64)> {
    let lu = Lu::factor(a, what)?;
    let mut x = lu.solve(b);
    let mut r = residual(a, &x, b);
    let bound = |x: &[Complex64]| 1e-10 * (a.norm_inf() * norm_inf_vec(x) + norm_inf_vec(b));
    if norm_inf_vec(&r) > bound(&x) {
        let dx = lu.solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
        r = residual(a, &x, b);
    }
    Ok((x, norm_inf_vec(&r)))
}
