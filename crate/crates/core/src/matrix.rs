use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Ring, Scalar};

/// Small dense row-major matrix over any [`Ring`].
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T> Mat<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn data(&self) -> &[T] {
        &self.data
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn row_vecs(&self) -> Vec<Vec<T>>
    where
        T: Clone,
    {
        self.data.chunks(self.cols.max(1)).map(|r| r.to_vec()).collect()
    }
}

impl<T: Ring> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diag(entries: &[T]) -> Self {
        let n = entries.len();
        Mat::from_fn(n, n, |i, j| if i == j { entries[i].clone() } else { T::zero() })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Mat::from_fn(r, c, |i, j| rows[i][j].clone()))
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        Mat::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = T::zero();
            for k in 0..self.cols {
                acc = acc + self[(i, k)].clone() * other[(k, j)].clone();
            }
            acc
        })
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (k, vk) in v.iter().enumerate() {
                    acc = acc + self[(i, k)].clone() * vk.clone();
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() + other[(i, j)].clone())
    }

    pub fn sub(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() - other[(i, j)].clone())
    }

    pub fn scaled(&self, s: &T) -> Mat<T> {
        self.map(|x| x.clone() * s.clone())
    }

    /// `(A + Aᵀ) / 2`; requires 2 to be invertible in `T`.
    pub fn symmetric_part(&self) -> Mat<T> {
        let half = T::from_rational(&crate::scalar::rat(1, 2));
        Mat::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)].clone() + self[(j, i)].clone()) * half.clone()
        })
    }

    pub fn trace(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.rows.min(self.cols) {
            acc = acc + self[(i, i)].clone();
        }
        acc
    }

    /// Quadratic form `vᵀ A v`.
    pub fn quad(&self, v: &[T]) -> T {
        let av = self.matvec(v);
        let mut acc = T::zero();
        for (a, b) in av.into_iter().zip(v.iter()) {
            acc = acc + a * b.clone();
        }
        acc
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }
}

impl<T: Scalar> Mat<T> {
    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Mat<T>> {
        if !self.is_square() {
            return Err(Error::Dimension("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::<T>::identity(n);
        let scale = self.data.iter().map(|x| x.magnitude()).fold(0.0, f64::max);
        for col in 0..n {
            let (piv, mag) = (col..n)
                .map(|r| (r, a[(r, col)].magnitude()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            let tiny = if T::is_exact() { 0.0 } else { 1e-14 * scale.max(f64::MIN_POSITIVE) };
            if mag <= tiny {
                return Err(Error::Singular(format!("pivot {col} vanishes")));
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                    inv.data.swap(piv * n + j, col * n + j);
                }
            }
            let p = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] = a[(col, j)].clone() / p.clone();
                inv[(col, j)] = inv[(col, j)].clone() / p.clone();
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)].clone();
                if factor.is_zero() {
                    continue;
                }
                for j in 0..n {
                    a[(r, j)] = a[(r, j)].clone() - factor.clone() * a[(col, j)].clone();
                    inv[(r, j)] = inv[(r, j)].clone() - factor.clone() * inv[(col, j)].clone();
                }
            }
        }
        Ok(inv)
    }

    /// Determinant by elimination.
    pub fn determinant(&self) -> T {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for col in 0..n {
            let piv = (col..n).max_by(|&x, &y| {
                a[(x, col)].magnitude().partial_cmp(&a[(y, col)].magnitude()).unwrap()
            });
            let piv = match piv {
                Some(p) if !a[(p, col)].is_zero() => p,
                _ => return T::zero(),
            };
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[(col, col)].clone();
            det = det * p.clone();
            for r in col + 1..n {
                let factor = a[(r, col)].clone() / p.clone();
                for j in col..n {
                    a[(r, j)] = a[(r, j)].clone() - factor.clone() * a[(col, j)].clone();
                }
            }
        }
        det
    }

    /// Positive definiteness via symmetric LDLᵀ without pivoting.
    pub fn is_positive_definite(&self) -> bool {
        if !self.is_square() || !self.is_symmetric_approx() {
            return false;
        }
        let n = self.rows;
        let mut a = self.clone();
        for k in 0..n {
            let d = a[(k, k)].clone();
            if d.to_f64() <= 0.0 || d.is_zero() {
                return false;
            }
            for i in k + 1..n {
                let factor = a[(i, k)].clone() / d.clone();
                for j in k + 1..n {
                    a[(i, j)] = a[(i, j)].clone() - factor.clone() * a[(k, j)].clone();
                }
            }
        }
        true
    }

    fn is_symmetric_approx(&self) -> bool {
        if T::is_exact() {
            return self.is_symmetric();
        }
        let scale = self.data.iter().map(|x| x.magnitude()).fold(0.0, f64::max);
        (0..self.rows).all(|i| {
            (0..i).all(|j| (self[(i, j)].to_f64() - self[(j, i)].to_f64()).abs() <= 1e-12 * scale)
        })
    }

    pub fn to_f64(&self) -> Mat<f64> {
        self.map(|x| x.to_f64())
    }

    pub fn max_abs_diff(&self, other: &Mat<T>) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a.clone() - b.clone()).magnitude())
            .fold(0.0, f64::max)
    }
}

impl Mat<f64> {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Lower Cholesky factor.
    pub fn cholesky(&self) -> Result<Mat<f64>> {
        let n = self.rows;
        let mut l = Mat::<f64>::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite(format!("pivot {j} = {d:e}")));
            }
            let dj = d.sqrt();
            l[(j, j)] = dj;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / dj;
            }
        }
        Ok(l)
    }
}
